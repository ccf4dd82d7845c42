#include "skg/matrix_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace skg {

std::string format_complex(std::complex<double> z) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%.17g%+.17gi", z.real(), z.imag());
    return buf;
}

std::complex<double> parse_complex(const std::string& token) {
    // forms: "a+bi", "a-bi", also bare reals "a"
    if (token.empty()) throw std::invalid_argument("empty complex token");
    const char* s = token.c_str();
    char* end = nullptr;
    double re = std::strtod(s, &end);
    if (end == s) throw std::invalid_argument("bad complex token: " + token);
    if (*end == '\0') return {re, 0.0};
    const char* s2 = end;
    char* end2 = nullptr;
    double im = std::strtod(s2, &end2);
    if (end2 == s2 || *end2 != 'i' || *(end2 + 1) != '\0')
        throw std::invalid_argument("bad complex token: " + token);
    return {re, im};
}

Eigen::MatrixXcd load_complex_matrix(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw std::invalid_argument("missing matrix header");
    std::istringstream hs(header);
    long a = 0, b = 0;
    std::string tag;
    hs >> a;
    if (!hs) throw std::invalid_argument("bad matrix header: " + header);
    hs >> tag;
    if (tag != "re+im") {
        // rectangular form "R C re+im"
        b = std::stol(tag);
        hs >> tag;
    } else {
        b = a;
    }
    if (tag != "re+im") throw std::invalid_argument("bad matrix header: " + header);
    if (a < 1 || b < 1) throw std::invalid_argument("bad matrix dimensions in header");

    Eigen::MatrixXcd m(a, b);
    for (long i = 0; i < a; ++i) {
        for (long j = 0; j < b; ++j) {
            std::string tok;
            if (!(in >> tok))
                throw std::invalid_argument("truncated matrix body at row " + std::to_string(i));
            m(i, j) = parse_complex(tok);
        }
    }
    return m;
}

Eigen::MatrixXcd load_complex_matrix_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open matrix file: " + path);
    return load_complex_matrix(f);
}

void dump_complex_matrix(std::ostream& out, const Eigen::MatrixXcd& m) {
    if (m.rows() == m.cols())
        out << m.rows() << " re+im\n";
    else
        out << m.rows() << " " << m.cols() << " re+im\n";
    for (long i = 0; i < m.rows(); ++i) {
        for (long j = 0; j < m.cols(); ++j) {
            if (j) out << " ";
            out << format_complex(m(i, j));
        }
        out << "\n";
    }
}

void dump_complex_matrix_file(const std::string& path, const Eigen::MatrixXcd& m) {
    std::ofstream f(path);
    if (!f) throw std::invalid_argument("cannot open matrix file for write: " + path);
    dump_complex_matrix(f, m);
}

}  // namespace skg
