#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>

namespace skg {

// Text matrix format used for externally supplied covariances and for dumping
// training sequences.  Header line is "M re+im" for a square M x M matrix or
// "R C re+im" for a rectangular one, followed by one line per row of
// whitespace-separated complex entries written as "a+bi" / "a-bi".
Eigen::MatrixXcd load_complex_matrix(std::istream& in);
Eigen::MatrixXcd load_complex_matrix_file(const std::string& path);

void dump_complex_matrix(std::ostream& out, const Eigen::MatrixXcd& m);
void dump_complex_matrix_file(const std::string& path, const Eigen::MatrixXcd& m);

std::string format_complex(std::complex<double> z);
std::complex<double> parse_complex(const std::string& token);

}  // namespace skg
