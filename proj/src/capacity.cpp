#include "skg/capacity.hpp"

#include <cmath>
#include <stdexcept>

namespace skg {

namespace {
constexpr double kLog2e = 1.4426950408889634;  // 1/ln 2

double clamp_nonneg(double c) { return c < 0.0 ? 0.0 : c; }
}  // namespace

double log2_det_hpd(const Eigen::MatrixXcd& A) {
    if (A.rows() == 0) return 0.0;
    Eigen::LLT<Eigen::MatrixXcd> llt(A);
    if (llt.info() != Eigen::Success) {
        Eigen::MatrixXcd Aj = A;
        const double jitter = 1e-12 * std::abs(A.trace().real());
        Aj.diagonal().array() += jitter;
        llt.compute(Aj);
        if (llt.info() != Eigen::Success)
            throw std::invalid_argument("log2_det_hpd: matrix not positive definite");
    }
    double s = 0.0;
    for (long i = 0; i < A.rows(); ++i) s += std::log(llt.matrixL()(i, i).real());
    return 2.0 * s * kLog2e;
}

double capacity_mode_gram(const Eigen::VectorXd& lambda, double ul_snr,
                          const Eigen::MatrixXcd& gram_over_noise) {
    const long S = lambda.size();
    if (S == 0) return 0.0;
    if (ul_snr <= 0.0) throw std::invalid_argument("capacity: ul_snr must be > 0");
    if (gram_over_noise.rows() != S || gram_over_noise.cols() != S)
        throw std::invalid_argument("capacity: gram dimension mismatch");

    Eigen::MatrixXcd A = gram_over_noise;  // Lambda^-1 + Q^H C Q / s^2
    A.diagonal().array() += lambda.array().inverse().cast<std::complex<double>>();
    Eigen::MatrixXcd Ainv = A.llt().solve(Eigen::MatrixXcd::Identity(S, S));

    Eigen::MatrixXcd num = Eigen::MatrixXcd::Zero(S, S);
    num.diagonal() = (lambda.array() + 1.0 / ul_snr).cast<std::complex<double>>();
    Eigen::MatrixXcd den = Ainv;
    den.diagonal().array() += 1.0 / ul_snr;

    return clamp_nonneg(log2_det_hpd(num) - log2_det_hpd(den));
}

static Eigen::MatrixXcd mode_gram(const UserStatistics& user, const TrainingSequence& seq,
                                  double dl_noise_var) {
    if (seq.M() != user.modes.M)
        throw std::invalid_argument("capacity: training sequence antenna count mismatch");
    if (dl_noise_var <= 0.0) throw std::invalid_argument("capacity: dl_noise_var must be > 0");
    const Eigen::MatrixXcd F = user.modes.Q.adjoint() * seq.S;  // S x T
    Eigen::MatrixXcd gram = (F * F.adjoint()) / dl_noise_var;
    gram = 0.5 * (gram + gram.adjoint().eval());
    return gram;
}

double capacity_woodbury(const UserStatistics& user, const TrainingSequence& seq,
                         double dl_noise_var) {
    const Eigen::MatrixXcd gram = mode_gram(user, seq, dl_noise_var);
    if (gram.rows() > 0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram, Eigen::EigenvaluesOnly);
        const double lmax = std::max(es.eigenvalues().maxCoeff(), 0.0);
        if (es.eigenvalues().minCoeff() < -1e-10 * std::max(lmax, 1.0))
            throw std::invalid_argument("capacity_woodbury: C_DL not PSD");
    }
    return capacity_mode_gram(user.modes.lambda, user.uplink_snr, gram);
}

double capacity_determinant(const UserStatistics& user, const TrainingSequence& seq,
                            double dl_noise_var) {
    if (seq.M() != user.modes.M)
        throw std::invalid_argument("capacity: training sequence antenna count mismatch");
    if (dl_noise_var <= 0.0) throw std::invalid_argument("capacity: dl_noise_var must be > 0");
    const long S = user.modes.S;
    const long T = seq.T();
    if (S == 0 || T == 0) return 0.0;

    // z_ul = sqrt(rho) L^{1/2} g + w_ul  (unit UL noise), z_dl = F^H L^{1/2} g + w_dl
    const double rho = user.uplink_snr;
    const Eigen::MatrixXcd F = user.modes.Q.adjoint() * seq.S;  // S x T
    const Eigen::VectorXd& lam = user.modes.lambda;

    Eigen::MatrixXcd Cul = Eigen::MatrixXcd::Zero(S, S);
    Cul.diagonal() = (rho * lam.array() + 1.0).cast<std::complex<double>>();
    Eigen::MatrixXcd Cdl = F.adjoint() * lam.asDiagonal() * F;
    Cdl.diagonal().array() += dl_noise_var;
    const Eigen::MatrixXcd Cross = std::sqrt(rho) * lam.asDiagonal() * F;  // S x T

    const Eigen::MatrixXcd schur =
        Cul - Cross * Cdl.llt().solve(Cross.adjoint());
    return clamp_nonneg(log2_det_hpd(Cul) - log2_det_hpd(schur));
}

double capacity_parallel(const Eigen::VectorXd& lambda, double ul_snr,
                         const Eigen::VectorXd& dl_mode_snr) {
    if (lambda.size() != dl_mode_snr.size())
        throw std::invalid_argument("capacity_parallel: length mismatch");
    if (ul_snr <= 0.0) throw std::invalid_argument("capacity_parallel: ul_snr must be > 0");
    double c = 0.0;
    for (long s = 0; s < lambda.size(); ++s) {
        const double l = lambda(s);
        const double rd = dl_mode_snr(s);
        if (l < 0.0 || rd < 0.0)
            throw std::invalid_argument("capacity_parallel: negative gain or SNR");
        c += std::log2(1.0 + l * l * ul_snr * rd / (l * (ul_snr + rd) + 1.0));
    }
    return c;
}

MonteCarloEstimate capacity_monte_carlo(const UserStatistics& user,
                                        const TrainingSequence& seq,
                                        double dl_noise_var, long n_samples,
                                        CounterRng& rng, int n_blocks) {
    if (n_samples < 10000)
        throw std::invalid_argument("capacity_monte_carlo: need n_samples >= 1e4");
    const long S = user.modes.S;
    const long T = seq.T();
    if (S == 0 || T == 0) return {0.0, 0.0};

    const double rho = user.uplink_snr;
    const Eigen::MatrixXcd BH = (user.modes.Q.adjoint() * seq.S).adjoint() *
                                user.modes.lambda.cwiseSqrt().asDiagonal();  // T x S
    const Eigen::VectorXd amp_ul = std::sqrt(rho) * user.modes.lambda.cwiseSqrt();
    const double dl_sigma = std::sqrt(dl_noise_var);

    const long D = S + T;
    const long block_len = n_samples / n_blocks;
    std::vector<Eigen::MatrixXcd> scatter(n_blocks, Eigen::MatrixXcd::Zero(D, D));
    Eigen::VectorXcd x(D), g(S);
    for (int b = 0; b < n_blocks; ++b) {
        for (long i = 0; i < block_len; ++i) {
            for (long s = 0; s < S; ++s) g(s) = rng.next_complex_gaussian();
            for (long s = 0; s < S; ++s)
                x(s) = amp_ul(s) * g(s) + rng.next_complex_gaussian();
            x.tail(T) = BH * g;
            for (long t = 0; t < T; ++t)
                x(S + t) += dl_sigma * rng.next_complex_gaussian();
            scatter[b].noalias() += x * x.adjoint();
        }
    }

    auto mi_of = [&](const Eigen::MatrixXcd& C) {
        return clamp_nonneg(log2_det_hpd(C.topLeftCorner(S, S)) +
                            log2_det_hpd(C.bottomRightCorner(T, T)) - log2_det_hpd(C));
    };

    Eigen::MatrixXcd total = Eigen::MatrixXcd::Zero(D, D);
    for (const auto& s : scatter) total += s;
    const double n_used = static_cast<double>(block_len) * n_blocks;
    const double full = mi_of(total / n_used);

    // delete-one-block jackknife
    double mean = 0.0;
    std::vector<double> reps(n_blocks);
    for (int b = 0; b < n_blocks; ++b) {
        reps[b] = mi_of((total - scatter[b]) / (n_used - block_len));
        mean += reps[b];
    }
    mean /= n_blocks;
    double var = 0.0;
    for (int b = 0; b < n_blocks; ++b) var += (reps[b] - mean) * (reps[b] - mean);
    var *= static_cast<double>(n_blocks - 1) / n_blocks;
    return {full, std::sqrt(var)};
}

double average_capacity(const std::vector<double>& per_user) {
    if (per_user.empty()) throw std::invalid_argument("average_capacity: empty list");
    double s = 0.0;
    for (double c : per_user) s += c;
    return s / static_cast<double>(per_user.size());
}

CapacityReport make_report(const std::vector<double>& per_user) {
    CapacityReport r;
    r.per_user.reserve(per_user.size());
    for (double c : per_user) r.per_user.push_back(clamp_nonneg(c));
    r.sum = 0.0;
    for (double c : r.per_user) r.sum += c;
    r.average = r.sum / static_cast<double>(r.per_user.size());
    return r;
}

}  // namespace skg
