#pragma once

#include <Eigen/Dense>
#include <vector>

#include "skg/channel.hpp"
#include "skg/rng.hpp"

namespace skg {

// Downlink pilot matrix S_DL (M x T) and its induced covariance C = S S^H.
struct TrainingSequence {
    Eigen::MatrixXcd S;  // M x T; T may be 0 (no training)

    long M() const { return S.rows(); }
    long T() const { return S.cols(); }
    Eigen::MatrixXcd covariance() const { return S * S.adjoint(); }
    double power() const { return S.squaredNorm(); }

    static TrainingSequence empty(long M) {
        return TrainingSequence{Eigen::MatrixXcd::Zero(M, 0)};
    }
};

struct CapacityReport {
    std::vector<double> per_user;  // bits, clamped >= 0
    double average = 0.0;
    double sum = 0.0;
    double criterion_value = 0.0;
};

// log2 det of a Hermitian positive definite matrix via Cholesky; retries with a
// jitter of 1e-12 * trace on the diagonal if the factorization fails.
double log2_det_hpd(const Eigen::MatrixXcd& A);

// Secret-key capacity in the S-dimensional mode space given the Gram matrix
// Q^H C_DL Q / sigma_DL^2.  Shared core of the Woodbury and optimizer paths.
double capacity_mode_gram(const Eigen::VectorXd& lambda, double ul_snr,
                          const Eigen::MatrixXcd& gram_over_noise);

// Raw log-ratio of determinants on the joint covariance of (mode-projected UL
// observation, DL observation), before any matrix-inversion-lemma rewrite.
double capacity_determinant(const UserStatistics& user, const TrainingSequence& seq,
                            double dl_noise_var);

// C = log2|L + r^-1 I| - log2|r^-1 I + (L^-1 + Q^H C_DL Q / s^2)^-1|
double capacity_woodbury(const UserStatistics& user, const TrainingSequence& seq,
                         double dl_noise_var);

// Closed parallel-mode form: sum_s log2(1 + l^2 r_ul r_dl / (l (r_ul + r_dl) + 1)).
double capacity_parallel(const Eigen::VectorXd& lambda, double ul_snr,
                         const Eigen::VectorXd& dl_mode_snr);

struct MonteCarloEstimate {
    double estimate = 0.0;  // bits
    double stderr_ = 0.0;   // jackknife standard error, bits
};

// Plug-in Gaussian mutual information on empirical covariances of sampled
// (UL, DL) observation pairs, with a delete-one-block jackknife standard error.
MonteCarloEstimate capacity_monte_carlo(const UserStatistics& user,
                                        const TrainingSequence& seq,
                                        double dl_noise_var, long n_samples,
                                        CounterRng& rng, int n_blocks = 100);

double average_capacity(const std::vector<double>& per_user);

CapacityReport make_report(const std::vector<double>& per_user);

}  // namespace skg
