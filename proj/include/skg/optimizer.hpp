#pragma once

#include <Eigen/Dense>
#include <vector>

#include "skg/designer.hpp"

namespace skg {

// Orthonormal basis of span[Q_1 ... Q_K]; the optimization variable lives in
// this subspace, any orthogonal-complement component being wasted power.
struct SubspaceReduction {
    Eigen::MatrixXcd Q_tilde;  // M x S_eff, orthonormal columns
    long S_eff = 0;
};

struct OptimizerResult {
    Eigen::MatrixXcd Y;  // S_eff x S_eff Hermitian PSD reduced training covariance
    long iterations = 0;
    double criterion_value = 0.0;  // bits
    std::vector<double> per_user;  // bits
    bool converged = false;
    double kkt_residual = 0.0;
};

struct OptimizeOptions {
    long max_iters = 5000;
    double tol = 1e-8;
    double initial_step = 1.0;
    double backtrack = 0.5;
};

SubspaceReduction reduce_subspace(const std::vector<SpatialModeBasis>& bases,
                                  double rel_tol = 1e-10);

// d C_k / d Y in bits per unit power, for Y the reduced training covariance
// (C_DL = Q_tilde Y Q_tilde^H).  Hermitian, same order as Y.
Eigen::MatrixXcd capacity_gradient(const UserStatistics& user, const Eigen::MatrixXcd& Y,
                                   double noise_var, const SubspaceReduction& red);

double capacity_reduced(const UserStatistics& user, const Eigen::MatrixXcd& Y,
                        double noise_var, const SubspaceReduction& red);

// Exact Frobenius projection onto {Y >= 0, tr Y <= budget}: eigenvalue clip,
// then shift-and-clip when the trace cap is active.
Eigen::MatrixXcd project_trace_psd(const Eigen::MatrixXcd& X, double budget);

// Projected-gradient ascent with Armijo backtracking; (weighted) min criteria
// go through an annealed log-sum-exp smoothing of the minimum.
OptimizerResult maximize(const DesignRequest& req, const SubspaceReduction& red,
                         const OptimizeOptions& options = {});

TrainingSequence extract_training_sequence(const OptimizerResult& result,
                                           const SubspaceReduction& red,
                                           double rank_tol = 1e-8);

}  // namespace skg
