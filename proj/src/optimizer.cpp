#include "skg/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "skg/capacity.hpp"

namespace skg {

namespace {
constexpr double kLog2e = 1.4426950408889634;

Eigen::MatrixXcd hermitize(const Eigen::MatrixXcd& A) {
    return 0.5 * (A + A.adjoint().eval());
}
}  // namespace

SubspaceReduction reduce_subspace(const std::vector<SpatialModeBasis>& bases, double rel_tol) {
    if (bases.empty()) throw std::invalid_argument("reduce_subspace: no bases");
    const long M = bases[0].M;
    long total = 0;
    for (const auto& b : bases) {
        if (b.M != M) throw std::invalid_argument("reduce_subspace: mismatched antenna counts");
        total += b.S;
    }
    Eigen::MatrixXcd stacked(M, total);
    long c = 0;
    for (const auto& b : bases) {
        stacked.middleCols(c, b.S) = b.Q;
        c += b.S;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(stacked);
    qr.setThreshold(rel_tol);
    const long rank = qr.rank();
    SubspaceReduction red;
    red.S_eff = rank;
    red.Q_tilde = qr.householderQ() * Eigen::MatrixXcd::Identity(M, rank);
    return red;
}

double capacity_reduced(const UserStatistics& user, const Eigen::MatrixXcd& Y,
                        double noise_var, const SubspaceReduction& red) {
    const Eigen::MatrixXcd G = user.modes.Q.adjoint() * red.Q_tilde;  // S_k x S_eff
    const Eigen::MatrixXcd gram = hermitize(G * Y * G.adjoint() / noise_var);
    return capacity_mode_gram(user.modes.lambda, user.uplink_snr, gram);
}

Eigen::MatrixXcd capacity_gradient(const UserStatistics& user, const Eigen::MatrixXcd& Y,
                                   double noise_var, const SubspaceReduction& red) {
    const long S = user.modes.S;
    const Eigen::MatrixXcd G = user.modes.Q.adjoint() * red.Q_tilde;
    Eigen::MatrixXcd A = hermitize(G * Y * G.adjoint() / noise_var);
    A.diagonal().array() +=
        user.modes.lambda.array().inverse().cast<std::complex<double>>();
    const Eigen::MatrixXcd Ainv = A.llt().solve(Eigen::MatrixXcd::Identity(S, S));
    Eigen::MatrixXcd B = Ainv;
    B.diagonal().array() += 1.0 / user.uplink_snr;
    const Eigen::MatrixXcd Binv = B.llt().solve(Eigen::MatrixXcd::Identity(S, S));
    // d/dY [-log2 |rho^-1 I + A^-1|] = (1/ln2/s^2) G^H A^-1 B^-1 A^-1 G
    return hermitize((kLog2e / noise_var) * G.adjoint() * Ainv * Binv * Ainv * G);
}

Eigen::MatrixXcd project_trace_psd(const Eigen::MatrixXcd& X, double budget) {
    if (budget <= 0.0) throw std::invalid_argument("project_trace_psd: budget must be > 0");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitize(X));
    Eigen::VectorXd ev = es.eigenvalues();
    Eigen::VectorXd y = ev.cwiseMax(0.0);
    if (y.sum() > budget) {
        // shift-and-clip: y_i = (ev_i - tau)^+ with sum = budget
        Eigen::VectorXd sorted = ev;
        std::sort(sorted.data(), sorted.data() + sorted.size(), std::greater<double>());
        double cum = 0.0;
        double tau = 0.0;
        for (long k = 0; k < sorted.size(); ++k) {
            cum += sorted(k);
            const double cand = (cum - budget) / static_cast<double>(k + 1);
            if (k + 1 == sorted.size() || sorted(k + 1) <= cand) {
                tau = cand;
                break;
            }
        }
        y = (ev.array() - tau).max(0.0);
    }
    return hermitize(es.eigenvectors() * y.asDiagonal() * es.eigenvectors().adjoint());
}

namespace {

struct Objective {
    const DesignRequest* req;
    const SubspaceReduction* red;
    Eigen::VectorXd beta;     // per-user weight (1 for plain sum/min)
    bool is_min = false;
    double tau = 0.0;         // smoothing temperature for min criteria, bits

    std::vector<double> per_user(const Eigen::MatrixXcd& Y) const {
        std::vector<double> c;
        c.reserve(req->users.size());
        for (const auto& u : req->users)
            c.push_back(capacity_reduced(u, Y, req->dl_noise_var, *red));
        return c;
    }

    double value_from(const std::vector<double>& c) const {
        if (!is_min) {
            double v = 0.0;
            for (size_t k = 0; k < c.size(); ++k) v += beta(k) * c[k];
            return v;
        }
        double m = c[0] / beta(0);
        for (size_t k = 1; k < c.size(); ++k) m = std::min(m, c[k] / beta(k));
        if (tau <= 0.0) return m;
        double acc = 0.0;
        for (size_t k = 0; k < c.size(); ++k)
            acc += std::exp(-(c[k] / beta(k) - m) / tau);
        return m - tau * std::log(acc);
    }

    double value(const Eigen::MatrixXcd& Y) const { return value_from(per_user(Y)); }

    Eigen::MatrixXcd gradient(const Eigen::MatrixXcd& Y) const {
        const auto c = per_user(Y);
        Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(Y.rows(), Y.cols());
        if (!is_min) {
            for (size_t k = 0; k < c.size(); ++k)
                g += beta(k) *
                     capacity_gradient(req->users[k], Y, req->dl_noise_var, *red);
            return g;
        }
        double m = c[0] / beta(0);
        for (size_t k = 1; k < c.size(); ++k) m = std::min(m, c[k] / beta(k));
        double wsum = 0.0;
        std::vector<double> w(c.size());
        for (size_t k = 0; k < c.size(); ++k) {
            w[k] = std::exp(-(c[k] / beta(k) - m) / std::max(tau, 1e-12));
            wsum += w[k];
        }
        for (size_t k = 0; k < c.size(); ++k)
            g += (w[k] / (wsum * beta(k))) *
                 capacity_gradient(req->users[k], Y, req->dl_noise_var, *red);
        return g;
    }
};

// one projected-gradient run at fixed smoothing; returns iterations used
long ascend(const Objective& obj, Eigen::MatrixXcd& Y, double budget,
            const OptimizeOptions& opt, long iter_budget, bool& converged) {
    converged = false;
    double f = obj.value(Y);
    double step = opt.initial_step;
    double stall_pg = 0.0;
    long it = 0;
    for (; it < iter_budget; ++it) {
        const Eigen::MatrixXcd g = obj.gradient(Y);
        const double pg_norm = (Y - project_trace_psd(Y + g, budget)).norm();
        if (pg_norm <= opt.tol * (1.0 + std::abs(f))) {
            converged = true;
            break;
        }
        stall_pg = pg_norm;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            const Eigen::MatrixXcd Yn = project_trace_psd(Y + step * g, budget);
            const Eigen::MatrixXcd d = Yn - Y;
            const double fn = obj.value(Yn);
            const double slope = (g.cwiseProduct(d.conjugate())).sum().real();
            if (fn >= f + 1e-4 * slope - 1e-12) {
                Y = Yn;
                f = fn;
                accepted = true;
                break;
            }
            step *= opt.backtrack;
        }
        if (!accepted) {
            // objective differences below machine precision; the point is as
            // stationary as the arithmetic can resolve if the projected
            // gradient is small on a coarser scale
            converged = stall_pg <= std::sqrt(opt.tol) * (1.0 + std::abs(f));
            break;
        }
        step = std::min(step * 2.0, 1e6);
    }
    return it;
}

}  // namespace

OptimizerResult maximize(const DesignRequest& req, const SubspaceReduction& red,
                         const OptimizeOptions& options) {
    req.validate();
    const size_t K = req.users.size();
    Objective obj;
    obj.req = &req;
    obj.red = &red;
    obj.beta = Eigen::VectorXd::Ones(K);
    if (req.criterion == Criterion::WeightedSum || req.criterion == Criterion::WeightedMin)
        obj.beta = *req.weights;
    obj.is_min = (req.criterion == Criterion::Min || req.criterion == Criterion::WeightedMin);

    // uniform feasible interior start, or the closed-form design when it
    // scores better; ascent then never falls below the closed form
    Eigen::MatrixXcd Y = (req.dl_budget / static_cast<double>(red.S_eff)) *
                         Eigen::MatrixXcd::Identity(red.S_eff, red.S_eff);
    const Eigen::MatrixXcd C_warm = design_multi_user_large_antenna(req).sequence.covariance();
    const Eigen::MatrixXcd Y_warm = project_trace_psd(
        red.Q_tilde.adjoint() * C_warm * red.Q_tilde, req.dl_budget);
    if (obj.value(Y_warm) > obj.value(Y)) Y = Y_warm;

    OptimizerResult res;
    res.iterations = 0;
    bool conv = false;
    if (!obj.is_min) {
        res.iterations = ascend(obj, Y, req.dl_budget, options, options.max_iters, conv);
    } else {
        // anneal the smoothing temperature, warm-starting each stage
        const double taus[] = {1.0, 0.1, 0.01, 1e-3};
        for (double t : taus) {
            obj.tau = t;
            res.iterations +=
                ascend(obj, Y, req.dl_budget, options,
                       options.max_iters - res.iterations, conv);
            if (res.iterations >= options.max_iters) break;
        }
        // the smoothed surrogate can drift off the exact max-min point
        obj.tau = 0.0;
        if (obj.value(Y_warm) > obj.value(Y)) Y = Y_warm;
        obj.tau = taus[3];
    }
    res.converged = conv;
    res.Y = Y;
    res.per_user = obj.per_user(Y);
    if (obj.is_min) {
        double m = res.per_user[0] / obj.beta(0);
        for (size_t k = 1; k < K; ++k) m = std::min(m, res.per_user[k] / obj.beta(k));
        res.criterion_value = m;  // exact min, not the smoothed surrogate
    } else {
        res.criterion_value = obj.value_from(res.per_user);
    }
    const Eigen::MatrixXcd g = obj.gradient(Y);
    res.kkt_residual =
        (Y - project_trace_psd(Y + g, req.dl_budget)).norm() / (1.0 + Y.norm());
    return res;
}

TrainingSequence extract_training_sequence(const OptimizerResult& result,
                                           const SubspaceReduction& red,
                                           double rank_tol) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitize(result.Y));
    const double lmax = std::max(es.eigenvalues().maxCoeff(), 0.0);
    std::vector<long> keep;
    for (long i = es.eigenvalues().size() - 1; i >= 0; --i)
        if (es.eigenvalues()(i) > 0.0 && es.eigenvalues()(i) >= rank_tol * lmax)
            keep.push_back(i);
    const long T = static_cast<long>(keep.size());
    Eigen::MatrixXcd S(red.Q_tilde.rows(), T);
    for (long t = 0; t < T; ++t)
        S.col(t) = red.Q_tilde * es.eigenvectors().col(keep[t]) *
                   std::sqrt(es.eigenvalues()(keep[t]));
    return TrainingSequence{std::move(S)};
}

}  // namespace skg
