#include "skg/designer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace skg {

namespace {

constexpr double kPruneRel = 1e-12;  // p_s below this fraction of p_DL is inactive

// per-mode capacity in bits at DL mode SNR rd
double mode_cap(double lam, double ul_snr, double rd) {
    return std::log2(1.0 + lam * lam * ul_snr * rd / (lam * (ul_snr + rd) + 1.0));
}

struct RetainedUser {
    Eigen::MatrixXcd Q;      // M x S_ret
    Eigen::VectorXd lambda;  // descending
    double ul_snr = 1.0;
};

// top min(S_k, T_max) modes of each user under the pilot cap
std::vector<RetainedUser> retain_modes(const DesignRequest& req) {
    std::vector<RetainedUser> out;
    out.reserve(req.users.size());
    for (const auto& u : req.users) {
        long keep = u.modes.S;
        if (req.max_pilots) keep = std::min<long>(keep, *req.max_pilots);
        RetainedUser r;
        r.Q = u.modes.Q.leftCols(keep);
        r.lambda = u.modes.lambda.head(keep);
        r.ul_snr = u.uplink_snr;
        out.push_back(std::move(r));
    }
    return out;
}

MultiUserDesign assemble(const DesignRequest& req, const std::vector<RetainedUser>& users,
                         const std::vector<Eigen::VectorXd>& powers,
                         const std::vector<double>& water_levels) {
    const long M = req.users[0].modes.M;
    std::vector<long> n_active(users.size(), 0);
    long T = 0;
    for (size_t k = 0; k < users.size(); ++k) {
        for (long s = 0; s < powers[k].size(); ++s)
            if (powers[k](s) > kPruneRel * req.dl_budget) n_active[k] = s + 1;
        T = std::max(T, n_active[k]);
    }
    Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(M, T);
    for (size_t k = 0; k < users.size(); ++k)
        for (long s = 0; s < n_active[k]; ++s)
            S.col(s) += std::sqrt(powers[k](s)) * users[k].Q.col(s);

    // pilot sharing across non-orthogonal users adds cross terms to S S^H,
    // so the transmitted power can exceed the nominal budget; renormalize
    double scale = 1.0;
    const double actual = S.squaredNorm();
    if (actual > req.dl_budget) {
        scale = req.dl_budget / actual;
        S *= std::sqrt(scale);
    }

    MultiUserDesign d;
    d.sequence = TrainingSequence{std::move(S)};
    for (size_t k = 0; k < users.size(); ++k) {
        PowerAllocation a;
        a.powers = scale * powers[k];
        a.water_level = water_levels[k];
        a.active_count = n_active[k];
        d.per_user_power.push_back(std::move(a));
    }
    if (req.users.size() >= 2) {
        std::vector<SpatialModeBasis> bases;
        for (const auto& u : req.users) bases.push_back(u.modes);
        d.coherence = cross_user_coherence(bases);
    }
    return d;
}

// water level for user with UL SNR rho at KKT multiplier nu (weight beta):
// nu = beta * s2*rho / (mu * (mu + s2*rho))  =>  positive root of the quadratic
double water_level_at_multiplier(double nu, double beta, double ul_snr, double noise_var) {
    const double a = noise_var * ul_snr;
    return (-nu * a + std::sqrt(nu * nu * a * a + 4.0 * nu * beta * a)) / (2.0 * nu);
}

}  // namespace

void DesignRequest::validate() const {
    if (users.empty()) throw std::invalid_argument("DesignRequest: no users");
    if (dl_budget <= 0.0) throw std::invalid_argument("DesignRequest: dl_budget must be > 0");
    if (dl_noise_var <= 0.0) throw std::invalid_argument("DesignRequest: dl_noise_var must be > 0");
    if (max_pilots && *max_pilots < 1)
        throw std::invalid_argument("DesignRequest: max_pilots must be >= 1");
    if (weights) {
        if (weights->size() != static_cast<long>(users.size()))
            throw std::invalid_argument("DesignRequest: weights length mismatch");
        if ((weights->array() <= 0.0).any())
            throw std::invalid_argument("DesignRequest: weights must be positive");
        if (std::abs(weights->sum() - 1.0) > 1e-12)
            throw std::invalid_argument("DesignRequest: weights must sum to 1");
    }
    if ((criterion == Criterion::WeightedSum || criterion == Criterion::WeightedMin) && !weights)
        throw std::invalid_argument("DesignRequest: weighted criterion needs weights");
}

PowerAllocation water_fill(const Eigen::VectorXd& lambda, double budget, double noise_var,
                           std::optional<long> max_active) {
    const long S = lambda.size();
    if (S < 1) throw std::invalid_argument("water_fill: empty mode list");
    if (budget <= 0.0) throw std::invalid_argument("water_fill: budget must be > 0");
    if (noise_var <= 0.0) throw std::invalid_argument("water_fill: noise_var must be > 0");
    for (long s = 0; s < S; ++s) {
        if (lambda(s) <= 0.0) throw std::invalid_argument("water_fill: lambda must be > 0");
        if (s && lambda(s) > lambda(s - 1) + 1e-15 * lambda(s - 1))
            throw std::invalid_argument("water_fill: lambda must be sorted descending");
    }
    long k_max = S;
    if (max_active) k_max = std::min<long>(k_max, std::max<long>(1, *max_active));

    double inv_sum = 0.0;
    double mu = 0.0;
    long k_best = 0;
    for (long k = 1; k <= k_max; ++k) {
        inv_sum += noise_var / lambda(k - 1);
        const double cand = (budget + inv_sum) / static_cast<double>(k);
        if (cand > noise_var / lambda(k - 1)) {
            mu = cand;
            k_best = k;
        }
    }
    PowerAllocation a;
    a.powers = Eigen::VectorXd::Zero(S);
    for (long s = 0; s < k_best; ++s) a.powers(s) = mu - noise_var / lambda(s);
    a.water_level = mu;
    a.active_count = 0;
    for (long s = 0; s < S; ++s)
        if (a.powers(s) > kPruneRel * budget) a.active_count = s + 1;
    return a;
}

TrainingSequence design_single_user(const UserStatistics& user, const DesignRequest& req) {
    req.validate();
    if (req.users.size() != 1)
        throw std::invalid_argument("design_single_user: request must have exactly one user");
    const PowerAllocation a =
        water_fill(user.modes.lambda, req.dl_budget, req.dl_noise_var, req.max_pilots);
    const long T = a.active_count;
    Eigen::MatrixXcd S(user.modes.M, T);
    for (long s = 0; s < T; ++s)
        S.col(s) = std::sqrt(a.powers(s)) * user.modes.Q.col(s);
    return TrainingSequence{std::move(S)};
}

MultiUserDesign design_multi_user_large_antenna(const DesignRequest& req) {
    req.validate();
    const auto users = retain_modes(req);
    const size_t K = users.size();
    const double s2 = req.dl_noise_var;
    std::vector<Eigen::VectorXd> powers(K);
    std::vector<double> levels(K, 0.0);

    switch (req.criterion) {
        case Criterion::Sum: {
            // single joint water-fill over the pooled mode list
            std::vector<std::pair<double, std::pair<size_t, long>>> pool;
            for (size_t k = 0; k < K; ++k)
                for (long s = 0; s < users[k].lambda.size(); ++s)
                    pool.push_back({users[k].lambda(s), {k, s}});
            std::sort(pool.begin(), pool.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first; });
            Eigen::VectorXd pooled(pool.size());
            for (size_t i = 0; i < pool.size(); ++i) pooled(i) = pool[i].first;
            const PowerAllocation a = water_fill(pooled, req.dl_budget, s2);
            for (size_t k = 0; k < K; ++k) {
                powers[k] = Eigen::VectorXd::Zero(users[k].lambda.size());
                levels[k] = a.water_level;
            }
            for (size_t i = 0; i < pool.size(); ++i)
                powers[pool[i].second.first](pool[i].second.second) = a.powers(i);
            break;
        }
        case Criterion::WeightedSum: {
            // KKT: per-user water level from the global multiplier nu; bisect nu on budget
            const Eigen::VectorXd& beta = *req.weights;
            auto budget_at = [&](double nu) {
                double tot = 0.0;
                for (size_t k = 0; k < K; ++k) {
                    const double mu = water_level_at_multiplier(nu, beta(k), users[k].ul_snr, s2);
                    for (long s = 0; s < users[k].lambda.size(); ++s)
                        tot += std::max(mu - s2 / users[k].lambda(s), 0.0);
                }
                return tot;
            };
            double lo = 1.0, hi = 1.0;
            while (budget_at(lo) < req.dl_budget) lo *= 0.5;
            while (budget_at(hi) > req.dl_budget) hi *= 2.0;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                (budget_at(mid) >= req.dl_budget ? lo : hi) = mid;
            }
            const double nu = 0.5 * (lo + hi);
            for (size_t k = 0; k < K; ++k) {
                const double mu = water_level_at_multiplier(nu, beta(k), users[k].ul_snr, s2);
                levels[k] = mu;
                powers[k] = (mu - s2 * users[k].lambda.array().inverse()).max(0.0);
            }
            // close the residual budget gap on the strongest mode of the heaviest user
            double tot = 0.0;
            for (size_t k = 0; k < K; ++k) tot += powers[k].sum();
            long k_top = 0;
            for (size_t k = 1; k < K; ++k)
                if (beta(k) > beta(k_top)) k_top = static_cast<long>(k);
            powers[k_top](0) += req.dl_budget - tot;
            break;
        }
        case Criterion::Min:
        case Criterion::WeightedMin: {
            // equalize weighted capacities: bisect the common target, inner bisection
            // on each user's water level for the minimal power reaching it
            Eigen::VectorXd beta = Eigen::VectorXd::Ones(K);
            if (req.criterion == Criterion::WeightedMin) beta = *req.weights;

            auto user_cap = [&](size_t k, double mu) {
                double c = 0.0;
                for (long s = 0; s < users[k].lambda.size(); ++s) {
                    const double p = std::max(mu - s2 / users[k].lambda(s), 0.0);
                    c += mode_cap(users[k].lambda(s), users[k].ul_snr, p / s2);
                }
                return c;
            };
            auto user_power = [&](size_t k, double mu) {
                return (mu - s2 * users[k].lambda.array().inverse()).max(0.0).sum();
            };
            auto level_for_cap = [&](size_t k, double target) {
                double lo = s2 / users[k].lambda(0), hi = std::max(2.0 * lo, 1.0);
                while (user_cap(k, hi) < target) hi *= 2.0;
                for (int it = 0; it < 200; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (user_cap(k, mid) < target ? lo : hi) = mid;
                }
                return 0.5 * (lo + hi);
            };

            // ceiling: capacity as DL power grows unbounded
            double t_hi = std::numeric_limits<double>::infinity();
            for (size_t k = 0; k < K; ++k) {
                double ceil_k = 0.0;
                for (long s = 0; s < users[k].lambda.size(); ++s)
                    ceil_k += std::log2(1.0 + users[k].lambda(s) * users[k].ul_snr);
                t_hi = std::min(t_hi, ceil_k / beta(k));
            }
            t_hi *= 1.0 - 1e-12;

            auto budget_for_target = [&](double t) {
                double tot = 0.0;
                for (size_t k = 0; k < K; ++k)
                    tot += user_power(k, level_for_cap(k, t * beta(k)));
                return tot;
            };
            double t_lo = 0.0;
            if (budget_for_target(t_hi) > req.dl_budget) {
                for (int it = 0; it < 100; ++it) {
                    const double mid = 0.5 * (t_lo + t_hi);
                    (budget_for_target(mid) <= req.dl_budget ? t_lo : t_hi) = mid;
                }
            } else {
                t_lo = t_hi;  // weakest user's ceiling binds before the budget does
            }
            double tot = 0.0;
            for (size_t k = 0; k < K; ++k) {
                const double mu = level_for_cap(k, t_lo * beta(k));
                levels[k] = mu;
                powers[k] = (mu - s2 * users[k].lambda.array().inverse()).max(0.0);
                tot += powers[k].sum();
            }
            if (tot > req.dl_budget) {  // trim rounding excess proportionally
                for (size_t k = 0; k < K; ++k) powers[k] *= req.dl_budget / tot;
            }
            break;
        }
    }
    return assemble(req, users, powers, levels);
}

MultiUserDesign design_uniform(const DesignRequest& req) {
    req.validate();
    const auto users = retain_modes(req);
    long total_modes = 0;
    for (const auto& u : users) total_modes += u.lambda.size();
    const double p = req.dl_budget / static_cast<double>(total_modes);
    std::vector<Eigen::VectorXd> powers;
    for (const auto& u : users)
        powers.push_back(Eigen::VectorXd::Constant(u.lambda.size(), p));
    return assemble(req, users, powers, std::vector<double>(users.size(), 0.0));
}

}  // namespace skg
