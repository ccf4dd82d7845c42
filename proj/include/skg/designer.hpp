#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "skg/capacity.hpp"
#include "skg/channel.hpp"

namespace skg {

// Per-mode pilot powers from water-filling, with the accepted water level.
struct PowerAllocation {
    Eigen::VectorXd powers;  // length S, >= 0, non-increasing when lambda is
    double water_level = 0.0;
    long active_count = 0;
};

enum class Criterion { Sum, Min, WeightedSum, WeightedMin };

struct DesignRequest {
    std::vector<UserStatistics> users;
    double dl_budget = 1.0;     // p_DL
    double dl_noise_var = 1.0;  // sigma_DL^2
    std::optional<long> max_pilots;
    Criterion criterion = Criterion::Sum;
    std::optional<Eigen::VectorXd> weights;  // beta_k, positive, sum to 1

    void validate() const;
};

// Exact KKT solution by the sorted-candidate method:
// p_s = (mu - noise_var/lambda_s)^+ with mu meeting the budget exactly.
PowerAllocation water_fill(const Eigen::VectorXd& lambda, double budget,
                           double noise_var,
                           std::optional<long> max_active = std::nullopt);

// S_DL^H = P^{1/2} Q^H restricted to active modes; T = active_count.
TrainingSequence design_single_user(const UserStatistics& user, const DesignRequest& req);

struct MultiUserDesign {
    TrainingSequence sequence;
    std::vector<PowerAllocation> per_user_power;  // over each user's retained modes
    double coherence = 0.0;  // cross_user_coherence of the request's users (0 for K=1)
};

// S_DL = sum_k Q_k [P_k^{1/2} 0], T = max_k (active modes of user k); powers from
// a joint water-fill (sum), a KKT bisection (weighted_sum), or the diagonal
// max-min solver (min / weighted_min).
MultiUserDesign design_multi_user_large_antenna(const DesignRequest& req);

// Same stacked structure with equal power on every retained mode of every user.
MultiUserDesign design_uniform(const DesignRequest& req);

}  // namespace skg
