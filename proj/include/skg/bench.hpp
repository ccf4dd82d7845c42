#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "skg/designer.hpp"
#include "skg/optimizer.hpp"

namespace skg {

struct UserSpec {
    std::vector<ClusterSpec> clusters;          // empty when covariance_file is set
    std::optional<std::string> covariance_file; // text matrix format
    std::optional<double> ul_snr_db;            // overrides the scenario default
};

struct ScenarioConfig {
    long array_rows = 1;
    long array_cols = 8;
    double array_spacing = 0.5;  // wavelengths
    std::vector<UserSpec> users;
    double ul_snr_db = 10.0;
    std::vector<double> dl_snr_db;        // sweep axis; p_DL = 10^(snr/10) * sigma_DL^2
    double dl_noise_var = 1.0;
    std::vector<std::string> strategies;  // subset of {uniform, large_antenna, optimal}
    Criterion criterion = Criterion::Sum;
    std::optional<Eigen::VectorXd> weights;
    std::optional<long> t_max;
    std::uint64_t seed = 1;
    double rank_tol = 1e-8;
    std::vector<long> m_list;  // ULA sizes for the convergence study

    void validate() const;
};

struct SweepRow {
    double dl_snr_db = 0.0;
    std::string strategy;
    long K = 0;
    double avg_capacity_bits = 0.0;
    double sum_capacity_bits = 0.0;
    long pilots = 0;
    std::vector<double> per_user;
    double wall_time_ms = 0.0;
    bool converged = true;
};

struct ConvergenceRow {
    long M = 0;
    double coherence = 0.0;
    double capacity_gap_bits = 0.0;  // optimal minus large-antenna average capacity
};

ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config(const std::string& json_text, const std::string& base_dir = ".");
std::string dump_config(const ScenarioConfig& cfg);

// Realized channel statistics for the configured users at a given array geometry.
std::vector<UserStatistics> build_users(const ScenarioConfig& cfg, const ArrayGeometry& geom);
ArrayGeometry build_array(const ScenarioConfig& cfg);

std::vector<SweepRow> run_capacity_sweep(const ScenarioConfig& cfg);
std::vector<SweepRow> run_pilot_sweep(const ScenarioConfig& cfg);
std::vector<ConvergenceRow> run_large_antenna_convergence(const ScenarioConfig& cfg);

void emit_outputs(const std::vector<SweepRow>& rows, const std::string& out_dir,
                  std::uint64_t config_hash, std::uint64_t seed);
void emit_convergence(const std::vector<ConvergenceRow>& rows, const std::string& out_dir,
                      std::uint64_t config_hash, std::uint64_t seed);

std::string rows_to_csv(const std::vector<SweepRow>& rows, std::uint64_t seed);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace skg
