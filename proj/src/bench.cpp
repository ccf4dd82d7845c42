#include "skg/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "skg/matrix_io.hpp"

namespace skg {

namespace {

using nlohmann::json;

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Criterion parse_criterion(const std::string& s) {
    if (s == "sum") return Criterion::Sum;
    if (s == "min") return Criterion::Min;
    if (s == "weighted_sum") return Criterion::WeightedSum;
    if (s == "weighted_min") return Criterion::WeightedMin;
    throw std::invalid_argument("config field 'criterion': unknown value '" + s + "'");
}

std::string criterion_name(Criterion c) {
    switch (c) {
        case Criterion::Sum: return "sum";
        case Criterion::Min: return "min";
        case Criterion::WeightedSum: return "weighted_sum";
        case Criterion::WeightedMin: return "weighted_min";
    }
    return "sum";
}

}  // namespace

void ScenarioConfig::validate() const {
    if (users.empty()) throw std::invalid_argument("config field 'users': need at least one user");
    if (dl_snr_db.empty())
        throw std::invalid_argument("config field 'dl_snr_db': sweep list must be non-empty");
    if (strategies.empty())
        throw std::invalid_argument("config field 'strategies': must be non-empty");
    for (const auto& s : strategies)
        if (s != "uniform" && s != "large_antenna" && s != "optimal")
            throw std::invalid_argument("config field 'strategies': unknown strategy '" + s + "'");
    if (array_rows < 1 || array_cols < 1)
        throw std::invalid_argument("config field 'array': rows/cols must be >= 1");
    if (rank_tol <= 0.0 || rank_tol >= 1.0)
        throw std::invalid_argument("config field 'rank_tol': must be in (0, 1)");
    if (dl_noise_var <= 0.0)
        throw std::invalid_argument("config field 'dl_noise_var': must be > 0");
    if (weights) {
        if (weights->size() != static_cast<long>(users.size()))
            throw std::invalid_argument("config field 'weights': length must equal user count");
        if ((weights->array() <= 0.0).any())
            throw std::invalid_argument("config field 'weights': entries must be positive");
        if (std::abs(weights->sum() - 1.0) > 1e-12)
            throw std::invalid_argument("config field 'weights': must sum to 1");
    }
    for (const auto& u : users)
        if (u.clusters.empty() && !u.covariance_file)
            throw std::invalid_argument(
                "config field 'users': each user needs clusters or a covariance_file");
}

ScenarioConfig parse_config(const std::string& json_text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config parse error: ") + e.what());
    }
    ScenarioConfig cfg;
    if (j.contains("array")) {
        const auto& a = j.at("array");
        cfg.array_rows = a.value("rows", cfg.array_rows);
        cfg.array_cols = a.value("cols", cfg.array_cols);
        cfg.array_spacing = a.value("spacing", cfg.array_spacing);
    }
    cfg.ul_snr_db = j.value("ul_snr_db", cfg.ul_snr_db);
    if (j.contains("dl_snr_db")) cfg.dl_snr_db = j.at("dl_snr_db").get<std::vector<double>>();
    cfg.dl_noise_var = j.value("dl_noise_var", cfg.dl_noise_var);
    if (j.contains("strategies"))
        cfg.strategies = j.at("strategies").get<std::vector<std::string>>();
    else
        cfg.strategies = {"uniform", "large_antenna", "optimal"};
    cfg.criterion = parse_criterion(j.value("criterion", "sum"));
    if (j.contains("weights")) {
        const auto w = j.at("weights").get<std::vector<double>>();
        cfg.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), w.size());
    }
    if (j.contains("t_max") && !j.at("t_max").is_null()) cfg.t_max = j.at("t_max").get<long>();
    cfg.seed = j.value("seed", cfg.seed);
    cfg.rank_tol = j.value("rank_tol", cfg.rank_tol);
    if (j.contains("m_list")) cfg.m_list = j.at("m_list").get<std::vector<long>>();

    if (j.contains("users")) {
        for (const auto& ju : j.at("users")) {
            UserSpec u;
            if (ju.contains("covariance_file")) {
                std::string p = ju.at("covariance_file").get<std::string>();
                if (!p.empty() && p[0] != '/') p = base_dir + "/" + p;
                u.covariance_file = p;
            }
            if (ju.contains("clusters")) {
                for (const auto& jc : ju.at("clusters")) {
                    ClusterSpec c;
                    c.azimuth = jc.value("azimuth_deg", 0.0) * M_PI / 180.0;
                    c.elevation = jc.value("elevation_deg", 0.0) * M_PI / 180.0;
                    c.angular_spread = jc.value("spread_deg", 5.0) * M_PI / 180.0;
                    c.power = jc.value("power", 1.0);
                    u.clusters.push_back(c);
                }
            }
            if (ju.contains("ul_snr_db")) u.ul_snr_db = ju.at("ul_snr_db").get<double>();
            cfg.users.push_back(std::move(u));
        }
    }
    cfg.validate();
    return cfg;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open config file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    const std::string dir = std::filesystem::path(path).parent_path().string();
    return parse_config(ss.str(), dir.empty() ? "." : dir);
}

std::string dump_config(const ScenarioConfig& cfg) {
    json j;
    j["array"] = {{"rows", cfg.array_rows},
                  {"cols", cfg.array_cols},
                  {"spacing", cfg.array_spacing}};
    j["ul_snr_db"] = cfg.ul_snr_db;
    j["dl_snr_db"] = cfg.dl_snr_db;
    j["dl_noise_var"] = cfg.dl_noise_var;
    j["strategies"] = cfg.strategies;
    j["criterion"] = criterion_name(cfg.criterion);
    if (cfg.weights) {
        std::vector<double> w(cfg.weights->data(), cfg.weights->data() + cfg.weights->size());
        j["weights"] = w;
    }
    if (cfg.t_max) j["t_max"] = *cfg.t_max;
    j["seed"] = cfg.seed;
    j["rank_tol"] = cfg.rank_tol;
    if (!cfg.m_list.empty()) j["m_list"] = cfg.m_list;
    j["users"] = json::array();
    for (const auto& u : cfg.users) {
        json ju;
        if (u.covariance_file) ju["covariance_file"] = *u.covariance_file;
        if (!u.clusters.empty()) {
            ju["clusters"] = json::array();
            for (const auto& c : u.clusters)
                ju["clusters"].push_back({{"azimuth_deg", c.azimuth * 180.0 / M_PI},
                                          {"elevation_deg", c.elevation * 180.0 / M_PI},
                                          {"spread_deg", c.angular_spread * 180.0 / M_PI},
                                          {"power", c.power}});
        }
        if (u.ul_snr_db) ju["ul_snr_db"] = *u.ul_snr_db;
        j["users"].push_back(ju);
    }
    return j.dump(2);
}

ArrayGeometry build_array(const ScenarioConfig& cfg) {
    return ArrayGeometry::planar(cfg.array_rows, cfg.array_cols, cfg.array_spacing);
}

std::vector<UserStatistics> build_users(const ScenarioConfig& cfg, const ArrayGeometry& geom) {
    std::vector<UserStatistics> users;
    users.reserve(cfg.users.size());
    for (const auto& spec : cfg.users) {
        UserStatistics u;
        if (spec.covariance_file) {
            HermitianMatrix R(load_complex_matrix_file(*spec.covariance_file), true);
            if (R.dim() != geom.count())
                throw std::invalid_argument("covariance file dimension does not match array");
            u.modes = compact_eig(R, cfg.rank_tol);
        } else {
            u.modes = compact_eig(make_clustered_covariance(geom, spec.clusters), cfg.rank_tol);
        }
        u.uplink_snr = db_to_linear(spec.ul_snr_db.value_or(cfg.ul_snr_db));
        users.push_back(std::move(u));
    }
    return users;
}

namespace {

SweepRow evaluate_point(const ScenarioConfig& cfg, const std::vector<UserStatistics>& users,
                        double dl_snr_db, const std::string& strategy) {
    const auto t0 = std::chrono::steady_clock::now();
    SweepRow row;
    row.dl_snr_db = dl_snr_db;
    row.strategy = strategy;
    row.K = static_cast<long>(users.size());

    DesignRequest req;
    req.users = users;
    req.dl_budget = db_to_linear(dl_snr_db) * cfg.dl_noise_var;
    req.dl_noise_var = cfg.dl_noise_var;
    req.max_pilots = cfg.t_max;
    req.criterion = cfg.criterion;
    req.weights = cfg.weights;

    TrainingSequence seq;
    if (strategy == "uniform") {
        seq = design_uniform(req).sequence;
    } else if (strategy == "large_antenna") {
        seq = design_multi_user_large_antenna(req).sequence;
    } else if (strategy == "optimal") {
        if (users.size() == 1) {
            seq = design_single_user(users[0], req);
        } else {
            std::vector<SpatialModeBasis> bases;
            for (const auto& u : users) bases.push_back(u.modes);
            const SubspaceReduction red = reduce_subspace(bases);
            const OptimizerResult res = maximize(req, red);
            row.converged = res.converged;
            seq = extract_training_sequence(res, red, cfg.rank_tol);
        }
    } else {
        throw std::invalid_argument("unknown strategy: " + strategy);
    }

    row.pilots = seq.T();
    for (const auto& u : users)
        row.per_user.push_back(capacity_woodbury(u, seq, cfg.dl_noise_var));
    const CapacityReport rep = make_report(row.per_user);
    row.avg_capacity_bits = rep.average;
    row.sum_capacity_bits = rep.sum;
    row.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

std::vector<SweepRow> run_sweep_core(const ScenarioConfig& cfg) {
    cfg.validate();
    const ArrayGeometry geom = build_array(cfg);
    const auto users = build_users(cfg, geom);
    std::vector<std::string> strategies = cfg.strategies;
    std::sort(strategies.begin(), strategies.end());
    std::vector<SweepRow> rows;
    for (double snr : cfg.dl_snr_db)
        for (const auto& s : strategies) rows.push_back(evaluate_point(cfg, users, snr, s));
    return rows;
}

}  // namespace

std::vector<SweepRow> run_capacity_sweep(const ScenarioConfig& cfg) { return run_sweep_core(cfg); }

std::vector<SweepRow> run_pilot_sweep(const ScenarioConfig& cfg) { return run_sweep_core(cfg); }

std::vector<ConvergenceRow> run_large_antenna_convergence(const ScenarioConfig& cfg) {
    cfg.validate();
    if (cfg.users.size() < 2)
        throw std::invalid_argument("convergence study needs at least 2 users");
    if (cfg.m_list.empty())
        throw std::invalid_argument("config field 'm_list': required for the convergence study");
    for (const auto& u : cfg.users)
        if (u.clusters.empty())
            throw std::invalid_argument("convergence study needs cluster-specified users");

    const double dl_snr = cfg.dl_snr_db.front();
    std::vector<ConvergenceRow> out;
    for (long M : cfg.m_list) {
        ScenarioConfig c = cfg;
        c.array_rows = 1;
        c.array_cols = M;
        const ArrayGeometry geom = build_array(c);
        const auto users = build_users(c, geom);
        std::vector<SpatialModeBasis> bases;
        for (const auto& u : users) bases.push_back(u.modes);

        ConvergenceRow row;
        row.M = M;
        row.coherence = cross_user_coherence(bases);
        const SweepRow opt = evaluate_point(c, users, dl_snr, "optimal");
        const SweepRow la = evaluate_point(c, users, dl_snr, "large_antenna");
        row.capacity_gap_bits = opt.avg_capacity_bits - la.avg_capacity_bits;
        out.push_back(row);
    }
    return out;
}

std::string rows_to_csv(const std::vector<SweepRow>& rows, std::uint64_t seed) {
    std::string csv = "dl_snr_db,strategy,K,avg_capacity_bits,sum_capacity_bits,pilots,seed\n";
    for (const auto& r : rows) {
        csv += fmt17(r.dl_snr_db) + "," + r.strategy + "," + std::to_string(r.K) + "," +
               fmt17(r.avg_capacity_bits) + "," + fmt17(r.sum_capacity_bits) + "," +
               std::to_string(r.pilots) + "," + std::to_string(seed) + "\n";
    }
    return csv;
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write output file: " + path);
    f << content;
}

void write_manifest(const std::string& out_dir, std::uint64_t hash, std::uint64_t seed) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    write_file(out_dir + "/manifest",
               std::string("config_hash=") + buf + "\nseed=" + std::to_string(seed) + "\n");
}

const char* kCapacityPlot = R"(#!/usr/bin/env python3
# Plots average secret-key capacity vs downlink SNR per strategy from sweep.csv.
import csv, collections
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

series = collections.defaultdict(list)
with open("sweep.csv") as f:
    for row in csv.DictReader(f):
        series[row["strategy"]].append((float(row["dl_snr_db"]), float(row["avg_capacity_bits"])))
for name, pts in sorted(series.items()):
    pts.sort()
    plt.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=name)
plt.xlabel("Downlink SNR [dB]")
plt.ylabel("Average secret-key capacity [bits/training]")
plt.legend()
plt.grid(True)
plt.savefig("capacity_vs_snr.png", dpi=150)
)";

const char* kPilotPlot = R"(#!/usr/bin/env python3
# Plots pilot count vs downlink SNR per strategy from sweep.csv.
import csv, collections
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

series = collections.defaultdict(list)
with open("sweep.csv") as f:
    for row in csv.DictReader(f):
        series[row["strategy"]].append((float(row["dl_snr_db"]), int(row["pilots"])))
for name, pts in sorted(series.items()):
    pts.sort()
    plt.plot([p[0] for p in pts], [p[1] for p in pts], marker="s", label=name)
plt.xlabel("Downlink SNR [dB]")
plt.ylabel("Number of pilots T")
plt.legend()
plt.grid(True)
plt.savefig("pilots_vs_snr.png", dpi=150)
)";

}  // namespace

void emit_outputs(const std::vector<SweepRow>& rows, const std::string& out_dir,
                  std::uint64_t config_hash, std::uint64_t seed) {
    std::filesystem::create_directories(out_dir);
    write_file(out_dir + "/sweep.csv", rows_to_csv(rows, seed));
    write_file(out_dir + "/capacity_vs_snr.py", kCapacityPlot);
    write_file(out_dir + "/pilots_vs_snr.py", kPilotPlot);
    write_manifest(out_dir, config_hash, seed);
}

void emit_convergence(const std::vector<ConvergenceRow>& rows, const std::string& out_dir,
                      std::uint64_t config_hash, std::uint64_t seed) {
    std::filesystem::create_directories(out_dir);
    std::string csv = "M,coherence,capacity_gap_bits\n";
    for (const auto& r : rows)
        csv += std::to_string(r.M) + "," + fmt17(r.coherence) + "," +
               fmt17(r.capacity_gap_bits) + "\n";
    write_file(out_dir + "/convergence.csv", csv);
    write_manifest(out_dir, config_hash, seed);
}

}  // namespace skg
