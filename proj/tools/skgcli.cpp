#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "skg/bench.hpp"

namespace {

std::uint64_t config_hash_of(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return skg::fnv1a64(ss.str());
}

struct CommonArgs {
    std::string config;
    std::string out = "out";
    std::int64_t seed = -1;  // <0: keep config seed
};

skg::ScenarioConfig load_with_overrides(const CommonArgs& args) {
    skg::ScenarioConfig cfg = skg::load_config(args.config);
    if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
    return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config, "scenario config file (JSON)")->required();
    cmd->add_option("--out", args.out, "output directory");
    cmd->add_option("--seed", args.seed, "override the config seed");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"secret-key capacity training design sweeps"};
    app.require_subcommand(1);

    CommonArgs sweep_args, pilots_args, conv_args, val_args;
    CLI::App* sweep = app.add_subcommand("sweep", "capacity vs downlink SNR sweep");
    add_common(sweep, sweep_args);
    CLI::App* pilots = app.add_subcommand("pilots", "pilot count vs downlink SNR sweep");
    add_common(pilots, pilots_args);
    CLI::App* conv = app.add_subcommand("converge", "large-antenna convergence study");
    add_common(conv, conv_args);
    CLI::App* val = app.add_subcommand("validate", "parse and validate a config file");
    add_common(val, val_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep->parsed()) {
            const auto cfg = load_with_overrides(sweep_args);
            skg::emit_outputs(skg::run_capacity_sweep(cfg), sweep_args.out,
                              config_hash_of(sweep_args.config), cfg.seed);
        } else if (pilots->parsed()) {
            const auto cfg = load_with_overrides(pilots_args);
            skg::emit_outputs(skg::run_pilot_sweep(cfg), pilots_args.out,
                              config_hash_of(pilots_args.config), cfg.seed);
        } else if (conv->parsed()) {
            const auto cfg = load_with_overrides(conv_args);
            skg::emit_convergence(skg::run_large_antenna_convergence(cfg), conv_args.out,
                                  config_hash_of(conv_args.config), cfg.seed);
        } else if (val->parsed()) {
            skg::load_config(val_args.config);
            std::cout << "config OK\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
