#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "manifest.hpp"
#include "ramsey/riccati.hpp"

namespace {

using namespace ramsey::cli;

std::string default_out_dir() {
    const char* env = std::getenv("RAMSEY_OUT_DIR");
    return env && *env ? env : ".";
}

struct CommonArgs {
    std::string config_path;
    std::string out_dir = default_out_dir();
    std::optional<std::uint64_t> seed;
    std::optional<double> step;
    std::optional<std::int64_t> paths;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_config = true) {
    auto* opt = cmd->add_option("--config", args.config_path, "model config JSON");
    if (needs_config) opt->required();
    cmd->add_option("--out", args.out_dir, "output directory (default $RAMSEY_OUT_DIR or .)");
    cmd->add_option("--seed", args.seed, "Monte Carlo seed override");
    cmd->add_option("--step", args.step, "solver step override");
    cmd->add_option("--paths", args.paths, "Monte Carlo path count override");
}

nlohmann::json base_effective(const std::string& command, const CommonArgs& args) {
    nlohmann::json effective;
    effective["command"] = command;
    effective["model"] = load_json_file(args.config_path);
    effective["args"] = nlohmann::json::object();
    return effective;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Marginal-utility bond prices and long-maturity yield curves in "
                 "multi-factor affine models"};
    app.require_subcommand(1);

    CommonArgs validate_args;
    auto* validate = app.add_subcommand("validate", "validate a model config and echo its canonical form");
    add_common(validate, validate_args);

    CommonArgs curve_args;
    std::string curve_tenors = "1,2,5,10,20,30";
    bool curve_verify = false;
    double curve_sim_step = 1.0 / 128.0;
    auto* curve = app.add_subcommand("curve", "zero-coupon curve from the backward affine solve");
    add_common(curve, curve_args);
    curve->add_option("--tenors", curve_tenors, "comma-separated maturities");
    curve->add_flag("--verify", curve_verify, "cross-check each tenor against Monte Carlo");
    curve->add_option("--sim-step", curve_sim_step, "Monte Carlo time step for --verify");

    CommonArgs longrate_args;
    double longrate_tmax = 200.0;
    auto* longrate = app.add_subcommand("longrate", "classify the long-maturity behavior");
    add_common(longrate, longrate_args);
    longrate->add_option("--tmax", longrate_tmax, "largest maturity examined");

    CommonArgs bp_args;
    double bp_theta = 0.5;
    double bp_horizon = 5.0;
    double bp_sim_step = 1e-2;
    std::int64_t bp_mc_paths = 20000;
    auto* bp = app.add_subcommand("backward-power",
                                  "propagate the backward power-utility terminal constraint");
    add_common(bp, bp_args);
    bp->add_option("--theta", bp_theta, "risk aversion in (0,1)")->required();
    bp->add_option("--horizon", bp_horizon, "optimization horizon")->required();
    bp->add_option("--sim-step", bp_sim_step, "pathwise-check time step");
    bp->add_option("--mc-paths", bp_mc_paths, "path count for the Monte Carlo check");

    CommonArgs mix_args;
    std::string mix_config;
    std::string mix_tenors = "1,2,5,10,20,30";
    std::string mix_ys = "0.25,0.5,1,2,4";
    auto* mix = app.add_subcommand("mixture-curve",
                                   "wealth-dependent curves from a risk-aversion mixture");
    add_common(mix, mix_args);
    mix->add_option("--mixture", mix_config, "mixture config JSON")->required();
    mix->add_option("--tenors", mix_tenors, "comma-separated maturities");
    mix->add_option("--ys", mix_ys, "comma-separated initial conditions");

    CommonArgs sim_args;
    std::string sim_config;
    bool dump_paths = false;
    auto* sim = app.add_subcommand("simulate", "joint path bundle with martingale diagnostics");
    add_common(sim, sim_args);
    sim->add_option("--sim", sim_config, "simulation config JSON");
    sim->add_flag("--dump-paths", dump_paths, "also write the full per-path dump");

    std::string replay_manifest;
    std::string replay_out = default_out_dir();
    auto* replay = app.add_subcommand("replay", "re-run a command from its manifest");
    replay->add_option("--manifest", replay_manifest, "manifest JSON")->required();
    replay->add_option("--out", replay_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e); // prints the message; 0 for --help
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (validate->parsed()) {
            auto effective = base_effective("validate", validate_args);
            return run_effective(effective, validate_args.out_dir);
        }
        if (curve->parsed()) {
            auto effective = base_effective("curve", curve_args);
            auto& a = effective["args"];
            a["tenors"] = parse_double_list(curve_tenors);
            a["step"] = curve_args.step.value_or(1e-3);
            a["verify"] = curve_verify;
            if (curve_verify) {
                a["paths"] = curve_args.paths.value_or(std::int64_t{200000});
                a["seed"] = curve_args.seed.value_or(std::uint64_t{42});
                a["sim_step"] = curve_sim_step;
            }
            return run_effective(effective, curve_args.out_dir);
        }
        if (longrate->parsed()) {
            auto effective = base_effective("longrate", longrate_args);
            effective["args"]["t_max"] = longrate_tmax;
            effective["args"]["step"] = longrate_args.step.value_or(1e-2);
            return run_effective(effective, longrate_args.out_dir);
        }
        if (bp->parsed()) {
            auto effective = base_effective("backward-power", bp_args);
            auto& a = effective["args"];
            a["theta"] = bp_theta;
            a["horizon"] = bp_horizon;
            a["step"] = bp_args.step.value_or(1e-3);
            a["sim_step"] = bp_sim_step;
            a["paths"] = bp_args.paths.value_or(std::int64_t{256});
            a["mc_paths"] = bp_mc_paths;
            a["seed"] = bp_args.seed.value_or(std::uint64_t{42});
            return run_effective(effective, bp_args.out_dir);
        }
        if (mix->parsed()) {
            auto effective = base_effective("mixture-curve", mix_args);
            effective["mixture"] = load_json_file(mix_config);
            auto& a = effective["args"];
            a["tenors"] = parse_double_list(mix_tenors);
            a["ys"] = parse_double_list(mix_ys);
            a["step"] = mix_args.step.value_or(1e-3);
            return run_effective(effective, mix_args.out_dir);
        }
        if (sim->parsed()) {
            auto effective = base_effective("simulate", sim_args);
            nlohmann::json sim_json =
                sim_config.empty() ? nlohmann::json::object() : load_json_file(sim_config);
            if (sim_args.seed) sim_json["seed"] = *sim_args.seed;
            if (sim_args.step) sim_json["step"] = *sim_args.step;
            if (sim_args.paths) sim_json["n_paths"] = *sim_args.paths;
            effective["sim"] = sim_to_json(sim_from_json(sim_json));
            effective["args"]["dump_paths"] = dump_paths;
            return run_effective(effective, sim_args.out_dir);
        }
        if (replay->parsed()) {
            return run_replay(replay_manifest, replay_out);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ramsey::RiccatiBlowupError& e) {
        std::cerr << "numerical blowup: " << e.what() << "\n";
        return kExitBlowup;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitConfig;
}
