#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>

#include "config.hpp"
#include "manifest.hpp"
#include "ramsey/market.hpp"
#include "ramsey/mc.hpp"
#include "ramsey/mixture.hpp"
#include "ramsey/yield_curve.hpp"

namespace ramsey::cli {

namespace {

namespace fs = std::filesystem;

struct CommandContext {
    fs::path out_dir;
    RunManifest manifest;
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

    std::string out_path(const std::string& name) {
        manifest.outputs.push_back(name);
        return (out_dir / name).string();
    }

    void finish() {
        manifest.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        atomic_write_json((out_dir / "manifest.json").string(), manifest_to_json(manifest));
    }
};

CommandContext make_context(const nlohmann::json& effective, const std::string& out_dir) {
    CommandContext ctx;
    ctx.out_dir = out_dir;
    fs::create_directories(ctx.out_dir);
    ctx.manifest.command = effective.at("command").get<std::string>();
    ctx.manifest.effective_config = effective;
    ctx.manifest.config_hash = json_hash(effective);
    return ctx;
}

int cmd_validate(const nlohmann::json& effective, CommandContext& ctx) {
    AffineModelSpec spec;
    try {
        spec = spec_from_json(effective.at("model"));
    } catch (const std::exception& e) {
        throw ConfigError(std::string("model config: ") + e.what());
    }
    const auto report = validate_spec(spec);
    nlohmann::json out;
    out["pass"] = report.pass();
    out["issues"] = nlohmann::json::array();
    for (const auto& issue : report.issues)
        out["issues"].push_back({{"invariant", issue.invariant}, {"detail", issue.detail}});
    out["content_hash"] = spec_content_hash(spec);
    atomic_write_json(ctx.out_path("validation.json"), out);
    atomic_write_json(ctx.out_path("canonical_model.json"), spec_to_json(spec));
    ctx.manifest.verdicts["validation"] = report.pass() ? "pass" : "fail";
    ctx.finish();
    if (report.pass()) {
        std::cout << "valid, content hash " << spec_content_hash(spec) << "\n";
        return kExitOk;
    }
    std::cout << report.to_string();
    return kExitConfig;
}

int cmd_curve(const nlohmann::json& effective, CommandContext& ctx) {
    const auto spec = load_model(effective.at("model"));
    const auto& args = effective.at("args");
    const auto tenors = args.at("tenors").get<std::vector<double>>();
    const double step = args.at("step").get<double>();
    ctx.manifest.solver_step = step;

    YieldCurve curve;
    try {
        curve = make_yield_curve(spec, tenors, step);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    atomic_write_with(ctx.out_path("curve.csv"),
                      [&](const std::string& tmp) { write_curve_csv(curve, tmp); });

    const auto cls = long_rate_classify(spec, 0.0, spec.xi0);
    ctx.manifest.verdicts["model_hash"] = curve.model_hash;
    ctx.manifest.verdicts["long_rate_class"] = to_string(cls.verdict);

    int exit_code = kExitOk;
    if (args.value("verify", false)) {
        SimConfig sim;
        sim.n_paths = args.value("paths", std::int64_t{200000});
        sim.step = args.value("sim_step", 1.0 / 128.0);
        sim.horizon = tenors.back();
        sim.seed = args.value("seed", std::uint64_t{42});
        ctx.manifest.seed = sim.seed;
        std::vector<Estimate> estimates;
        try {
            estimates = mc_bond_prices(spec, sim, tenors);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        nlohmann::json records = nlohmann::json::array();
        bool all_pass = true;
        for (std::size_t j = 0; j < tenors.size(); ++j) {
            const double diff = std::abs(estimates[j].mean - curve.bond_prices[j]);
            const bool pass = diff <= 3.0 * estimates[j].std_error;
            all_pass &= pass;
            records.push_back(estimate_to_json(estimates[j],
                                               "bond_T" + std::to_string(tenors[j]), sim.seed,
                                               pass ? "pass" : "fail"));
        }
        atomic_write_json(ctx.out_path("estimates.json"), records);
        ctx.manifest.verdicts["verify"] = all_pass ? "pass" : "fail";
        if (!all_pass) exit_code = kExitVerification;
    }
    ctx.finish();
    std::cout << "curve over " << tenors.size() << " tenors, long-rate class "
              << to_string(cls.verdict) << "\n";
    return exit_code;
}

int cmd_longrate(const nlohmann::json& effective, CommandContext& ctx) {
    const auto spec = load_model(effective.at("model"));
    const auto& args = effective.at("args");
    const double t_max = args.value("t_max", 200.0);
    const double step = args.value("step", 1e-2);
    ctx.manifest.solver_step = step;
    const auto res = long_rate_classify(spec, 0.0, spec.xi0, t_max, step);
    nlohmann::json out;
    out["classification"] = to_string(res.verdict);
    out["vol_over_tau_limit"] = res.vol_over_tau_limit;
    out["vol2_over_tau_limit"] = res.vol2_over_tau_limit;
    out["tail_vol_over_tau"] = res.tail_vol_over_tau;
    out["tail_vol2_over_tau"] = res.tail_vol2_over_tau;
    out["tolerance"] = res.tolerance;
    out["t_max"] = t_max;
    out["model_hash"] = spec_content_hash(spec);
    atomic_write_json(ctx.out_path("longrate.json"), out);
    ctx.manifest.verdicts["long_rate_class"] = to_string(res.verdict);
    ctx.finish();
    std::cout << "long-rate class " << to_string(res.verdict) << "\n";
    return kExitOk;
}

int cmd_backward_power(const nlohmann::json& effective, CommandContext& ctx) {
    const auto spec = load_model(effective.at("model"));
    const auto& args = effective.at("args");
    const double theta = args.at("theta").get<double>();
    const double horizon = args.at("horizon").get<double>();
    const double step = args.value("step", 1e-3);
    ctx.manifest.solver_step = step;

    PowerConstraintSolution sol;
    try {
        sol = solve_backward_power_constraint(spec, theta, horizon, step);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    SimConfig sim;
    sim.n_paths = args.value("paths", std::int64_t{256});
    sim.step = args.value("sim_step", 1e-2);
    sim.horizon = horizon;
    sim.seed = args.value("seed", std::uint64_t{42});
    ctx.manifest.seed = sim.seed;

    double sup_err = 0.0;
    PowerConstraintCheck check;
    try {
        sup_err = backward_constraint_sup_error(spec, sol, sim);
        SimConfig mc_sim = sim;
        mc_sim.n_paths = args.value("mc_paths", std::int64_t{20000});
        check = mc_power_constraint_check(spec, mc_sim, theta, horizon, step);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const double ortho = orthogonal_identity_residual(spec, sol);

    nlohmann::json out;
    out["theta"] = theta;
    out["horizon"] = horizon;
    out["exponent_at_origin"] = {{"A", std::vector<double>(sol.riccati.A.front().data(),
                                                           sol.riccati.A.front().data() +
                                                               sol.riccati.A.front().size())},
                                 {"B", sol.riccati.B.front()}};
    out["orthogonal_identity_residual"] = ortho;
    out["pathwise_terminal_error"] = sup_err;
    out["mc_check"] =
        estimate_to_json(check.estimate, "power_constraint", sim.seed,
                         check.within_3se ? "pass" : "fail");
    out["mc_check"]["riccati_value"] = check.riccati_value;
    out["mc_check"]["heavy_tail_warning"] = check.heavy_tail_warning;
    atomic_write_json(ctx.out_path("backward_power.json"), out);
    ctx.manifest.verdicts["mc_check"] = check.within_3se ? "pass" : "fail";
    ctx.finish();
    std::cout << "orthogonal identity residual " << ortho << ", pathwise terminal error "
              << sup_err << ", mc check " << (check.within_3se ? "pass" : "fail") << "\n";
    return check.within_3se ? kExitOk : kExitVerification;
}

int cmd_mixture_curve(const nlohmann::json& effective, CommandContext& ctx) {
    const auto spec = load_model(effective.at("model"));
    const auto mix = mixture_from_json(spec, effective.at("mixture"));
    const auto& args = effective.at("args");
    const auto tenors = args.at("tenors").get<std::vector<double>>();
    const auto ys = args.at("ys").get<std::vector<double>>();
    const double step = args.at("step").get<double>();
    ctx.manifest.solver_step = step;

    std::vector<std::vector<double>> per_theta;
    std::vector<YieldCurve> curves;
    try {
        per_theta = per_theta_bond_prices(mix, tenors, step);
        curves.reserve(ys.size());
        for (double y : ys) curves.push_back(mixture_yield_curve(mix, y, tenors, per_theta));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    atomic_write_with(ctx.out_path("ysweep.csv"), [&](const std::string& tmp) {
        write_ysweep_csv(mix, ys, tenors, curves, tmp);
    });

    // per-theta diagnostics at t = 0 for the first requested y and the longest tenor
    const double diag_y = args.value("diag_y", ys.front());
    std::vector<double> y_theta(static_cast<std::size_t>(mix.n_nodes()), 1.0);
    std::vector<double> b_theta(static_cast<std::size_t>(mix.n_nodes()));
    for (int k = 0; k < mix.n_nodes(); ++k)
        b_theta[static_cast<std::size_t>(k)] = per_theta[static_cast<std::size_t>(k)].back();
    atomic_write_with(ctx.out_path("theta_diagnostics.csv"), [&](const std::string& tmp) {
        write_theta_diagnostics_csv(mix, diag_y, y_theta, b_theta, tmp);
    });

    ctx.manifest.verdicts["model_hash"] = spec_content_hash(spec);
    ctx.finish();
    std::cout << "y-sweep over " << ys.size() << " initial conditions, " << tenors.size()
              << " tenors\n";
    return kExitOk;
}

int cmd_simulate(const nlohmann::json& effective, CommandContext& ctx) {
    const auto spec = load_model(effective.at("model"));
    const auto sim = sim_from_json(effective.at("sim"));
    ctx.manifest.solver_step = sim.step;
    ctx.manifest.seed = sim.seed;

    const auto bundle = simulate_market(spec, sim);
    atomic_write_with(ctx.out_path("bundle_summary.csv"),
                      [&](const std::string& tmp) { write_bundle_summary_csv(bundle, tmp); });
    if (effective.at("args").value("dump_paths", false)) {
        atomic_write_with(ctx.out_path("paths.csv"),
                          [&](const std::string& tmp) { write_bundle_paths_csv(bundle, tmp); });
    }

    // drift test of the compensated product on up to five evenly spread grid nodes
    std::vector<double> times;
    const auto n_steps = bundle.n_nodes() - 1;
    for (int j = 0; j <= 4; ++j) {
        const double t = bundle.grid[static_cast<std::size_t>(j * n_steps / 4)];
        if (times.empty() || t > times.back()) times.push_back(t);
    }
    const auto res = martingale_drift_test(compensated_wealth_paths(bundle, times));

    nlohmann::json out;
    out["compensated_product"] =
        estimate_to_json(res.aggregate, "drift_per_unit_time", sim.seed,
                         res.pass ? "pass" : "fail");
    out["buckets"] = nlohmann::json::array();
    for (std::size_t b = 0; b < res.buckets.size(); ++b)
        out["buckets"].push_back(estimate_to_json(
            res.buckets[b], "bucket_" + std::to_string(b), sim.seed, ""));
    out["clip_events"] = bundle.clip_events;
    atomic_write_json(ctx.out_path("martingale.json"), out);
    ctx.manifest.verdicts["martingale"] = res.pass ? "pass" : "fail";
    ctx.finish();
    std::cout << "simulated " << sim.n_paths << " paths, martingale test "
              << (res.pass ? "pass" : "fail") << ", clip events " << bundle.clip_events << "\n";
    return res.pass ? kExitOk : kExitVerification;
}

} // namespace

int run_effective(const nlohmann::json& effective, const std::string& out_dir) {
    const auto command = effective.at("command").get<std::string>();
    auto ctx = make_context(effective, out_dir);
    if (command == "validate") return cmd_validate(effective, ctx);
    if (command == "curve") return cmd_curve(effective, ctx);
    if (command == "longrate") return cmd_longrate(effective, ctx);
    if (command == "backward-power") return cmd_backward_power(effective, ctx);
    if (command == "mixture-curve") return cmd_mixture_curve(effective, ctx);
    if (command == "simulate") return cmd_simulate(effective, ctx);
    throw ConfigError("unknown command: " + command);
}

int run_replay(const std::string& manifest_path, const std::string& out_dir) {
    const auto m = manifest_from_json(load_json_file(manifest_path));
    return run_effective(m.effective_config, out_dir);
}

} // namespace ramsey::cli
