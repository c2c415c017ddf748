// Acceptance suite: runs every agreed exit criterion at its stated tolerance and
// prints one pass/fail line per criterion. Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "ramsey/market.hpp"
#include "ramsey/mc.hpp"
#include "ramsey/mixture.hpp"
#include "ramsey/yield_curve.hpp"

using namespace ramsey;
using namespace ramsey::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
};

using Criterion = std::function<void(Outcome&)>;

void expect(Outcome& o, bool cond, const std::string& what) {
    if (!cond) {
        o.pass = false;
        o.detail << " FAILED[" << what << "]";
    }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// 1. backward solver against independently derived closed forms

void criterion_riccati_vs_analytic(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    {
        const AffineModelSpec spec = vasicek_spec();
        const GaussianBondOracle oracle{spec.drift_matrix(0, 0), spec.drift_intercept[0],
                                        spec.vol_loading(0, 0), spec.rate_loading_a[0],
                                        spec.rate_loading_b};
        const auto sol = bond_riccati(spec, 10.0, 1e-3);
        double worst = 0.0;
        for (double t : {0.0, 2.0, 5.0, 8.0}) {
            const double tau = 10.0 - t;
            worst = std::max(worst, std::abs(sol.a_at(t)[0] / oracle.A(tau) - 1.0));
            worst = std::max(worst, std::abs(sol.b_at(t) / oracle.B(tau) - 1.0));
        }
        o.detail << "gaussian rel err " << worst;
        expect(o, worst < 1e-8, "gaussian closed form at 1e-8");
    }
    const double t_gauss = seconds_since(t0);
    const auto t1 = std::chrono::steady_clock::now();
    {
        const AffineModelSpec spec = cir_spec();
        const SquareRootBondOracle oracle{spec.drift_matrix(0, 0), spec.drift_intercept[0],
                                          spec.vol_loading(0, 0), spec.rate_loading_a[0],
                                          spec.rate_loading_b};
        const auto sol = bond_riccati(spec, 10.0, 1e-3);
        double worst = 0.0;
        for (double t : {0.0, 2.0, 5.0, 8.0}) {
            const double tau = 10.0 - t;
            worst = std::max(worst, std::abs(sol.a_at(t)[0] / oracle.A(tau) - 1.0));
            worst = std::max(worst, std::abs(sol.b_at(t) / oracle.B(tau) - 1.0));
        }
        o.detail << ", square-root rel err " << worst;
        expect(o, worst < 1e-6, "square-root closed form at 1e-6");
    }
    const double t_cir = seconds_since(t1);
    o.detail << ", runtimes " << t_gauss << "s / " << t_cir << "s";
    expect(o, t_gauss < 1.0 && t_cir < 1.0, "runtime under one second each");
}

// ---------------------------------------------------------------------------
// 2. backward solve against the Monte Carlo oracle

void criterion_riccati_vs_mc(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<double> tenors{1.0, 5.0, 10.0, 30.0};
    for (auto [name, spec] : {std::pair<const char*, AffineModelSpec>{"gaussian", vasicek_spec()},
                              {"square-root", cir_spec()}}) {
        const auto sol = bond_riccati(spec, 30.0, 1e-3);
        SimConfig sim{200000, 1.0 / 96.0, 30.0, 31415};
        const auto est = mc_bond_prices(spec, sim, tenors);
        double worst_sigma = 0.0, worst_rel = 0.0;
        for (std::size_t j = 0; j < tenors.size(); ++j) {
            const double price = bond_price(sol, 30.0 - tenors[j], spec.xi0);
            worst_sigma =
                std::max(worst_sigma, std::abs(est[j].mean - price) / est[j].std_error);
            worst_rel = std::max(worst_rel, std::abs(est[j].mean - price) / price);
        }
        o.detail << name << " worst " << worst_sigma << " se, rel " << 100.0 * worst_rel << "%; ";
        expect(o, worst_sigma < 3.0, std::string(name) + " within 3 standard errors");
        expect(o, worst_rel < 5e-3, std::string(name) + " relative error under 0.5%");
    }
    const double elapsed = seconds_since(t0);
    o.detail << "runtime " << elapsed << "s";
    expect(o, elapsed < 60.0, "runtime under a minute");
}

// ---------------------------------------------------------------------------
// 3. deterministic limit

void criterion_deterministic_limit(Outcome& o) {
    const AffineModelSpec spec = zero_vol_spec();
    const auto curve = make_yield_curve(spec, {1.0, 2.0, 5.0, 10.0}, 1e-3);
    const double price10 = curve.bond_prices.back();
    o.detail << "B(0,10) err " << std::abs(price10 - std::exp(-0.2));
    expect(o, std::abs(price10 - std::exp(-0.2)) < 1e-12, "B(0,10) = exp(-0.2) at 1e-12");
    double flat_err = 0.0;
    for (double r : curve.zero_rates) flat_err = std::max(flat_err, std::abs(r - 0.02));
    o.detail << ", curve flatness err " << flat_err;
    expect(o, flat_err < 1e-12, "flat curve at the short rate");
}

// ---------------------------------------------------------------------------
// 4. exact linearity of the optimal processes

void criterion_linearity(Outcome& o) {
    const AffineModelSpec spec = vasicek_market_spec();
    const SimConfig sim{1024, 0.01, 1.0, 8888};
    const auto bundle = simulate_market(spec, sim);
    const auto base = power_optimal_triplet(bundle, 1.0, 1.0);
    const auto scaled = power_optimal_triplet(bundle, 2.0, 3.0);
    bool wealth_exact = true, price_exact = true;
    for (std::size_t i = 0; i < base.wealth.size(); ++i) {
        wealth_exact &= scaled.wealth[i] == 2.0 * base.wealth[i];
        price_exact &= scaled.state_price[i] == 3.0 * base.state_price[i];
    }
    o.detail << "bitwise over " << base.wealth.size() << " samples";
    expect(o, wealth_exact, "X(2) bitwise 2 X(1)");
    expect(o, price_exact, "Y(3) bitwise 3 Y(1)");
}

// ---------------------------------------------------------------------------
// 5. martingale drift tests with injected-bias detection

void criterion_martingale(Outcome& o) {
    const AffineModelSpec spec = vasicek_market_spec(); // nonzero consumption rate
    const SimConfig sim{100000, 0.01, 1.0, 1234};
    const std::vector<double> times{0.0, 0.25, 0.5, 0.75, 1.0};
    const auto clean = martingale_drift_test(simulate_compensated_product(spec, sim, times));
    o.detail << "clean drift " << clean.aggregate.mean << " +- " << clean.aggregate.std_error;
    expect(o, clean.pass, "compensated product drift CI contains zero");
    const auto biased =
        martingale_drift_test(simulate_state_price_samples(spec, sim, times, 0.01));
    o.detail << ", biased drift " << biased.aggregate.mean;
    expect(o, !biased.pass, "one percent bias detected");
}

// ---------------------------------------------------------------------------
// 6. backward power-utility constraint propagation

void criterion_backward_power(Outcome& o) {
    const AffineModelSpec spec = two_factor_spec();
    const double theta = 0.5;
    const auto sol = solve_backward_power_constraint(spec, theta, 1.0, 1e-3);

    const double ortho = orthogonal_identity_residual(spec, sol);
    o.detail << "orthogonal residual " << ortho;
    expect(o, ortho < 1e-8, "orthogonal identity at 1e-8");

    // the coarse run sums pairs of refined noise draws, so both runs share one
    // Brownian path and the sup-error ratio measures the true pathwise order
    SimConfig coarse{512, 1e-3, 1.0, 4242};
    coarse.noise_substeps = 2;
    SimConfig fine = coarse;
    fine.step = 5e-4;
    fine.noise_substeps = 1;
    const double e_coarse = backward_constraint_sup_error(spec, sol, coarse);
    const double e_fine = backward_constraint_sup_error(spec, sol, fine);
    o.detail << ", sup error " << e_coarse << " -> " << e_fine;
    expect(o, e_coarse < 5e-3, "pathwise constraint error under 5e-3 at step 1e-3");
    expect(o, e_fine > 0.0 && e_fine / e_coarse > 0.3 && e_fine / e_coarse < 0.7,
           "error halves with the step");
}

// ---------------------------------------------------------------------------
// 7. long-rate trichotomy

void criterion_long_rate(Outcome& o) {
    const auto flat = long_rate_classify(vasicek_spec(), 0.0, vasicek_spec().xi0);
    o.detail << "mean-reverting: " << to_string(flat.verdict);
    expect(o, flat.verdict == LongRateClass::Flat, "mean-reverting fixture flat");

    const AffineModelSpec driftless = driftless_gaussian_spec();
    const auto infinite = long_rate_classify(driftless, 0.0, driftless.xi0);
    o.detail << ", no-mean-reversion: " << to_string(infinite.verdict);
    expect(o, infinite.verdict == LongRateClass::Infinite, "zero mean reversion infinite");

    // Constructed exponent profile with square-root maturity growth over the
    // square-root factor model: bounded nonzero lim ||Gamma||^2 / (T - t). The tail
    // must reach far enough that the sqrt-profile extrapolation of ||Gamma||/(T-t)
    // falls below the classification tolerance.
    const AffineModelSpec spec = cir_spec();
    const double v = 0.5; // ||Gamma||^2 / tau -> (0.2 v)^2 xi = 4e-4 at xi0
    ExponentCurve profile;
    {
        double tau = 40960.0;
        for (int j = 0; j < 9; ++j) {
            profile.tau.insert(profile.tau.begin(), tau);
            profile.A.insert(profile.A.begin(),
                             (Eigen::VectorXd(1) << v * std::sqrt(tau)).finished());
            tau *= 0.5;
        }
    }
    const auto nd = classify_long_rate_curve(spec, spec.xi0, profile, 1e-4);
    o.detail << ", constructed: " << to_string(nd.verdict) << " (limit "
             << nd.vol2_over_tau_limit << ")";
    expect(o, nd.verdict == LongRateClass::NonDecreasing, "constructed profile non-decreasing");

    // l_t = l_0 + int lim ||Gamma||^2 / 2(T-s) ds along simulated paths must not fall.
    const SimConfig sim{16, 0.01, 2.0, 515};
    const auto paths = simulate_factors(spec, sim);
    bool monotone = true;
    double worst_drop = 0.0;
    for (std::int64_t p = 0; p < sim.n_paths; ++p) {
        double l = 0.0, prev = 0.0;
        for (std::int64_t k = 0; k < paths.n_nodes(); ++k) {
            Eigen::VectorXd xi(1);
            xi[0] = paths.xi_at(p, k, 0);
            const auto cls = classify_long_rate_curve(spec, xi, profile, 1e-4);
            l += 0.5 * cls.vol2_over_tau_limit * 0.01;
            worst_drop = std::min(worst_drop, l - prev);
            monotone &= l >= prev - 1e-4;
            prev = l;
        }
    }
    o.detail << ", worst path drop " << worst_drop;
    expect(o, monotone, "l_t non-decreasing along paths at 1e-4");
}

// ---------------------------------------------------------------------------
// 8. mixture identities

void criterion_mixture(Outcome& o) {
    // weight normalization on the default sixteen-node rule
    const MixtureSpec dflt = make_mixture_spec(mixture_base_spec(), 16);
    double worst_norm = 0.0;
    for (double v : {0.5, 1.0, 2.0}) {
        double acc_f = 0.0, acc_g = 0.0;
        for (int k = 0; k < dflt.n_nodes(); ++k) {
            const auto kk = static_cast<std::size_t>(k);
            acc_f += dflt.quadrature_weights[kk] * weight_x(dflt, dflt.theta_nodes[kk], v);
            acc_g += dflt.quadrature_weights[kk] * weight_y(dflt, dflt.theta_nodes[kk], v);
        }
        worst_norm = std::max({worst_norm, std::abs(acc_f / v - 1.0), std::abs(acc_g / v - 1.0)});
    }
    o.detail << "normalization err " << worst_norm;
    expect(o, worst_norm < 1e-6, "weight normalization at 1e-6");

    // one-node degeneracy reproduces the linear-case curve bitwise
    const MixtureSpec one = make_mixture_spec(mixture_base_spec(), 1, 0.3, 0.7);
    const std::vector<double> tenors{1.0, 5.0, 10.0};
    const auto linear = make_yield_curve(one.theta_spec(0), tenors, 1e-3);
    bool bitwise = true;
    for (double y : {0.25, 0.5, 1.0, 2.0, 4.0}) {
        const auto curve = mixture_yield_curve(one, y, tenors, 1e-3);
        for (std::size_t j = 0; j < tenors.size(); ++j)
            bitwise &= curve.bond_prices[j] == linear.bond_prices[j];
    }
    expect(o, bitwise, "one-node degeneracy bitwise");

    // sweep over a family whose per-theta bonds genuinely differ
    MixtureSpec mix = make_mixture_spec(mixture_base_spec(), 16);
    for (int k = 0; k < mix.n_nodes(); ++k)
        mix.premium_perp_theta[static_cast<std::size_t>(k)] =
            (Eigen::VectorXd(2) << 0.0,
             0.4 * (1.0 - mix.theta_nodes[static_cast<std::size_t>(k)]))
                .finished();
    const auto per_theta = per_theta_bond_prices(mix, tenors, 1e-3);
    const std::vector<double> ys{0.25, 0.5, 1.0, 2.0, 4.0};
    bool bounded = true;
    double max_spread = 0.0;
    std::vector<YieldCurve> curves;
    for (double y : ys) curves.push_back(mixture_yield_curve(mix, y, tenors, per_theta));
    for (std::size_t j = 0; j < tenors.size(); ++j) {
        double lo = 1e300, hi = -1e300;
        for (int k = 0; k < mix.n_nodes(); ++k) {
            lo = std::min(lo, per_theta[static_cast<std::size_t>(k)][j]);
            hi = std::max(hi, per_theta[static_cast<std::size_t>(k)][j]);
        }
        for (const auto& c : curves) bounded &= c.bond_prices[j] >= lo && c.bond_prices[j] <= hi;
        max_spread = std::max(max_spread, std::abs(curves.front().bond_prices[j] -
                                                   curves.back().bond_prices[j]));
    }
    o.detail << ", y-sweep spread " << max_spread;
    expect(o, bounded, "mixture prices inside the per-theta envelope");
    expect(o, max_spread > 1e-6, "y-sweep produces non-constant curves");

    // pathwise strict monotonicity of the state-price aggregate in y
    const SimConfig sim{16, 0.02, 1.0, 99};
    const auto bundle = simulate_mixture(mix, sim);
    bool monotone = true;
    const auto last = bundle.n_nodes() - 1;
    for (std::int64_t p = 0; p < sim.n_paths; ++p) {
        double prev = 0.0;
        for (double y : ys) {
            const double val = bar_processes(mix, bundle, p, last, 1.0, y).y_bar;
            monotone &= val > prev;
            prev = val;
        }
    }
    expect(o, monotone, "Y_bar strictly increasing in y pathwise");
}

// ---------------------------------------------------------------------------
// 9. pathwise yield-dynamics identity

void criterion_yield_dynamics(Outcome& o) {
    const AffineModelSpec spec = vasicek_market_spec();
    const auto sol = bond_riccati(spec, 4.0, 1e-3);
    auto run = [&](double step) {
        const SimConfig sim{32, step, 2.0, 61};
        const auto bundle = simulate_market(spec, sim);
        return yield_dynamics_check(spec, bundle, sol).max_discrepancy;
    };
    const double coarse = run(1e-3);
    const double fine = run(5e-4);
    o.detail << "discrepancy " << coarse << " -> " << fine;
    expect(o, coarse < 1e-2, "reconstruction under 1e-2 rate units at step 1e-3");
    expect(o, fine / coarse < 0.7, "discrepancy halves with the step");
}

// ---------------------------------------------------------------------------
// 10. CLI reproducibility from manifests

int run_cli(const std::string& args) {
    const std::string cmd = std::string(RAMSEY_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_cli_reproducibility(Outcome& o) {
    const fs::path base = fs::path("acceptance_cli");
    fs::remove_all(base);
    fs::create_directories(base);
    const std::string configs = RAMSEY_CONFIG_DIR;

    const std::vector<std::pair<std::string, std::string>> runs = {
        {"validate", "validate --config " + configs + "/vasicek.json"},
        {"curve", "curve --config " + configs + "/vasicek.json --tenors 1,5,10"},
        {"longrate", "longrate --config " + configs + "/cir.json"},
        {"backward-power",
         "backward-power --config " + configs + "/two_factor.json --theta 0.5 --horizon 2"},
        {"mixture-curve", "mixture-curve --config " + configs + "/two_factor.json --mixture " +
                              configs + "/mixture.json --tenors 1,5,10 --ys 0.5,1,2"},
        {"simulate",
         "simulate --config " + configs + "/vasicek.json --sim " + configs + "/sim.json"},
    };

    for (const auto& [name, args] : runs) {
        const fs::path dir_a = base / (name + "_a");
        const fs::path dir_b = base / (name + "_b");
        const int rc = run_cli(args + " --out " + dir_a.string());
        expect(o, rc == 0, name + " exits cleanly");
        if (rc != 0) continue;
        const int rc2 = run_cli("replay --manifest " + (dir_a / "manifest.json").string() +
                                " --out " + dir_b.string());
        expect(o, rc2 == 0, name + " replay exits cleanly");
        if (rc2 != 0) continue;

        bool identical = true;
        for (const auto& entry : fs::directory_iterator(dir_a)) {
            const auto fname = entry.path().filename().string();
            if (fname == "manifest.json") continue; // carries wall time, not an output
            identical &= slurp(entry.path()) == slurp(dir_b / fname);
        }
        expect(o, identical, name + " outputs byte-identical on replay");
    }
    o.detail << runs.size() << " commands replayed";
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, Criterion>> criteria = {
        {"riccati-vs-analytic", criterion_riccati_vs_analytic},
        {"riccati-vs-mc", criterion_riccati_vs_mc},
        {"deterministic-limit", criterion_deterministic_limit},
        {"linearity", criterion_linearity},
        {"martingale-tests", criterion_martingale},
        {"backward-power-constraint", criterion_backward_power},
        {"long-rate-trichotomy", criterion_long_rate},
        {"mixture-identities", criterion_mixture},
        {"yield-dynamics-identity", criterion_yield_dynamics},
        {"cli-reproducibility", criterion_cli_reproducibility},
    };

    bool all_pass = true;
    int id = 1;
    for (const auto& [name, fn] : criteria) {
        Outcome outcome;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            fn(outcome);
        } catch (const std::exception& e) {
            outcome.pass = false;
            outcome.detail << " exception: " << e.what();
        }
        const double secs = seconds_since(t0);
        std::printf("[%s] %2d %-26s (%.2fs) %s\n", outcome.pass ? "PASS" : "FAIL", id,
                    name.c_str(), secs, outcome.detail.str().c_str());
        std::fflush(stdout);
        all_pass &= outcome.pass;
        ++id;
    }
    return all_pass ? 0 : 1;
}
