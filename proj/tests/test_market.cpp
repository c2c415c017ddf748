#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "ramsey/market.hpp"
#include "ramsey/yield_curve.hpp"

using namespace ramsey;
using namespace ramsey::testing;

TEST_CASE("state price with no volatility loading discounts deterministically") {
    const AffineModelSpec spec = zero_vol_spec();
    const SimConfig sim{4, 0.01, 2.0, 1};
    const auto bundle = simulate_state_price(spec, sim);
    for (std::int64_t p = 0; p < sim.n_paths; ++p) {
        for (std::int64_t k = 0; k < bundle.n_nodes(); ++k) {
            const double t = bundle.grid[static_cast<std::size_t>(k)];
            CHECK(std::exp(bundle.log_state_price[static_cast<std::size_t>(bundle.idx(p, k))]) ==
                  doctest::Approx(std::exp(-0.02 * t)).epsilon(1e-13));
        }
    }
}

TEST_CASE("wealth trivial cases") {
    AffineModelSpec spec = zero_vol_spec();
    SUBCASE("no portfolio, no consumption grows at the short rate") {
        spec.consumption_loading_b = 0.0;
        const SimConfig sim{2, 0.01, 3.0, 2};
        const auto bundle = simulate_market(spec, sim);
        const auto last = static_cast<std::size_t>(bundle.idx(0, bundle.n_nodes() - 1));
        CHECK(std::exp(bundle.log_wealth[last]) ==
              doctest::Approx(std::exp(0.02 * 3.0)).epsilon(1e-13));
    }
    SUBCASE("constant consumption rate compounds to r minus zeta") {
        spec.consumption_loading_b = 0.05;
        const SimConfig sim{2, 0.01, 3.0, 2};
        const auto bundle = simulate_market(spec, sim);
        const auto last = static_cast<std::size_t>(bundle.idx(0, bundle.n_nodes() - 1));
        CHECK(std::exp(bundle.log_wealth[last]) ==
              doctest::Approx(std::exp((0.02 - 0.05) * 3.0)).epsilon(1e-13));
    }
}

TEST_CASE("two-phase wealth fill matches the joint simulation bitwise") {
    const AffineModelSpec spec = vasicek_market_spec();
    const SimConfig sim{16, 0.02, 1.0, 42};
    const auto joint = simulate_market(spec, sim);
    auto two_phase = simulate_state_price(spec, sim);
    simulate_optimal_wealth(spec, two_phase);
    REQUIRE(joint.log_wealth.size() == two_phase.log_wealth.size());
    for (std::size_t i = 0; i < joint.log_wealth.size(); ++i) {
        CHECK(joint.log_wealth[i] == two_phase.log_wealth[i]);
        CHECK(joint.consumption_rate[i] == two_phase.consumption_rate[i]);
    }
}

TEST_CASE("optimal processes are exactly linear in their initial conditions") {
    const AffineModelSpec spec = vasicek_market_spec();
    const SimConfig sim{32, 0.01, 1.0, 11};
    const auto bundle = simulate_market(spec, sim);
    const auto base = power_optimal_triplet(bundle, 1.0, 1.0);
    const auto scaled = power_optimal_triplet(bundle, 2.0, 3.0);
    for (std::size_t i = 0; i < base.wealth.size(); ++i) {
        CHECK(scaled.wealth[i] == 2.0 * base.wealth[i]);
        CHECK(scaled.state_price[i] == 3.0 * base.state_price[i]);
        CHECK(scaled.consumption[i] == 2.0 * base.consumption[i]);
    }
}

TEST_CASE("compensated wealth-state-price product has no detectable drift") {
    const AffineModelSpec spec = vasicek_market_spec();
    const SimConfig sim{40000, 0.01, 1.0, 314};
    const std::vector<double> times{0.0, 0.25, 0.5, 0.75, 1.0};
    const auto m = simulate_compensated_product(spec, sim, times);
    const auto res = martingale_drift_test(m);
    CHECK(res.pass);
}

TEST_CASE("additive compensated form holds for arbitrary admissible pairs") {
    const AffineModelSpec spec = two_factor_spec();
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    for (int rep = 0; rep < 3; ++rep) {
        MarketLoadings loadings;
        loadings.portfolio = (Eigen::VectorXd(2) << u(gen), 0.0).finished();
        const double nu = u(gen);
        loadings.state_price =
            (Eigen::VectorXd(2) << 0.0, nu).finished() - spec.premium_loading_R;
        const SimConfig sim{20000, 0.02, 1.0, 2718 + static_cast<std::uint64_t>(rep)};
        const auto bundle = simulate_market(spec, sim, loadings);
        const auto m = additive_compensated_paths(bundle, {0.0, 0.5, 1.0});
        CHECK(martingale_drift_test(m).pass);
    }
}

TEST_CASE("backward power constraint: deterministic market closed form") {
    AffineModelSpec spec = zero_vol_spec(); // r = 0.02, no volatility
    spec.consumption_loading_b = 0.0;
    const double theta = 0.4;
    const auto sol = solve_backward_power_constraint(spec, theta, 5.0, 1e-3);
    const double beta = 1.0 - 1.0 / theta;
    for (double t : {0.0, 1.0, 4.0}) {
        CHECK(sol.riccati.a_at(t).norm() == 0.0);
        // B(t) = -(1 - 1/theta) r (T - t)
        CHECK(sol.riccati.b_at(t) == doctest::Approx(-beta * 0.02 * (5.0 - t)).epsilon(1e-10));
    }
    CHECK(sol.riccati.a_at(5.0).norm() == 0.0);
    CHECK(sol.riccati.b_at(5.0) == 0.0);
}

TEST_CASE("backward power constraint matches its monte carlo statistic") {
    const AffineModelSpec spec = vasicek_market_spec();
    const SimConfig sim{40000, 1.0 / 128.0, 2.0, 911};
    const auto check = mc_power_constraint_check(spec, sim, 0.5, 2.0, 1e-3);
    CHECK(check.within_3se);
    CHECK_FALSE(check.heavy_tail_warning);
}

TEST_CASE("backward power constraint nearing log utility reduces to the zeta-only solve") {
    const AffineModelSpec spec = vasicek_market_spec();
    const auto near_one = solve_backward_power_constraint(spec, 0.999, 2.0, 1e-3);
    // beta -> 0: the statistic collapses to E[S_TH], an exponential-affine in zeta only
    AffineForm drift;
    drift.grad = spec.consumption_loading_a;
    drift.intercept = spec.consumption_loading_b;
    const auto zeta_only = solve_riccati_backward(spec, Eigen::VectorXd::Zero(1), 0.0, drift, 0.0,
                                                  2.0, 1e-3);
    CHECK(near_one.riccati.b_at(0.0) ==
          doctest::Approx(zeta_only.b_at(0.0)).epsilon(2e-2));
    CHECK(near_one.riccati.a_at(0.0)[0] ==
          doctest::Approx(zeta_only.a_at(0.0)[0]).epsilon(2e-2));
}

TEST_CASE("heavy-tailed constraint statistic raises the path-count warning") {
    // strongly negative exponent on a volatile state price: the sample is fat-tailed
    // and a small path count cannot pin the mean to ten percent
    AffineModelSpec spec = vasicek_market_spec();
    spec.premium_loading_R[0] = 1.2;
    const SimConfig sim{32, 1.0 / 64.0, 2.0, 5150};
    const auto check = mc_power_constraint_check(spec, sim, 0.08, 2.0, 1e-3);
    CHECK(check.heavy_tail_warning);
}

TEST_CASE("backward power constraint rejects theta outside (0,1)") {
    const AffineModelSpec spec = vasicek_market_spec();
    CHECK_THROWS_AS(solve_backward_power_constraint(spec, 1.5, 2.0, 1e-3), std::invalid_argument);
    CHECK_THROWS_AS(solve_backward_power_constraint(spec, 1.0, 2.0, 1e-3), std::invalid_argument);
    CHECK_THROWS_AS(solve_backward_power_constraint(spec, 0.0, 2.0, 1e-3), std::invalid_argument);
}

TEST_CASE("extreme risk tolerance with heavy volatility blows up loudly") {
    AffineModelSpec spec = cir_spec();
    spec.premium_loading_R[0] = 2.0;
    spec.vol_loading(0, 0) = 0.8;
    spec.drift_intercept[0] = 0.4; // keep the square-root process comfortably positive
    CHECK_THROWS_AS(solve_backward_power_constraint(spec, 0.05, 30.0, 1e-3), RiccatiBlowupError);
}

TEST_CASE("propagated backward wealth satisfies the horizon identity exactly") {
    const AffineModelSpec spec = two_factor_spec();
    const double theta = 0.5;
    const SimConfig sim{8, 0.01, 2.0, 21};
    const auto sol = solve_backward_power_constraint(spec, theta, 2.0, 0.01);
    const auto bundle = simulate_market(spec, sim);
    const auto wealth = propagate_backward_wealth(sol, bundle);
    const auto last = bundle.n_nodes() - 1;
    for (std::int64_t p = 0; p < sim.n_paths; ++p) {
        const auto row = static_cast<std::size_t>(bundle.idx(p, last));
        const double y = std::exp(bundle.log_state_price[row]);
        CHECK(wealth[row] == doctest::Approx(std::pow(y, -1.0 / theta)).epsilon(1e-12));
    }
}

TEST_CASE("orthogonal identity holds on the two-factor fixture") {
    const AffineModelSpec spec = two_factor_spec();
    const auto sol = solve_backward_power_constraint(spec, 0.35, 2.0, 1e-3);
    CHECK(orthogonal_identity_residual(spec, sol) < 1e-8);
}

TEST_CASE("simulated backward wealth meets the propagated constraint at first order") {
    const AffineModelSpec spec = two_factor_spec();
    const double theta = 0.5;
    const auto sol = solve_backward_power_constraint(spec, theta, 1.0, 1e-3);
    const SimConfig coarse{256, 1e-2, 1.0, 77};
    SimConfig fine = coarse;
    fine.step = 5e-3;
    const double e_coarse = backward_constraint_sup_error(spec, sol, coarse);
    const double e_fine = backward_constraint_sup_error(spec, sol, fine);
    CHECK(e_coarse < 5e-2);
    CHECK(e_fine < 0.7 * e_coarse);
}

TEST_CASE("bundle summary csv has one row per node") {
    const AffineModelSpec spec = vasicek_market_spec();
    const SimConfig sim{8, 0.25, 1.0, 5};
    const auto bundle = simulate_market(spec, sim);
    write_bundle_summary_csv(bundle, "bundle_summary_test.csv");
    std::ifstream in("bundle_summary_test.csv");
    REQUIRE(in.good());
    std::string line;
    int rows = -1; // discount the header
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 5);
}
