#include <doctest.h>

#include <random>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "ramsey/affine_model.hpp"
#include "ramsey/riccati.hpp"

using namespace ramsey;
using namespace ramsey::testing;

TEST_CASE("validate_spec accepts the one-factor reference model") {
    AffineModelSpec spec = one_factor_base();
    spec.drift_matrix(0, 0) = -0.5;
    spec.drift_intercept[0] = 0.05;
    spec.vol_loading(0, 0) = 1.0;
    spec.eigen_intercepts[0] = 0.01;
    spec.xi0[0] = 0.04;
    const auto report = validate_spec(spec);
    CHECK(report.pass());
}

TEST_CASE("validate_spec rejects a negative eigenvariance intercept") {
    AffineModelSpec spec = one_factor_base();
    spec.eigen_intercepts[0] = -0.01;
    const auto report = validate_spec(spec);
    REQUIRE_FALSE(report.pass());
    bool found = false;
    for (const auto& issue : report.issues) found |= issue.invariant == "eigen_intercepts";
    CHECK(found);
}

TEST_CASE("validate_spec rejects a vol loading coupling E and its complement") {
    AffineModelSpec spec = two_factor_spec();
    spec.vol_loading(0, 1) = 1.0;
    const auto report = validate_spec(spec);
    REQUIRE_FALSE(report.pass());
    bool found = false;
    for (const auto& issue : report.issues) found |= issue.invariant == "vol_loading_block";
    CHECK(found);
}

TEST_CASE("validate_spec rejects misplaced loading support") {
    AffineModelSpec spec = two_factor_spec();
    spec.premium_loading_R[1] = 0.1; // outside E
    CHECK_FALSE(validate_spec(spec).pass());

    spec = two_factor_spec();
    spec.premium_loading_perp[0] = 0.1; // inside E
    CHECK_FALSE(validate_spec(spec).pass());
}

TEST_CASE("eigen_variances evaluates and truncates") {
    AffineModelSpec spec = one_factor_base();
    SUBCASE("constant case") {
        spec.dim = 2;
        spec.drift_matrix = Eigen::MatrixXd::Zero(2, 2);
        spec.drift_intercept = Eigen::VectorXd::Zero(2);
        spec.vol_loading = Eigen::MatrixXd::Identity(2, 2);
        spec.eigen_intercepts = (Eigen::VectorXd(2) << 2.0, 3.0).finished();
        spec.eigen_loadings = Eigen::MatrixXd::Zero(2, 2);
        spec.admissible_coords = {1, 2};
        spec.rate_loading_a = Eigen::VectorXd::Zero(2);
        spec.consumption_loading_a = Eigen::VectorXd::Zero(2);
        spec.premium_loading_R = Eigen::VectorXd::Zero(2);
        spec.premium_loading_perp = Eigen::VectorXd::Zero(2);
        spec.portfolio_loading = Eigen::VectorXd::Zero(2);
        spec.xi0 = Eigen::VectorXd::Zero(2);
        const auto ev = eigen_variances(spec, (Eigen::VectorXd(2) << 5.0, -7.0).finished());
        CHECK(ev.lambda[0] == 2.0);
        CHECK(ev.lambda[1] == 3.0);
        CHECK(ev.clipped == 0);
    }
    SUBCASE("square-root style evaluation and truncation") {
        spec.eigen_loadings(0, 0) = 1.0;
        auto ev = eigen_variances(spec, (Eigen::VectorXd(1) << 0.04).finished());
        CHECK(ev.lambda[0] == doctest::Approx(0.04));
        CHECK(ev.clipped == 0);
        ev = eigen_variances(spec, (Eigen::VectorXd(1) << -0.01).finished());
        CHECK(ev.lambda[0] == 0.0);
        CHECK(ev.clipped == 1);
    }
}

TEST_CASE("drift and diffusion evaluate the affine forms") {
    AffineModelSpec spec = one_factor_base();
    spec.drift_matrix(0, 0) = -0.5;
    spec.drift_intercept[0] = 0.05;
    spec.vol_loading(0, 0) = 1.0;
    spec.eigen_loadings(0, 0) = 1.0;
    const Eigen::VectorXd xi = (Eigen::VectorXd(1) << 0.1).finished();
    CHECK(factor_drift(spec, xi)[0] == doctest::Approx(0.0));
    const Eigen::VectorXd xi2 = (Eigen::VectorXd(1) << 0.04).finished();
    CHECK(diffusion_matrix(spec, xi2)(0, 0) == doctest::Approx(0.2));
    // truncated variance gives a zero column
    const Eigen::VectorXd xi3 = (Eigen::VectorXd(1) << -1.0).finished();
    CHECK(diffusion_matrix(spec, xi3)(0, 0) == 0.0);
}

namespace {

AffineModelSpec random_spec(std::mt19937_64& gen, int n, int n_admissible) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> pos(0.1, 1.0);
    AffineModelSpec spec;
    spec.dim = n;
    spec.drift_matrix = Eigen::MatrixXd::Zero(n, n);
    spec.vol_loading = Eigen::MatrixXd::Zero(n, n);
    std::vector<bool> mask(static_cast<std::size_t>(n), false);
    for (int i = 0; i < n_admissible; ++i) mask[static_cast<std::size_t>(i)] = true;
    for (int i = 0; i < n; ++i) {
        spec.admissible_coords = {};
        for (int j = 0; j < n; ++j) {
            if (mask[static_cast<std::size_t>(i)] == mask[static_cast<std::size_t>(j)]) {
                spec.drift_matrix(i, j) = u(gen);
                spec.vol_loading(i, j) = u(gen);
            }
        }
    }
    for (int i = 0; i < n; ++i)
        if (mask[static_cast<std::size_t>(i)]) spec.admissible_coords.push_back(i + 1);
    spec.drift_intercept = Eigen::VectorXd::NullaryExpr(n, [&](int) { return u(gen); });
    spec.eigen_intercepts = Eigen::VectorXd::NullaryExpr(n, [&](int) { return pos(gen) + 1.0; });
    spec.eigen_loadings = Eigen::MatrixXd::NullaryExpr(n, n, [&](int, int) { return 0.2 * u(gen); });
    spec.rate_loading_a = Eigen::VectorXd::NullaryExpr(n, [&](int) { return 0.5 * pos(gen); });
    spec.rate_loading_b = pos(gen) * 0.05;
    spec.consumption_loading_a = Eigen::VectorXd::NullaryExpr(n, [&](int) { return 0.1 * pos(gen); });
    spec.consumption_loading_b = pos(gen) * 0.02;
    spec.premium_loading_R = Eigen::VectorXd::Zero(n);
    spec.premium_loading_perp = Eigen::VectorXd::Zero(n);
    spec.portfolio_loading = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        if (mask[static_cast<std::size_t>(i)]) {
            spec.premium_loading_R[i] = u(gen);
            spec.portfolio_loading[i] = u(gen);
        } else {
            spec.premium_loading_perp[i] = u(gen);
        }
    }
    spec.xi0 = Eigen::VectorXd::NullaryExpr(n, [&](int) { return 0.3 * pos(gen); });
    return spec;
}

} // namespace

TEST_CASE("instantaneous covariance entries are affine in the factor") {
    std::mt19937_64 gen(42);
    for (int rep = 0; rep < 10; ++rep) {
        const int n = 1 + static_cast<int>(gen() % 3);
        const AffineModelSpec spec = random_spec(gen, n, std::max(1, n - 1));
        REQUIRE(validate_spec(spec).pass());

        // Interpolate each covariance entry from values at n+1 affinely independent
        // points, then verify the interpolation at fresh points.
        std::vector<Eigen::VectorXd> basis;
        basis.push_back(Eigen::VectorXd::Ones(n)); // keeps eigenvariances positive
        for (int i = 0; i < n; ++i)
            basis.push_back(Eigen::VectorXd::Ones(n) + 0.5 * Eigen::VectorXd::Unit(n, i));
        auto cov = [&](const Eigen::VectorXd& xi) {
            const Eigen::MatrixXd d = diffusion_matrix(spec, xi);
            return (d * d.transpose()).eval();
        };
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) {
                // affine fit c0 + c . xi through the basis values
                Eigen::MatrixXd lhs(n + 1, n + 1);
                Eigen::VectorXd rhs(n + 1);
                for (int row = 0; row <= n; ++row) {
                    lhs(row, 0) = 1.0;
                    lhs.row(row).tail(n) = basis[static_cast<std::size_t>(row)].transpose();
                    rhs[row] = cov(basis[static_cast<std::size_t>(row)])(a, b);
                }
                const Eigen::VectorXd coef = lhs.fullPivLu().solve(rhs);
                std::uniform_real_distribution<double> w(0.8, 1.4);
                for (int rep2 = 0; rep2 < 4; ++rep2) {
                    Eigen::VectorXd xi = Eigen::VectorXd::NullaryExpr(n, [&](int) { return w(gen); });
                    const double predicted = coef[0] + coef.tail(n).dot(xi);
                    CHECK(cov(xi)(a, b) == doctest::Approx(predicted).epsilon(1e-9));
                }
            }
        }
    }
}

TEST_CASE("admissible and orthogonal volatility directions are orthogonal") {
    std::mt19937_64 gen(7);
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 2 + static_cast<int>(gen() % 2);
        const AffineModelSpec spec = random_spec(gen, n, 1 + static_cast<int>(gen() % (n - 1)));
        REQUIRE(validate_spec(spec).pass());
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        const Eigen::VectorXd a = Eigen::VectorXd::NullaryExpr(n, [&](int) { return u(gen); });
        const Eigen::VectorXd xi = Eigen::VectorXd::NullaryExpr(n, [&](int) { return 1.0 + 0.3 * u(gen); });
        const Eigen::MatrixXd d = diffusion_matrix(spec, xi);
        const Eigen::VectorXd va = d.transpose() * project_admissible(spec, a);
        const Eigen::VectorXd vp = d.transpose() * project_orthogonal(spec, a);
        CHECK(std::abs(va.dot(vp)) < 1e-14);
    }
}

TEST_CASE("json round trip preserves the spec and its hash") {
    const AffineModelSpec spec = two_factor_spec();
    const auto j = spec_to_json(spec);
    const AffineModelSpec back = spec_from_json(j);
    CHECK(spec_to_json(back) == j);
    CHECK(spec_content_hash(back) == spec_content_hash(spec));
    // a parameter change moves the hash
    AffineModelSpec other = spec;
    other.rate_loading_b += 1e-9;
    CHECK(spec_content_hash(other) != spec_content_hash(spec));
}
