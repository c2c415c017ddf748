#pragma once

// Model fixtures shared by the unit and acceptance suites.

#include <Eigen/Dense>

#include "ramsey/affine_model.hpp"

namespace ramsey::testing {

inline AffineModelSpec one_factor_base() {
    AffineModelSpec spec;
    spec.dim = 1;
    spec.drift_matrix = Eigen::MatrixXd::Zero(1, 1);
    spec.drift_intercept = Eigen::VectorXd::Zero(1);
    spec.vol_loading = Eigen::MatrixXd::Zero(1, 1);
    spec.eigen_intercepts = Eigen::VectorXd::Zero(1);
    spec.eigen_loadings = Eigen::MatrixXd::Zero(1, 1);
    spec.admissible_coords = {1};
    spec.rate_loading_a = Eigen::VectorXd::Zero(1);
    spec.rate_loading_b = 0.0;
    spec.consumption_loading_a = Eigen::VectorXd::Zero(1);
    spec.consumption_loading_b = 0.0;
    spec.premium_loading_R = Eigen::VectorXd::Zero(1);
    spec.premium_loading_perp = Eigen::VectorXd::Zero(1);
    spec.portfolio_loading = Eigen::VectorXd::Zero(1);
    spec.xi0 = Eigen::VectorXd::Zero(1);
    return spec;
}

// Gaussian one-factor short rate: d xi = (-0.5 xi + 0.025) dt + 0.015 dW, r = xi.
inline AffineModelSpec vasicek_spec() {
    AffineModelSpec spec = one_factor_base();
    spec.drift_matrix(0, 0) = -0.5;
    spec.drift_intercept[0] = 0.025;
    spec.vol_loading(0, 0) = 0.015;
    spec.eigen_intercepts[0] = 1.0;
    spec.rate_loading_a[0] = 1.0;
    spec.consumption_loading_b = 0.02;
    spec.portfolio_loading[0] = 0.4;
    spec.xi0[0] = 0.03;
    return spec;
}

// Square-root one-factor: d xi = (-0.8 xi + 0.04) dt + 0.2 sqrt(xi) dW, r = xi;
// Feller condition 2 * 0.04 >= 0.2^2 holds.
inline AffineModelSpec cir_spec() {
    AffineModelSpec spec = one_factor_base();
    spec.drift_matrix(0, 0) = -0.8;
    spec.drift_intercept[0] = 0.04;
    spec.vol_loading(0, 0) = 0.2;
    spec.eigen_loadings(0, 0) = 1.0;
    spec.rate_loading_a[0] = 1.0;
    spec.consumption_loading_b = 0.015;
    spec.portfolio_loading[0] = 0.3;
    spec.xi0[0] = 0.04;
    return spec;
}

// Deterministic discounting at two percent.
inline AffineModelSpec zero_vol_spec() {
    AffineModelSpec spec = one_factor_base();
    spec.rate_loading_b = 0.02;
    return spec;
}

// Vasicek dynamics with a hedgeable risk premium and a consuming optimal agent.
inline AffineModelSpec vasicek_market_spec() {
    AffineModelSpec spec = vasicek_spec();
    spec.premium_loading_R[0] = 0.25;
    spec.portfolio_loading[0] = 0.5;
    spec.consumption_loading_b = 0.02;
    return spec;
}

// No mean reversion, constant volatility: bond volatility grows linearly in maturity.
inline AffineModelSpec driftless_gaussian_spec() {
    AffineModelSpec spec = one_factor_base();
    spec.vol_loading(0, 0) = 0.01;
    spec.eigen_intercepts[0] = 1.0;
    spec.rate_loading_a[0] = 1.0;
    spec.xi0[0] = 0.02;
    return spec;
}

// Two factors, E = {1}: a square-root admissible factor priced in the rate, plus an
// autonomous orthogonal factor. The state-price loading lives entirely on E, so the
// backward power problem is internally consistent.
inline AffineModelSpec two_factor_spec() {
    AffineModelSpec spec;
    spec.dim = 2;
    spec.drift_matrix = (Eigen::MatrixXd(2, 2) << -0.8, 0.0, 0.0, -0.3).finished();
    spec.drift_intercept = (Eigen::VectorXd(2) << 0.04, 0.03).finished();
    spec.vol_loading = (Eigen::MatrixXd(2, 2) << 0.2, 0.0, 0.0, 0.1).finished();
    spec.eigen_intercepts = Eigen::VectorXd::Zero(2);
    spec.eigen_loadings = (Eigen::MatrixXd(2, 2) << 1.0, 0.0, 0.0, 1.0).finished();
    spec.admissible_coords = {1};
    spec.rate_loading_a = (Eigen::VectorXd(2) << 1.0, 0.0).finished();
    spec.rate_loading_b = 0.005;
    spec.consumption_loading_a = Eigen::VectorXd::Zero(2);
    spec.consumption_loading_b = 0.02;
    spec.premium_loading_R = (Eigen::VectorXd(2) << 0.3, 0.0).finished();
    spec.premium_loading_perp = Eigen::VectorXd::Zero(2);
    spec.portfolio_loading = (Eigen::VectorXd(2) << 0.5, 0.0).finished();
    spec.xi0 = (Eigen::VectorXd(2) << 0.04, 0.5).finished();
    return spec;
}

// Two factors with an orthogonal state-price direction and the rate loading on both
// coordinates; per-theta overrides of the orthogonal loading make the theta-family
// bonds genuinely different.
inline AffineModelSpec mixture_base_spec() {
    AffineModelSpec spec = two_factor_spec();
    spec.premium_loading_perp = (Eigen::VectorXd(2) << 0.0, 0.2).finished();
    spec.rate_loading_a = (Eigen::VectorXd(2) << 1.0, 0.05).finished();
    return spec;
}

} // namespace ramsey::testing
