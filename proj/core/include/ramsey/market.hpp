#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ramsey/affine_model.hpp"
#include "ramsey/mc.hpp"
#include "ramsey/riccati.hpp"

namespace ramsey {

/// Volatility loadings used by the market simulation. Defaults come from the model
/// spec (optimal state price and optimal portfolio); tests may substitute arbitrary
/// admissible pairs.
struct MarketLoadings {
    Eigen::VectorXd state_price; // combined loading: premium_perp - premium_R
    Eigen::VectorXd portfolio;   // supported on E

    static MarketLoadings from_spec(const AffineModelSpec& spec);
};

/// Jointly simulated factor / state-price / wealth / consumption trajectories under
/// shared noise. Positive processes are stored in log space, so positivity holds on
/// every path and linearity in the initial condition is exact. Layouts follow
/// FactorPaths: scalars are [p * n_nodes + k], factors [(p * n_nodes + k) * N + i].
struct PathBundle {
    std::vector<double> grid;
    std::int64_t n_paths = 0;
    int n_factors = 0;
    std::uint64_t seed = 0;
    std::vector<double> factors;
    std::vector<double> dw; // [(p * n_steps + k) * N + i]
    std::vector<double> log_state_price;
    std::vector<double> log_wealth; // empty until the wealth pass has run
    std::vector<double> consumption_rate;        // zeta_t * X_t
    std::vector<double> integrated_rate;         // int_0^t r ds (left-endpoint rule)
    std::vector<double> integrated_consumption;  // int_0^t zeta ds
    std::int64_t clip_events = 0;
    MarketLoadings loadings;

    std::int64_t n_nodes() const { return static_cast<std::int64_t>(grid.size()); }
    std::int64_t idx(std::int64_t p, std::int64_t k) const { return p * n_nodes() + k; }
    double factor(std::int64_t p, std::int64_t k, int i) const {
        return factors[(p * n_nodes() + k) * n_factors + i];
    }
    Eigen::VectorXd factor_vec(std::int64_t p, std::int64_t k) const;
    bool has_wealth() const { return !log_wealth.empty(); }
};

// Euler-Maruyama in log space, jointly with the factors under shared noise:
//   d log Y = -r dt - 1/2 ||a_Y^T Theta s(xi)||^2 dt + (a_Y^T Theta s(xi)) . dW, Y_0 = 1.
// Wealth fields are left empty; simulate_optimal_wealth fills them from the stored
// noise. Eigenvariance clip counts accumulate in the bundle diagnostics.
PathBundle simulate_state_price(const AffineModelSpec& spec, const SimConfig& sim,
                                const std::optional<MarketLoadings>& loadings = std::nullopt);

// Second pass over the stored factor/noise paths:
//   d log X = (r + kappa . eta_R - zeta - 1/2 ||kappa||^2) dt + kappa . dW, X_0 = 1,
// with kappa = a_X^T Theta s(xi) and eta_R = a_YR^T Theta s(xi). Also fills the
// consumption rate zeta_t X_t.
void simulate_optimal_wealth(const AffineModelSpec& spec, PathBundle& bundle);

// Both passes in one call.
PathBundle simulate_market(const AffineModelSpec& spec, const SimConfig& sim,
                           const std::optional<MarketLoadings>& loadings = std::nullopt);

/// Pathwise scaling of the linear optimal processes: X_t(x) = x X_t(1),
/// Y_t(y) = y Y_t(1), C_t(x) = zeta_t x X_t(1), under the bundle's shared noise.
struct OptimalTriplet {
    std::vector<double> wealth;      // [p * n_nodes + k]
    std::vector<double> state_price;
    std::vector<double> consumption;
};
OptimalTriplet power_optimal_triplet(const PathBundle& bundle, double x, double y);

// exp(+int zeta) X Y sampled at the given times; a martingale for admissible
// (kappa, nu) pairs, used by the drift tests.
SampledPaths compensated_wealth_paths(const PathBundle& bundle, const std::vector<double>& times);

// Additive form Y X + int Y zeta X ds sampled at the given times.
SampledPaths additive_compensated_paths(const PathBundle& bundle, const std::vector<double>& times);

// Generic sampler for a single bundle component (log fields are exponentiated).
enum class BundleComponent { StatePrice, Wealth, Consumption };
SampledPaths sample_bundle(const PathBundle& bundle, BundleComponent what,
                           const std::vector<double>& times);

// Streaming variants for large path counts: nothing is materialized beyond the
// sampled values.
SampledPaths simulate_compensated_product(const AffineModelSpec& spec, const SimConfig& sim,
                                          const std::vector<double>& times,
                                          const std::optional<MarketLoadings>& loadings = std::nullopt);

// Rate-compensated state price exp(int r + log Y) sampled at the given times -- an
// exponential martingale -- optionally mis-compensated by a constant drift bias
// (value times exp(bias * t)); used to verify the drift test detects injected
// violations.
SampledPaths simulate_state_price_samples(const AffineModelSpec& spec, const SimConfig& sim,
                                          const std::vector<double>& times,
                                          double drift_bias = 0.0);

/// Backward power-utility terminal constraint, propagated by a Riccati solve:
/// exp(A_theta(t) . xi + B_theta(t))
///   = E[(S_TH / S_t) (Y_TH / Y_t)^(1 - 1/theta) | F_t],  S_t = exp(int_0^t zeta ds),
/// with A_theta(TH) = 0, B_theta(TH) = 0.
struct PowerConstraintSolution {
    double theta = 0.0;
    double horizon = 0.0;
    RiccatiSolution riccati;
};

// theta must lie in (0, 1); the exponent 1 - 1/theta is negative and the solve can
// blow up (moment nonexistence), reported via RiccatiBlowupError.
PowerConstraintSolution solve_backward_power_constraint(const AffineModelSpec& spec, double theta,
                                                        double horizon, double step,
                                                        const RiccatiConfig& config = {});

// Pathwise backward wealth X_t = Y_t^(-1/theta) exp(A_theta(t) . xi_t + B_theta(t));
// at the horizon X = Y^(-1/theta) exactly.
std::vector<double> propagate_backward_wealth(const PowerConstraintSolution& sol,
                                              const PathBundle& bundle);

// Simulates the backward-optimal wealth through the wealth SDE, using the implied
// time-varying portfolio loading A_theta(t) - (1/theta) a_Y, and returns the sup over
// paths and grid nodes of |X_t Y_t^(1/theta) exp(-A_theta(t) . xi - B_theta(t)) - 1|.
// O(step) when the model is backward-consistent.
double backward_constraint_sup_error(const AffineModelSpec& spec,
                                     const PowerConstraintSolution& sol, const SimConfig& sim);

// Max over grid nodes of || (A_theta(t))_perp - (1/theta) (a_Y)_perp ||_inf.
double orthogonal_identity_residual(const AffineModelSpec& spec,
                                    const PowerConstraintSolution& sol);

struct PowerConstraintCheck {
    Estimate estimate;          // MC estimate of E[S_TH Y_TH^(1 - 1/theta)]
    double riccati_value = 0.0; // exp(A_theta(0) . xi0 + B_theta(0))
    bool within_3se = false;
    bool heavy_tail_warning = false; // std_error / mean above 10%: raise n_paths
};

// Independent Monte Carlo check of the propagated constraint at t = 0.
PowerConstraintCheck mc_power_constraint_check(const AffineModelSpec& spec, const SimConfig& sim,
                                               double theta, double horizon, double riccati_step);

// Summary statistics per grid node (mean and dispersion across paths).
void write_bundle_summary_csv(const PathBundle& bundle, const std::string& path);

// Full per-path dump in columnar text form; intended for debugging, off by default.
void write_bundle_paths_csv(const PathBundle& bundle, const std::string& path);

} // namespace ramsey
