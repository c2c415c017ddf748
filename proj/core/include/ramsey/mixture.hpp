#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ramsey/affine_model.hpp"
#include "ramsey/market.hpp"
#include "ramsey/yield_curve.hpp"

namespace ramsey {

// Gauss-Legendre nodes and weights on (a, b).
struct Quadrature {
    std::vector<double> nodes;
    std::vector<double> weights;
};
Quadrature gauss_legendre(int n, double a, double b);

/// Strictly decreasing density on (0, inf) used to weight the risk-aversion mixture;
/// exponential with unit default rate.
struct ExponentialDensity {
    double rate = 1.0;
    double pdf(double u) const;
    double cdf(double u) const;
};

/// Mixture of power-utility agents over a risk-aversion grid theta_k in (0,1).
/// Per-theta market loadings default to the 1/theta portfolio scaling with a shared
/// orthogonal component; both are overridable node by node.
struct MixtureSpec {
    std::vector<double> theta_nodes;
    std::vector<double> quadrature_weights;
    double theta_lo = 0.0; // integration range of the quadrature rule
    double theta_hi = 0.0;
    ExponentialDensity density_f; // wealth-side weights f(theta/x)
    ExponentialDensity density_g; // state-price-side weights g(theta/y)
    std::vector<Eigen::VectorXd> portfolio_loading_theta;
    std::vector<Eigen::VectorXd> premium_perp_theta;
    AffineModelSpec base_spec;

    int n_nodes() const { return static_cast<int>(theta_nodes.size()); }

    // Base spec with the loadings of node k substituted.
    AffineModelSpec theta_spec(int k) const;
    MarketLoadings theta_loadings(int k) const;
};

// Gauss-Legendre theta grid on (theta_min, theta_max) with the default per-theta
// family: portfolio = base portfolio / theta, orthogonal premium shared.
MixtureSpec make_mixture_spec(const AffineModelSpec& base, int n_nodes = 16,
                              double theta_min = 0.05, double theta_max = 0.95,
                              double rate_f = 1.0, double rate_g = 1.0);

ValidationReport validate_mixture(const MixtureSpec& mix);

// Truncation-corrected mixture weights: f(theta/x) scaled so that the quadrature of
// the weights over the theta range reproduces x exactly in the continuum limit.
// Positive, and strictly increasing in x for fixed theta.
double weight_x(const MixtureSpec& mix, double theta, double x);
double weight_y(const MixtureSpec& mix, double theta, double y);

/// Per-theta bundles simulated under one shared noise tensor (identical seed and
/// grid), so cross-theta aggregates are pathwise meaningful.
struct MixtureBundle {
    std::vector<PathBundle> per_theta;

    std::int64_t n_paths() const { return per_theta.front().n_paths; }
    std::int64_t n_nodes() const { return per_theta.front().n_nodes(); }
    const std::vector<double>& grid() const { return per_theta.front().grid; }
};

MixtureBundle simulate_mixture(const MixtureSpec& mix, const SimConfig& sim);

/// Mixture aggregates on one path at one grid node.
struct BarState {
    double x_bar = 0.0;         // sum_k w_k f(theta_k/x) X_t^theta_k
    double y_bar = 0.0;         // sum_k w_k g(theta_k/y) Y_t^theta_k
    double consumption_bar = 0.0; // sum_k w_k f(theta_k/x) zeta_t^theta_k X_t^theta_k
};
BarState bar_processes(const MixtureSpec& mix, const MixtureBundle& bundle, std::int64_t path,
                       std::int64_t node, double x, double y);

// Wealth-dependent bond price: the g-weighted, Y-weighted convex combination of the
// per-theta bond prices. Bounded by their min and max for every y.
double mixture_bond_price(const MixtureSpec& mix, double y, std::span<const double> y_theta,
                          std::span<const double> bond_theta);

// At t = 0 every Y_0^theta = 1 and the weights reduce to w_k g(theta_k / y).
double mixture_bond_price_at0(const MixtureSpec& mix, double y,
                              std::span<const double> bond_theta);

// Per-theta bond prices B^theta(0, T) for each tenor (one Riccati solve per theta
// node), as a matrix [theta_k][tenor_j].
std::vector<std::vector<double>> per_theta_bond_prices(const MixtureSpec& mix,
                                                       const std::vector<double>& tenors,
                                                       double step,
                                                       const RiccatiConfig& config = {});

// Curve at t = 0 for the given initial condition y.
YieldCurve mixture_yield_curve(const MixtureSpec& mix, double y, const std::vector<double>& tenors,
                               double step, const RiccatiConfig& config = {});

// Same, reusing per-theta prices already computed for these tenors (one solve serves
// a whole y-sweep).
YieldCurve mixture_yield_curve(const MixtureSpec& mix, double y, const std::vector<double>& tenors,
                               const std::vector<std::vector<double>>& per_theta);

// Inverse of the strictly increasing map x -> X_bar_t(x) on one path, by bisection to
// relative tolerance 1e-10. Throws std::runtime_error with the achieved bracket when z
// is outside the numerically reachable range.
double invert_bar_x(const MixtureSpec& mix, const MixtureBundle& bundle, std::int64_t path,
                    std::int64_t node, double z);

/// Deterministic initial utility with explicit marginal: power u'(x) = x^(-theta0) or
/// log u'(x) = 1/x.
struct BaseUtility {
    enum class Kind { Power, Log };
    Kind kind = Kind::Power;
    double theta0 = 0.5;

    double marginal(double x) const;
};

// Marginal utility of the reconstructed progressive utility,
//   U_x(t, x) = Y_bar_t(u'(XBarInverse_t(x))),
// evaluated on one path. Decreasing in x; equals u'(x) at t = 0.
double reconstruct_marginal_utility(const MixtureSpec& mix, const MixtureBundle& bundle,
                                    std::int64_t path, std::int64_t node, double x,
                                    const BaseUtility& base_u);

// y-sweep CSV: columns y, tenor, bond_price, zero_rate.
void write_ysweep_csv(const MixtureSpec& mix, const std::vector<double>& ys,
                      const std::vector<double>& tenors,
                      const std::vector<YieldCurve>& curves, const std::string& path);

// Per-theta diagnostic CSV for one (t, y): columns theta, weight_at_y, y_theta, bond_theta.
void write_theta_diagnostics_csv(const MixtureSpec& mix, double y,
                                 std::span<const double> y_theta,
                                 std::span<const double> bond_theta, const std::string& path);

} // namespace ramsey
