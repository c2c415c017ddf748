#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ramsey/affine_model.hpp"
#include "ramsey/market.hpp"
#include "ramsey/riccati.hpp"

namespace ramsey {

/// Marginal-utility zero-coupon curve at a fixed (as_of, state): bond prices,
/// continuously compounded zero rates and bond volatility norms per tenor.
struct YieldCurve {
    double as_of = 0.0;
    std::vector<double> tenors;
    std::vector<double> bond_prices;
    std::vector<double> zero_rates;
    std::vector<double> vol_norms;
    std::string model_hash;
};

// Backward Riccati system for the T-maturity bond exponents: the underlying affine
// process has quadratic center shifted by the state-price loading a_Y and drift
//   delta_Z(xi) = -f(a_Y, xi) - r(xi),
// solved with terminal condition (0, 0) so that A(T) = 0, B(T) = 0 and B(T,T) = 1
// exactly. log B(t,T) = A(t) . xi_t + B(t).
RiccatiSolution bond_riccati(const AffineModelSpec& spec, double T, double step,
                             const RiccatiConfig& config = {});

double bond_price(const RiccatiSolution& sol, double t, const Eigen::VectorXd& xi);

// -log B(t,T) / (T - t), with T the solution horizon. Requires t < T.
double zero_rate(const RiccatiSolution& sol, double t, const Eigen::VectorXd& xi);

// Bond volatility vector Gamma_t(T) = (Theta^T A(t)) o s(xi), one component per
// Brownian coordinate. Zero at t = T.
Eigen::VectorXd bond_volatility(const AffineModelSpec& spec, const RiccatiSolution& sol, double t,
                                const Eigen::VectorXd& xi);

// Curve at time 0 in state xi0. A single backward solve to the longest tenor serves
// every tenor (the coefficient functions are time-constant, so A^T(t) depends only on
// T - t); tenors are read at grid nodes and interpolated otherwise.
YieldCurve make_yield_curve(const AffineModelSpec& spec, const std::vector<double>& tenors,
                            double step, const RiccatiConfig& config = {});

struct YieldDynamicsCheck {
    double max_discrepancy = 0.0; // rate units
    double margin = 0.0;          // nodes with T - t below this are excluded
};

// Reconstructs the zero rate R_t(T) along each simulated path from R_0(T), the rate
// integral, the stochastic integral of Gamma and the quadratic/premium corrections,
// on the same discrete grid, and compares against the direct affine evaluation.
// The bundle must carry the model's optimal state-price loading (the same one the
// bond solution was built from). Discrepancy is O(step); nodes with T - t < margin
// are skipped because the 1/(T - t) scaling amplifies the discretization error near
// maturity (margin defaults to a tenth of the horizon).
YieldDynamicsCheck yield_dynamics_check(const AffineModelSpec& spec, const PathBundle& bundle,
                                        const RiccatiSolution& bond_sol, double margin = -1.0);

enum class LongRateClass { Flat, NonDecreasing, Infinite, Inconclusive };

std::string to_string(LongRateClass c);

/// Sampled maturity profile of the bond exponents: A(tau_j) for increasing tau.
struct ExponentCurve {
    std::vector<double> tau;
    std::vector<Eigen::VectorXd> A;
};

struct LongRateResult {
    LongRateClass verdict = LongRateClass::Inconclusive;
    double vol_over_tau_limit = 0.0;  // extrapolated lim ||Gamma|| / (T - t)
    double vol2_over_tau_limit = 0.0; // extrapolated lim ||Gamma||^2 / (T - t)
    std::vector<double> tail_vol_over_tau;
    std::vector<double> tail_vol2_over_tau;
    double tolerance = 0.0;
};

// Trichotomy on the maturity growth of the bond volatility: nonzero limit of
// ||Gamma||/(T-t) -> Infinite; zero first limit with nonzero ||Gamma||^2/(T-t)
// -> NonDecreasing; both zero -> Flat. Limits are three-point polynomial
// extrapolations (Richardson in 1/(T-t)) of the tail; a tail that is non-monotone
// beyond the tolerance yields Inconclusive.
LongRateResult classify_long_rate_curve(const AffineModelSpec& spec, const Eigen::VectorXd& xi,
                                        const ExponentCurve& curve, double tolerance = 1e-4);

// Model-based classification: builds the exponent curve from a bond Riccati solve up
// to t + t_max and classifies at (t, xi).
LongRateResult long_rate_classify(const AffineModelSpec& spec, double t, const Eigen::VectorXd& xi,
                                  double t_max = 200.0, double step = 1e-2,
                                  double tolerance = 1e-4, int n_tail = 3);

// Columns: tenor, bond_price, zero_rate, vol_norm. 17 significant digits.
void write_curve_csv(const YieldCurve& curve, const std::string& path);

} // namespace ramsey
