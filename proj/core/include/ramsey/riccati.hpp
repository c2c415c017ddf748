#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "ramsey/affine_model.hpp"

namespace ramsey {

/// Affine functional of the factor, q(xi) = grad . xi + intercept.
struct AffineForm {
    Eigen::VectorXd grad;
    double intercept = 0.0;

    double operator()(const Eigen::VectorXd& xi) const { return grad.dot(xi) + intercept; }

    static AffineForm zero(int dim) { return {Eigen::VectorXd::Zero(dim), 0.0}; }
};

// Coefficients of the instantaneous quadratic variation of the affine functional a . xi:
//   || a^T Theta s(xi) ||^2 = grad . xi + intercept,
// grad = sum_i (Theta_col_i . a)^2 eigen_loadings.row(i), intercept likewise with
// eigen_intercepts. Exact for every xi with nonnegative eigenvariances.
AffineForm quadratic_variation_coeffs(const AffineModelSpec& spec, const Eigen::VectorXd& a);

// Bilinear version: coefficients of (a^T Theta s(xi)) . (b^T Theta s(xi)).
AffineForm cross_variation_coeffs(const AffineModelSpec& spec, const Eigen::VectorXd& a,
                                  const Eigen::VectorXd& b);

// Drift f(a, xi) of the running affine functional a . xi + b written in exponential-
// martingale form, i.e. d(a.xi + b) = vol.dW - 1/2 ||vol||^2 dt + f dt:
//   f = (a_dot + drift_matrix^T a + 1/2 qv_grad(a)) . xi + b_dot + a . drift_intercept
//       + 1/2 qv_intercept(a).
AffineForm affine_drift_f(const AffineModelSpec& spec, const Eigen::VectorXd& a,
                          const Eigen::VectorXd& a_dot, double b_dot);

struct RiccatiConfig {
    double max_exponent_norm = 1e6; // blowup guard on ||A||_inf
};

class RiccatiBlowupError : public std::runtime_error {
public:
    RiccatiBlowupError(double time, double norm);
    double time() const { return time_; }
    double norm() const { return norm_; }

private:
    double time_;
    double norm_;
};

/// Backward solution (A(t), B(t)) of the Riccati system
///   A' + drift_matrix^T (A + S) + 1/2 qv_grad(A + S) + drift_spec.grad = 0,
///   B' + (A + S) . drift_intercept + 1/2 qv_intercept(A + S) + drift_spec.intercept = 0,
/// stored on a uniform ascending grid t0 < ... < T with (A(T), B(T)) equal to the
/// terminal condition exactly. The constant shift S (zero by default) lets callers
/// solve for exponents rebased by a fixed loading -- A + S then satisfies the plain
/// system -- without giving up the exact-zero terminal condition. Queries between
/// nodes interpolate A and B linearly.
struct RiccatiSolution {
    std::vector<double> grid;
    std::vector<Eigen::VectorXd> A;
    std::vector<double> B;
    Eigen::VectorXd terminal_a;
    double terminal_b = 0.0;
    AffineForm drift_spec;
    Eigen::VectorXd quad_shift; // S; empty means zero

    double t0() const { return grid.front(); }
    double horizon() const { return grid.back(); }
    double step() const;

    Eigen::VectorXd a_at(double t) const;
    double b_at(double t) const;

    // A(t) . xi + B(t)
    double exponent(double t, const Eigen::VectorXd& xi) const;
};

// Fixed-step RK4 integration from (terminal_a, terminal_b) at T back to t0. The grid is
// uniform with the number of steps rounded so the effective step is closest to `step`.
// Throws RiccatiBlowupError when ||A||_inf exceeds config.max_exponent_norm, which
// signals that the exponential moment does not exist on [t0, T].
RiccatiSolution solve_riccati_backward(const AffineModelSpec& spec,
                                       const Eigen::VectorXd& terminal_a, double terminal_b,
                                       const AffineForm& drift, double t0, double T,
                                       double step, const RiccatiConfig& config = {},
                                       const Eigen::VectorXd& quad_shift = Eigen::VectorXd());

// E[exp(X_T - X_t) | xi_t = xi] = exp(A(t) . xi + B(t)) for the affine process with
// terminal form (terminal_a, terminal_b) and integrated drift drift_spec.
double exp_affine_expectation(const RiccatiSolution& sol, double t, const Eigen::VectorXd& xi);

// Max absolute residual of the Riccati system evaluated at the grid midpoints, using
// finite differences of the stored trajectory. A self-check that a candidate
// (A, B, drift) triple makes exp(A.xi + B + int drift) a local martingale.
double martingale_residual(const AffineModelSpec& spec, const RiccatiSolution& sol);

// Same RK4 scheme run forward from (A(t0), B(t0)); returns the state reached at T.
// Used to check backward/forward consistency.
std::pair<Eigen::VectorXd, double> integrate_riccati_forward(const AffineModelSpec& spec,
                                                             const RiccatiSolution& sol);

// Columns: t, A_1..A_N, B. 17 significant digits.
void write_riccati_csv(const RiccatiSolution& sol, const std::string& path);

} // namespace ramsey
