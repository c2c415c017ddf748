#include "ramsey/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace ramsey {

AffineForm quadratic_variation_coeffs(const AffineModelSpec& spec, const Eigen::VectorXd& a) {
    return cross_variation_coeffs(spec, a, a);
}

AffineForm cross_variation_coeffs(const AffineModelSpec& spec, const Eigen::VectorXd& a,
                                  const Eigen::VectorXd& b) {
    const Eigen::VectorXd wa = spec.vol_loading.transpose() * a;
    const Eigen::VectorXd wb = spec.vol_loading.transpose() * b;
    AffineForm out = AffineForm::zero(spec.dim);
    for (int i = 0; i < spec.dim; ++i) {
        const double c = wa[i] * wb[i];
        out.grad += c * spec.eigen_loadings.row(i).transpose();
        out.intercept += c * spec.eigen_intercepts[i];
    }
    return out;
}

AffineForm affine_drift_f(const AffineModelSpec& spec, const Eigen::VectorXd& a,
                          const Eigen::VectorXd& a_dot, double b_dot) {
    const AffineForm q = quadratic_variation_coeffs(spec, a);
    AffineForm f;
    f.grad = a_dot + spec.drift_matrix.transpose() * a + 0.5 * q.grad;
    f.intercept = b_dot + a.dot(spec.drift_intercept) + 0.5 * q.intercept;
    return f;
}

RiccatiBlowupError::RiccatiBlowupError(double time, double norm)
    : std::runtime_error("Riccati exponent blowup at t = " + std::to_string(time) +
                         " (||A|| = " + std::to_string(norm) +
                         "): the exponential moment does not exist on this horizon"),
      time_(time),
      norm_(norm) {}

double RiccatiSolution::step() const {
    return grid.size() > 1 ? grid[1] - grid[0] : 0.0;
}

namespace {

// Node index and interpolation weight for a query time.
std::pair<std::size_t, double> locate(const std::vector<double>& grid, double t) {
    const double t0 = grid.front();
    const double t1 = grid.back();
    if (t < t0 - 1e-12 || t > t1 + 1e-12)
        throw std::invalid_argument("time " + std::to_string(t) + " outside solution grid [" +
                                    std::to_string(t0) + ", " + std::to_string(t1) + "]");
    const double h = grid.size() > 1 ? grid[1] - grid[0] : 1.0;
    double pos = (t - t0) / h;
    pos = std::clamp(pos, 0.0, static_cast<double>(grid.size() - 1));
    auto k = static_cast<std::size_t>(pos);
    if (k >= grid.size() - 1) return {grid.size() - 1, 0.0};
    return {k, pos - static_cast<double>(k)};
}

struct RiccatiRhs {
    const AffineModelSpec& spec;
    const AffineForm& drift;
    Eigen::VectorXd shift;

    void eval(const Eigen::VectorXd& a, Eigen::VectorXd& a_dot, double& b_dot) const {
        const Eigen::VectorXd total = shift.size() ? (a + shift).eval() : a;
        const AffineForm q = cross_variation_coeffs(spec, total, total);
        a_dot = -(spec.drift_matrix.transpose() * total) - 0.5 * q.grad - drift.grad;
        b_dot = -total.dot(spec.drift_intercept) - 0.5 * q.intercept - drift.intercept;
    }
};

// One classical RK4 step of size h (h < 0 integrates backward).
void rk4_step(const RiccatiRhs& rhs, Eigen::VectorXd& a, double& b, double h) {
    Eigen::VectorXd k1a(a.size()), k2a(a.size()), k3a(a.size()), k4a(a.size());
    double k1b, k2b, k3b, k4b;
    rhs.eval(a, k1a, k1b);
    rhs.eval(a + 0.5 * h * k1a, k2a, k2b);
    rhs.eval(a + 0.5 * h * k2a, k3a, k3b);
    rhs.eval(a + h * k3a, k4a, k4b);
    a += (h / 6.0) * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
    b += (h / 6.0) * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
}

} // namespace

Eigen::VectorXd RiccatiSolution::a_at(double t) const {
    const auto [k, w] = locate(grid, t);
    if (w == 0.0) return A[k];
    return (1.0 - w) * A[k] + w * A[k + 1];
}

double RiccatiSolution::b_at(double t) const {
    const auto [k, w] = locate(grid, t);
    if (w == 0.0) return B[k];
    return (1.0 - w) * B[k] + w * B[k + 1];
}

double RiccatiSolution::exponent(double t, const Eigen::VectorXd& xi) const {
    return a_at(t).dot(xi) + b_at(t);
}

RiccatiSolution solve_riccati_backward(const AffineModelSpec& spec,
                                       const Eigen::VectorXd& terminal_a, double terminal_b,
                                       const AffineForm& drift, double t0, double T, double step,
                                       const RiccatiConfig& config,
                                       const Eigen::VectorXd& quad_shift) {
    require_valid(spec);
    if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
    if (!(T > t0)) throw std::invalid_argument("requires T > t0");
    if (step > T - t0 + 1e-12) throw std::invalid_argument("step exceeds the interval length");

    const auto n_steps = std::max<std::int64_t>(1, std::llround((T - t0) / step));
    const double h = (T - t0) / static_cast<double>(n_steps);

    RiccatiSolution sol;
    sol.terminal_a = terminal_a;
    sol.terminal_b = terminal_b;
    sol.drift_spec = drift;
    sol.quad_shift = quad_shift;
    sol.grid.resize(static_cast<std::size_t>(n_steps) + 1);
    sol.A.resize(sol.grid.size());
    sol.B.resize(sol.grid.size());
    for (std::int64_t k = 0; k <= n_steps; ++k)
        sol.grid[static_cast<std::size_t>(k)] = t0 + h * static_cast<double>(k);
    sol.grid.back() = T;

    const RiccatiRhs rhs{spec, drift,
                         quad_shift.size() ? quad_shift : Eigen::VectorXd::Zero(spec.dim).eval()};

    Eigen::VectorXd a = terminal_a;
    double b = terminal_b;
    sol.A.back() = a;
    sol.B.back() = b;
    for (std::int64_t k = n_steps - 1; k >= 0; --k) {
        rk4_step(rhs, a, b, -h);
        const double norm = a.lpNorm<Eigen::Infinity>();
        if (!(norm <= config.max_exponent_norm) || !std::isfinite(b))
            throw RiccatiBlowupError(sol.grid[static_cast<std::size_t>(k)], norm);
        sol.A[static_cast<std::size_t>(k)] = a;
        sol.B[static_cast<std::size_t>(k)] = b;
    }
    return sol;
}

double exp_affine_expectation(const RiccatiSolution& sol, double t, const Eigen::VectorXd& xi) {
    return std::exp(sol.exponent(t, xi));
}

double martingale_residual(const AffineModelSpec& spec, const RiccatiSolution& sol) {
    if (sol.grid.size() < 2) return 0.0;
    const RiccatiRhs rhs{spec, sol.drift_spec,
                         sol.quad_shift.size() ? sol.quad_shift
                                               : Eigen::VectorXd::Zero(spec.dim).eval()};
    double worst = 0.0;
    Eigen::VectorXd a_dot(spec.dim);
    double b_dot = 0.0;
    for (std::size_t k = 0; k + 1 < sol.grid.size(); ++k) {
        const double h = sol.grid[k + 1] - sol.grid[k];
        const Eigen::VectorXd mid = 0.5 * (sol.A[k] + sol.A[k + 1]);
        rhs.eval(mid, a_dot, b_dot);
        // rhs gives the exact derivative demanded by the system; compare against the
        // finite-difference slope of the stored trajectory.
        const Eigen::VectorXd slope_a = (sol.A[k + 1] - sol.A[k]) / h;
        const double slope_b = (sol.B[k + 1] - sol.B[k]) / h;
        worst = std::max(worst, (slope_a - a_dot).lpNorm<Eigen::Infinity>());
        worst = std::max(worst, std::abs(slope_b - b_dot));
    }
    return worst;
}

std::pair<Eigen::VectorXd, double> integrate_riccati_forward(const AffineModelSpec& spec,
                                                             const RiccatiSolution& sol) {
    const RiccatiRhs rhs{spec, sol.drift_spec,
                         sol.quad_shift.size() ? sol.quad_shift
                                               : Eigen::VectorXd::Zero(spec.dim).eval()};
    Eigen::VectorXd a = sol.A.front();
    double b = sol.B.front();
    for (std::size_t k = 0; k + 1 < sol.grid.size(); ++k) {
        rk4_step(rhs, a, b, sol.grid[k + 1] - sol.grid[k]);
    }
    return {a, b};
}

void write_riccati_csv(const RiccatiSolution& sol, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("Failed to open: " + path);
    out << "t";
    for (int i = 0; i < sol.terminal_a.size(); ++i) out << ",A_" << (i + 1);
    out << ",B\n";
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << buf;
    };
    for (std::size_t k = 0; k < sol.grid.size(); ++k) {
        put(sol.grid[k]);
        for (int i = 0; i < sol.A[k].size(); ++i) {
            out << ",";
            put(sol.A[k][i]);
        }
        out << ",";
        put(sol.B[k]);
        out << "\n";
    }
}

} // namespace ramsey
