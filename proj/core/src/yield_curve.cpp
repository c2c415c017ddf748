#include "ramsey/yield_curve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace ramsey {

RiccatiSolution bond_riccati(const AffineModelSpec& spec, double T, double step,
                             const RiccatiConfig& config) {
    require_valid(spec);
    if (!(T > 0.0)) throw std::invalid_argument("maturity must be positive");
    const Eigen::VectorXd a_y = spec.state_price_loading();
    const AffineForm f_y = affine_drift_f(spec, a_y, Eigen::VectorXd::Zero(spec.dim), 0.0);
    AffineForm drift;
    drift.grad = -f_y.grad - spec.rate_loading_a;
    drift.intercept = -f_y.intercept - spec.rate_loading_b;
    return solve_riccati_backward(spec, Eigen::VectorXd::Zero(spec.dim), 0.0, drift, 0.0, T, step,
                                  config, a_y);
}

double bond_price(const RiccatiSolution& sol, double t, const Eigen::VectorXd& xi) {
    return std::exp(sol.exponent(t, xi));
}

double zero_rate(const RiccatiSolution& sol, double t, const Eigen::VectorXd& xi) {
    const double T = sol.horizon();
    if (!(t < T)) throw std::invalid_argument("zero rate needs t < maturity");
    return -sol.exponent(t, xi) / (T - t);
}

Eigen::VectorXd bond_volatility(const AffineModelSpec& spec, const RiccatiSolution& sol, double t,
                                const Eigen::VectorXd& xi) {
    const Eigen::VectorXd w = spec.vol_loading.transpose() * sol.a_at(t);
    const auto ev = eigen_variances(spec, xi);
    return w.cwiseProduct(ev.lambda.cwiseSqrt());
}

YieldCurve make_yield_curve(const AffineModelSpec& spec, const std::vector<double>& tenors,
                            double step, const RiccatiConfig& config) {
    if (tenors.empty()) throw std::invalid_argument("no tenors given");
    for (std::size_t j = 0; j < tenors.size(); ++j) {
        if (!(tenors[j] > 0.0)) throw std::invalid_argument("tenors must be positive");
        if (j > 0 && tenors[j] <= tenors[j - 1])
            throw std::invalid_argument("tenors must be strictly increasing");
    }
    const double t_max = tenors.back();
    const RiccatiSolution sol = bond_riccati(spec, t_max, step, config);

    YieldCurve curve;
    curve.as_of = 0.0;
    curve.tenors = tenors;
    curve.model_hash = spec_content_hash(spec);
    for (double T : tenors) {
        // With time-constant coefficients A^T(0) equals A^{t_max}(t_max - T).
        const double t = t_max - T;
        const double price = std::exp(sol.exponent(t, spec.xi0));
        curve.bond_prices.push_back(price);
        // rate from the price, so mixture curves built from these prices agree bitwise
        curve.zero_rates.push_back(-std::log(price) / T);
        curve.vol_norms.push_back(bond_volatility(spec, sol, t, spec.xi0).norm());
    }
    return curve;
}

YieldDynamicsCheck yield_dynamics_check(const AffineModelSpec& spec, const PathBundle& bundle,
                                        const RiccatiSolution& bond_sol, double margin) {
    require_valid(spec);
    const double T = bond_sol.horizon();
    if (margin < 0.0) margin = 0.1 * T;
    const int n = bundle.n_factors;
    const std::int64_t n_nodes = bundle.n_nodes();
    const std::int64_t n_steps = n_nodes - 1;
    const double dt = bundle.grid[1];
    if (bundle.grid.back() > T + 1e-9)
        throw std::invalid_argument("bundle horizon exceeds the bond maturity");

    // Per-node exponent tables and vol loadings, shared across paths.
    std::vector<Eigen::VectorXd> w_a(static_cast<std::size_t>(n_nodes));
    std::vector<Eigen::VectorXd> a_nodes(static_cast<std::size_t>(n_nodes));
    std::vector<double> b_nodes(static_cast<std::size_t>(n_nodes));
    for (std::int64_t k = 0; k < n_nodes; ++k) {
        const double t = bundle.grid[static_cast<std::size_t>(k)];
        a_nodes[static_cast<std::size_t>(k)] = bond_sol.a_at(t);
        b_nodes[static_cast<std::size_t>(k)] = bond_sol.b_at(t);
        w_a[static_cast<std::size_t>(k)] =
            spec.vol_loading.transpose() * a_nodes[static_cast<std::size_t>(k)];
    }
    const Eigen::VectorXd w_y = spec.vol_loading.transpose() * bundle.loadings.state_price;

    const double r0_rate = -bond_sol.exponent(0.0, bundle.factor_vec(0, 0)) / T;

    YieldDynamicsCheck res;
    res.margin = margin;
    Eigen::VectorXd s(n);
    for (std::int64_t p = 0; p < bundle.n_paths; ++p) {
        double acc_dw = 0.0;   // int Gamma . dW
        double acc_q = 0.0;    // int ||Gamma||^2 ds
        double acc_prem = 0.0; // int Gamma . (nu - eta_R) ds
        for (std::int64_t k = 0; k < n_nodes; ++k) {
            const double t = bundle.grid[static_cast<std::size_t>(k)];
            if (k > 0) {
                // accumulate over the step [t_{k-1}, t_k] with left-endpoint values
                const auto& w = w_a[static_cast<std::size_t>(k - 1)];
                const Eigen::VectorXd xi_prev = bundle.factor_vec(p, k - 1);
                const auto ev = eigen_variances(spec, xi_prev);
                s = ev.lambda.cwiseSqrt();
                double g_dw = 0.0, g2 = 0.0, g_prem = 0.0;
                const double* dw = bundle.dw.data() + (p * n_steps + (k - 1)) * n;
                for (int i = 0; i < n; ++i) {
                    const double gi = w[i] * s[i];
                    g_dw += gi * dw[i];
                    g2 += gi * gi;
                    g_prem += gi * (w_y[i] * s[i]);
                }
                acc_dw += g_dw;
                acc_q += g2 * dt;
                acc_prem += g_prem * dt;
            }
            if (T - t < margin) break;
            const auto row = static_cast<std::size_t>(bundle.idx(p, k));
            const double direct =
                -(a_nodes[static_cast<std::size_t>(k)].dot(bundle.factor_vec(p, k)) +
                  b_nodes[static_cast<std::size_t>(k)]) /
                (T - t);
            const double reconstructed = (T * r0_rate - bundle.integrated_rate[row] - acc_dw +
                                          0.5 * acc_q + acc_prem) /
                                         (T - t);
            res.max_discrepancy =
                std::max(res.max_discrepancy, std::abs(reconstructed - direct));
        }
    }
    return res;
}

std::string to_string(LongRateClass c) {
    switch (c) {
        case LongRateClass::Flat: return "Flat";
        case LongRateClass::NonDecreasing: return "NonDecreasing";
        case LongRateClass::Infinite: return "Infinite";
        case LongRateClass::Inconclusive: return "Inconclusive";
    }
    return "Inconclusive";
}

namespace {

// Polynomial extrapolation to h = 0 through the last three (h, f) samples.
double extrapolate_to_zero(const std::vector<double>& h, const std::vector<double>& f) {
    const std::size_t n = h.size();
    const double h0 = h[n - 3], h1 = h[n - 2], h2 = h[n - 1];
    const double f0 = f[n - 3], f1 = f[n - 2], f2 = f[n - 1];
    const double l0 = (h1 * h2) / ((h0 - h1) * (h0 - h2));
    const double l1 = (h0 * h2) / ((h1 - h0) * (h1 - h2));
    const double l2 = (h0 * h1) / ((h2 - h0) * (h2 - h1));
    return f0 * l0 + f1 * l1 + f2 * l2;
}

bool tail_non_monotone(const std::vector<double>& f, double tol) {
    const std::size_t n = f.size();
    const double d1 = f[n - 2] - f[n - 3];
    const double d2 = f[n - 1] - f[n - 2];
    return d1 * d2 < 0.0 && std::min(std::abs(d1), std::abs(d2)) > tol;
}

} // namespace

LongRateResult classify_long_rate_curve(const AffineModelSpec& spec, const Eigen::VectorXd& xi,
                                        const ExponentCurve& curve, double tolerance) {
    if (curve.tau.size() < 3) throw std::invalid_argument("need at least three maturity samples");
    const auto ev = eigen_variances(spec, xi);
    const Eigen::VectorXd s = ev.lambda.cwiseSqrt();

    LongRateResult res;
    res.tolerance = tolerance;
    std::vector<double> h, g1, g2;
    for (std::size_t j = 0; j < curve.tau.size(); ++j) {
        const Eigen::VectorXd gamma =
            (spec.vol_loading.transpose() * curve.A[j]).cwiseProduct(s);
        const double norm = gamma.norm();
        h.push_back(1.0 / curve.tau[j]);
        g1.push_back(norm / curve.tau[j]);
        g2.push_back(norm * norm / curve.tau[j]);
    }
    res.tail_vol_over_tau.assign(g1.end() - 3, g1.end());
    res.tail_vol2_over_tau.assign(g2.end() - 3, g2.end());
    res.vol_over_tau_limit = extrapolate_to_zero(h, g1);
    res.vol2_over_tau_limit = extrapolate_to_zero(h, g2);

    if (tail_non_monotone(g1, tolerance)) {
        res.verdict = LongRateClass::Inconclusive;
        return res;
    }
    if (std::abs(res.vol_over_tau_limit) > tolerance) {
        res.verdict = LongRateClass::Infinite;
        return res;
    }
    if (tail_non_monotone(g2, tolerance)) {
        res.verdict = LongRateClass::Inconclusive;
        return res;
    }
    res.verdict = std::abs(res.vol2_over_tau_limit) > tolerance ? LongRateClass::NonDecreasing
                                                                : LongRateClass::Flat;
    return res;
}

LongRateResult long_rate_classify(const AffineModelSpec& spec, double t, const Eigen::VectorXd& xi,
                                  double t_max, double step, double tolerance, int n_tail) {
    (void)t; // coefficients are time-constant, so only tau = T - t matters
    if (n_tail < 3) throw std::invalid_argument("need at least three tail points");
    const RiccatiSolution sol = bond_riccati(spec, t_max, step);
    ExponentCurve curve;
    // geometric maturity grid ending at t_max
    double tau = t_max;
    std::vector<double> taus;
    for (int j = 0; j < std::max(n_tail, 8); ++j) {
        taus.push_back(tau);
        tau *= 0.5;
    }
    std::sort(taus.begin(), taus.end());
    for (double tj : taus) {
        curve.tau.push_back(tj);
        curve.A.push_back(sol.a_at(t_max - tj));
    }
    return classify_long_rate_curve(spec, xi, curve, tolerance);
}

void write_curve_csv(const YieldCurve& curve, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("Failed to open: " + path);
    out << "tenor,bond_price,zero_rate,vol_norm\n";
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << buf;
    };
    for (std::size_t j = 0; j < curve.tenors.size(); ++j) {
        put(curve.tenors[j]);
        out << ",";
        put(curve.bond_prices[j]);
        out << ",";
        put(curve.zero_rates[j]);
        out << ",";
        put(curve.vol_norms[j]);
        out << "\n";
    }
}

} // namespace ramsey
