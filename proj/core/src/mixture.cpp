#include "ramsey/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace ramsey {

Quadrature gauss_legendre(int n, double a, double b) {
    if (n < 1) throw std::invalid_argument("quadrature needs at least one node");
    if (!(b > a)) throw std::invalid_argument("requires b > a");
    Quadrature q;
    q.nodes.resize(static_cast<std::size_t>(n));
    q.weights.resize(static_cast<std::size_t>(n));
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Newton iteration from the Chebyshev-like first guess.
        double x = std::cos(M_PI * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        q.nodes[static_cast<std::size_t>(i)] = mid - half * x;
        q.nodes[static_cast<std::size_t>(n - 1 - i)] = mid + half * x;
        q.weights[static_cast<std::size_t>(i)] = half * w;
        q.weights[static_cast<std::size_t>(n - 1 - i)] = half * w;
    }
    return q;
}

double ExponentialDensity::pdf(double u) const { return u < 0.0 ? 0.0 : rate * std::exp(-rate * u); }

double ExponentialDensity::cdf(double u) const { return u < 0.0 ? 0.0 : 1.0 - std::exp(-rate * u); }

AffineModelSpec MixtureSpec::theta_spec(int k) const {
    AffineModelSpec spec = base_spec;
    spec.portfolio_loading = portfolio_loading_theta[static_cast<std::size_t>(k)];
    spec.premium_loading_perp = premium_perp_theta[static_cast<std::size_t>(k)];
    return spec;
}

MarketLoadings MixtureSpec::theta_loadings(int k) const {
    return {premium_perp_theta[static_cast<std::size_t>(k)] - base_spec.premium_loading_R,
            portfolio_loading_theta[static_cast<std::size_t>(k)]};
}

MixtureSpec make_mixture_spec(const AffineModelSpec& base, int n_nodes, double theta_min,
                              double theta_max, double rate_f, double rate_g) {
    if (!(theta_min > 0.0 && theta_max < 1.0 && theta_min < theta_max))
        throw std::invalid_argument("theta range must satisfy 0 < theta_min < theta_max < 1");
    MixtureSpec mix;
    mix.base_spec = base;
    mix.theta_lo = theta_min;
    mix.theta_hi = theta_max;
    const Quadrature q = gauss_legendre(n_nodes, theta_min, theta_max);
    mix.theta_nodes = q.nodes;
    mix.quadrature_weights = q.weights;
    mix.density_f.rate = rate_f;
    mix.density_g.rate = rate_g;
    for (double theta : mix.theta_nodes) {
        mix.portfolio_loading_theta.push_back(base.portfolio_loading / theta);
        mix.premium_perp_theta.push_back(base.premium_loading_perp);
    }
    return mix;
}

ValidationReport validate_mixture(const MixtureSpec& mix) {
    ValidationReport report = validate_spec(mix.base_spec);
    auto fail = [&](const std::string& inv, const std::string& detail) {
        report.issues.push_back({inv, detail});
    };
    const auto n = mix.theta_nodes.size();
    if (n == 0) {
        fail("theta_nodes", "empty risk-aversion grid");
        return report;
    }
    if (mix.quadrature_weights.size() != n ||
        mix.portfolio_loading_theta.size() != n || mix.premium_perp_theta.size() != n)
        fail("shape", "per-theta arrays must match the node count");
    for (std::size_t k = 0; k < n; ++k) {
        const double theta = mix.theta_nodes[k];
        if (!(theta > 0.0 && theta < 1.0))
            fail("theta_nodes", "node " + std::to_string(k + 1) + " outside (0, 1)");
        if (k > 0 && theta <= mix.theta_nodes[k - 1])
            fail("theta_nodes", "nodes must be strictly increasing");
        if (k < mix.quadrature_weights.size() && !(mix.quadrature_weights[k] > 0.0))
            fail("quadrature_weights", "weight " + std::to_string(k + 1) + " not positive");
    }
    if (!(mix.density_f.rate > 0.0) || !(mix.density_g.rate > 0.0))
        fail("density", "density rates must be positive");
    if (!(mix.theta_lo > 0.0 && mix.theta_hi < 1.0 && mix.theta_lo < mix.theta_hi))
        fail("theta_range", "integration range must satisfy 0 < lo < hi < 1");
    else if (mix.theta_nodes.front() < mix.theta_lo || mix.theta_nodes.back() > mix.theta_hi)
        fail("theta_range", "nodes fall outside the integration range");
    if (!report.pass()) return report;

    // Per-theta loadings must respect the E-support constraints.
    for (std::size_t k = 0; k < n; ++k) {
        const auto sub = validate_spec(mix.theta_spec(static_cast<int>(k)));
        for (const auto& issue : sub.issues)
            fail("theta_" + std::to_string(k + 1) + "." + issue.invariant, issue.detail);
    }

    // Truncation-corrected normalization identities on the theta range. Rules with
    // fewer than four nodes cannot resolve the density to this accuracy; their
    // aggregates are only meaningful through ratio-normalized quantities, so the
    // check is skipped for them.
    if (n < 4) return report;
    for (double v : {0.5, 1.0, 2.0}) {
        double acc_f = 0.0, acc_g = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            acc_f += mix.quadrature_weights[k] * weight_x(mix, mix.theta_nodes[k], v);
            acc_g += mix.quadrature_weights[k] * weight_y(mix, mix.theta_nodes[k], v);
        }
        if (std::abs(acc_f - v) / v > 1e-6)
            fail("normalization_f", "quadrature of f-weights at x = " + std::to_string(v) +
                                        " deviates by " + std::to_string(acc_f / v - 1.0));
        if (std::abs(acc_g - v) / v > 1e-6)
            fail("normalization_g", "quadrature of g-weights at y = " + std::to_string(v) +
                                        " deviates by " + std::to_string(acc_g / v - 1.0));
    }
    return report;
}

namespace {

double corrected_weight(const ExponentialDensity& d, double theta_min, double theta_max,
                        double theta, double v) {
    if (!(v > 0.0)) throw std::invalid_argument("initial condition must be positive");
    // Mass of the density between theta_min/v and theta_max/v; dividing by it restores
    // the normalization identity on the truncated theta range. Written with expm1 so
    // the difference survives v far above the theta scale.
    const double mass = std::exp(-d.rate * theta_min / v) *
                        (-std::expm1(-d.rate * (theta_max - theta_min) / v));
    return d.pdf(theta / v) / mass;
}

} // namespace

double weight_x(const MixtureSpec& mix, double theta, double x) {
    return corrected_weight(mix.density_f, mix.theta_lo, mix.theta_hi, theta, x);
}

double weight_y(const MixtureSpec& mix, double theta, double y) {
    return corrected_weight(mix.density_g, mix.theta_lo, mix.theta_hi, theta, y);
}

MixtureBundle simulate_mixture(const MixtureSpec& mix, const SimConfig& sim) {
    const auto report = validate_mixture(mix);
    if (!report.pass())
        throw std::invalid_argument("invalid mixture spec:\n" + report.to_string());
    MixtureBundle bundle;
    bundle.per_theta.reserve(mix.theta_nodes.size());
    for (int k = 0; k < mix.n_nodes(); ++k) {
        // identical sim config: one shared noise tensor across the theta family
        bundle.per_theta.push_back(
            simulate_market(mix.theta_spec(k), sim, mix.theta_loadings(k)));
    }
    return bundle;
}

BarState bar_processes(const MixtureSpec& mix, const MixtureBundle& bundle, std::int64_t path,
                       std::int64_t node, double x, double y) {
    BarState out;
    for (int k = 0; k < mix.n_nodes(); ++k) {
        const auto& pb = bundle.per_theta[static_cast<std::size_t>(k)];
        const auto row = static_cast<std::size_t>(pb.idx(path, node));
        const double wk = mix.quadrature_weights[static_cast<std::size_t>(k)];
        const double wx = wk * weight_x(mix, mix.theta_nodes[static_cast<std::size_t>(k)], x);
        const double wy = wk * weight_y(mix, mix.theta_nodes[static_cast<std::size_t>(k)], y);
        out.x_bar += wx * std::exp(pb.log_wealth[row]);
        out.y_bar += wy * std::exp(pb.log_state_price[row]);
        out.consumption_bar += wx * pb.consumption_rate[row];
    }
    return out;
}

double mixture_bond_price(const MixtureSpec& mix, double y, std::span<const double> y_theta,
                          std::span<const double> bond_theta) {
    const auto n = static_cast<std::size_t>(mix.n_nodes());
    if (y_theta.size() != n || bond_theta.size() != n)
        throw std::invalid_argument("per-theta arrays must match the node count");
    double den = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        den += mix.quadrature_weights[k] * weight_y(mix, mix.theta_nodes[k], y) * y_theta[k];
    double price = 0.0;
    // normalize-then-combine keeps the one-node mixture bitwise equal to its component
    for (std::size_t k = 0; k < n; ++k) {
        const double wt =
            mix.quadrature_weights[k] * weight_y(mix, mix.theta_nodes[k], y) * y_theta[k] / den;
        price += wt * bond_theta[k];
    }
    return price;
}

double mixture_bond_price_at0(const MixtureSpec& mix, double y,
                              std::span<const double> bond_theta) {
    const std::vector<double> ones(static_cast<std::size_t>(mix.n_nodes()), 1.0);
    return mixture_bond_price(mix, y, ones, bond_theta);
}

std::vector<std::vector<double>> per_theta_bond_prices(const MixtureSpec& mix,
                                                       const std::vector<double>& tenors,
                                                       double step, const RiccatiConfig& config) {
    std::vector<std::vector<double>> out;
    out.reserve(static_cast<std::size_t>(mix.n_nodes()));
    for (int k = 0; k < mix.n_nodes(); ++k)
        out.push_back(make_yield_curve(mix.theta_spec(k), tenors, step, config).bond_prices);
    return out;
}

YieldCurve mixture_yield_curve(const MixtureSpec& mix, double y, const std::vector<double>& tenors,
                               double step, const RiccatiConfig& config) {
    return mixture_yield_curve(mix, y, tenors, per_theta_bond_prices(mix, tenors, step, config));
}

YieldCurve mixture_yield_curve(const MixtureSpec& mix, double y, const std::vector<double>& tenors,
                               const std::vector<std::vector<double>>& per_theta) {
    YieldCurve curve;
    curve.as_of = 0.0;
    curve.tenors = tenors;
    curve.model_hash = spec_content_hash(mix.base_spec);
    std::vector<double> column(static_cast<std::size_t>(mix.n_nodes()));
    for (std::size_t j = 0; j < tenors.size(); ++j) {
        for (std::size_t k = 0; k < column.size(); ++k) column[k] = per_theta[k][j];
        const double price = mixture_bond_price_at0(mix, y, column);
        curve.bond_prices.push_back(price);
        curve.zero_rates.push_back(-std::log(price) / tenors[j]);
        curve.vol_norms.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    return curve;
}

double invert_bar_x(const MixtureSpec& mix, const MixtureBundle& bundle, std::int64_t path,
                    std::int64_t node, double z) {
    if (!(z > 0.0)) throw std::invalid_argument("target wealth must be positive");
    auto value = [&](double x) { return bar_processes(mix, bundle, path, node, x, 1.0).x_bar; };

    double lo = 0.5, hi = 2.0;
    for (int i = 0; i < 200 && value(lo) > z; ++i) lo *= 0.5;
    for (int i = 0; i < 200 && value(hi) < z; ++i) hi *= 2.0;
    if (value(lo) > z || value(hi) < z)
        throw std::runtime_error("flow inversion bracket failure: target " + std::to_string(z) +
                                 " outside [" + std::to_string(value(lo)) + ", " +
                                 std::to_string(value(hi)) + "]");
    // bisection on the strictly increasing map
    for (int i = 0; i < 200; ++i) {
        const double midpoint = 0.5 * (lo + hi);
        if (value(midpoint) < z)
            lo = midpoint;
        else
            hi = midpoint;
        if (hi - lo <= 1e-10 * hi) break;
    }
    return 0.5 * (lo + hi);
}

double BaseUtility::marginal(double x) const {
    if (!(x > 0.0)) throw std::invalid_argument("marginal utility needs x > 0");
    return kind == Kind::Power ? std::pow(x, -theta0) : 1.0 / x;
}

double reconstruct_marginal_utility(const MixtureSpec& mix, const MixtureBundle& bundle,
                                    std::int64_t path, std::int64_t node, double x,
                                    const BaseUtility& base_u) {
    const double x0 = invert_bar_x(mix, bundle, path, node, x);
    const double y = base_u.marginal(x0);
    return bar_processes(mix, bundle, path, node, 1.0, y).y_bar;
}

namespace {

void put17(std::ofstream& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
}

} // namespace

void write_ysweep_csv(const MixtureSpec&, const std::vector<double>& ys,
                      const std::vector<double>& tenors, const std::vector<YieldCurve>& curves,
                      const std::string& path) {
    if (ys.size() != curves.size()) throw std::invalid_argument("one curve per y required");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("Failed to open: " + path);
    out << "y,tenor,bond_price,zero_rate\n";
    for (std::size_t i = 0; i < ys.size(); ++i) {
        for (std::size_t j = 0; j < tenors.size(); ++j) {
            put17(out, ys[i]);
            out << ",";
            put17(out, tenors[j]);
            out << ",";
            put17(out, curves[i].bond_prices[j]);
            out << ",";
            put17(out, curves[i].zero_rates[j]);
            out << "\n";
        }
    }
}

void write_theta_diagnostics_csv(const MixtureSpec& mix, double y,
                                 std::span<const double> y_theta,
                                 std::span<const double> bond_theta, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("Failed to open: " + path);
    out << "theta,weight_at_y,y_theta,bond_theta\n";
    for (int k = 0; k < mix.n_nodes(); ++k) {
        const auto kk = static_cast<std::size_t>(k);
        put17(out, mix.theta_nodes[kk]);
        out << ",";
        put17(out, mix.quadrature_weights[kk] * weight_y(mix, mix.theta_nodes[kk], y));
        out << ",";
        put17(out, y_theta[kk]);
        out << ",";
        put17(out, bond_theta[kk]);
        out << "\n";
    }
}

} // namespace ramsey
