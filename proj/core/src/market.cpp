#include "ramsey/market.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "market_kernel.hpp"

namespace ramsey {

namespace detail {

KernelModel KernelModel::build(const AffineModelSpec& spec, const MarketLoadings& loadings,
                               bool with_wealth) {
    const int n = spec.dim;
    KernelModel m;
    m.n = n;
    m.with_wealth = with_wealth;
    auto flatten = [n](const Eigen::MatrixXd& mat) {
        std::vector<double> out(static_cast<std::size_t>(n) * n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) out[static_cast<std::size_t>(r) * n + c] = mat(r, c);
        return out;
    };
    auto to_vec = [](const Eigen::VectorXd& v) {
        return std::vector<double>(v.data(), v.data() + v.size());
    };
    m.rho = flatten(spec.drift_matrix);
    m.delta0 = to_vec(spec.drift_intercept);
    m.theta = flatten(spec.vol_loading);
    m.lam0 = to_vec(spec.eigen_intercepts);
    m.lam_grad = flatten(spec.eigen_loadings);
    m.a_r = to_vec(spec.rate_loading_a);
    m.b_r = spec.rate_loading_b;
    m.a_zeta = to_vec(spec.consumption_loading_a);
    m.b_zeta = spec.consumption_loading_b;
    m.w_y = to_vec(spec.vol_loading.transpose() * loadings.state_price);
    m.w_eta = to_vec(spec.vol_loading.transpose() * spec.premium_loading_R);
    m.w_x = to_vec(spec.vol_loading.transpose() * loadings.portfolio);
    m.xi0 = to_vec(spec.xi0);
    return m;
}

} // namespace detail

MarketLoadings MarketLoadings::from_spec(const AffineModelSpec& spec) {
    return {spec.state_price_loading(), spec.portfolio_loading};
}

Eigen::VectorXd PathBundle::factor_vec(std::int64_t p, std::int64_t k) const {
    Eigen::VectorXd v(n_factors);
    for (int i = 0; i < n_factors; ++i) v[i] = factor(p, k, i);
    return v;
}

namespace {

struct DenseRecorder {
    PathBundle& out;
    std::vector<std::int64_t>& clips;
    int n;
    std::int64_t n_nodes;
    bool with_wealth;

    void node(std::int64_t p, std::int64_t k, double, const detail::NodeState& st) {
        const std::int64_t row = p * n_nodes + k;
        double* xi = out.factors.data() + row * n;
        for (int i = 0; i < n; ++i) xi[i] = st.xi[i];
        if (k > 0) {
            double* dw = out.dw.data() + (p * (n_nodes - 1) + (k - 1)) * n;
            for (int i = 0; i < n; ++i) dw[i] = st.dw[i];
        }
        out.log_state_price[static_cast<std::size_t>(row)] = st.log_y;
        out.integrated_rate[static_cast<std::size_t>(row)] = st.int_r;
        out.integrated_consumption[static_cast<std::size_t>(row)] = st.int_zeta;
        if (with_wealth) {
            out.log_wealth[static_cast<std::size_t>(row)] = st.log_x;
            out.consumption_rate[static_cast<std::size_t>(row)] =
                detail::consumption_value(st.zeta, st.log_x);
        }
    }
    void finish_path(std::int64_t p, std::int64_t c) { clips[static_cast<std::size_t>(p)] = c; }
};

PathBundle make_bundle(const AffineModelSpec& spec, const SimConfig& sim,
                       const MarketLoadings& loadings, bool with_wealth) {
    require_valid(spec);
    sim.validate();
    const std::int64_t n_steps = sim.n_steps();
    const double dt = sim.horizon / static_cast<double>(n_steps);

    PathBundle out;
    out.n_paths = sim.n_paths;
    out.n_factors = spec.dim;
    out.seed = sim.seed;
    out.loadings = loadings;
    out.grid.resize(static_cast<std::size_t>(n_steps) + 1);
    for (std::int64_t k = 0; k <= n_steps; ++k)
        out.grid[static_cast<std::size_t>(k)] = dt * static_cast<double>(k);
    const auto n_values = static_cast<std::size_t>(sim.n_paths * (n_steps + 1));
    out.factors.resize(n_values * static_cast<std::size_t>(spec.dim));
    out.dw.resize(static_cast<std::size_t>(sim.n_paths * n_steps * spec.dim));
    out.log_state_price.resize(n_values);
    out.integrated_rate.resize(n_values);
    out.integrated_consumption.resize(n_values);
    if (with_wealth) {
        out.log_wealth.resize(n_values);
        out.consumption_rate.resize(n_values);
    }

    const auto model = detail::KernelModel::build(spec, loadings, with_wealth);
    std::vector<std::int64_t> clips(static_cast<std::size_t>(sim.n_paths), 0);
    DenseRecorder rec{out, clips, spec.dim, n_steps + 1, with_wealth};
    detail::run_kernel(model, sim, rec);
    out.clip_events = 0;
    for (auto c : clips) out.clip_events += c;
    return out;
}

} // namespace

PathBundle simulate_state_price(const AffineModelSpec& spec, const SimConfig& sim,
                                const std::optional<MarketLoadings>& loadings) {
    return make_bundle(spec, sim, loadings.value_or(MarketLoadings::from_spec(spec)), false);
}

void simulate_optimal_wealth(const AffineModelSpec& spec, PathBundle& bundle) {
    require_valid(spec);
    if (bundle.factors.empty()) throw std::invalid_argument("bundle carries no factor paths");
    const auto model = detail::KernelModel::build(spec, bundle.loadings, true);
    const std::int64_t n_nodes = bundle.n_nodes();
    const std::int64_t n_steps = n_nodes - 1;
    const double dt = bundle.grid[1];
    const int n = bundle.n_factors;
    const auto n_values = static_cast<std::size_t>(bundle.n_paths * n_nodes);
    bundle.log_wealth.assign(n_values, 0.0);
    bundle.consumption_rate.assign(n_values, 0.0);

    parallel_for(bundle.n_paths, [&](std::int64_t p0, std::int64_t p1) {
        for (std::int64_t p = p0; p < p1; ++p) {
            double log_x = 0.0;
            const double* xi0 = bundle.factors.data() + (p * n_nodes) * n;
            double zeta = detail::affine_eval(model.a_zeta, model.b_zeta, xi0, n);
            bundle.consumption_rate[static_cast<std::size_t>(p * n_nodes)] =
                detail::consumption_value(zeta, 0.0);
            for (std::int64_t k = 0; k < n_steps; ++k) {
                const double* xi = bundle.factors.data() + (p * n_nodes + k) * n;
                const double* dw = bundle.dw.data() + (p * n_steps + k) * n;
                const double r = detail::affine_eval(model.a_r, model.b_r, xi, n);
                zeta = detail::affine_eval(model.a_zeta, model.b_zeta, xi, n);
                log_x += detail::wealth_log_increment(model, xi, dw, model.w_x.data(), r, zeta, dt);
                const double* xin = bundle.factors.data() + (p * n_nodes + k + 1) * n;
                const double zeta_next = detail::affine_eval(model.a_zeta, model.b_zeta, xin, n);
                const auto row = static_cast<std::size_t>(p * n_nodes + k + 1);
                bundle.log_wealth[row] = log_x;
                bundle.consumption_rate[row] = detail::consumption_value(zeta_next, log_x);
            }
        }
    });
}

PathBundle simulate_market(const AffineModelSpec& spec, const SimConfig& sim,
                           const std::optional<MarketLoadings>& loadings) {
    return make_bundle(spec, sim, loadings.value_or(MarketLoadings::from_spec(spec)), true);
}

OptimalTriplet power_optimal_triplet(const PathBundle& bundle, double x, double y) {
    if (!bundle.has_wealth()) throw std::invalid_argument("bundle has no wealth paths");
    if (!(x > 0.0) || !(y > 0.0)) throw std::invalid_argument("initial conditions must be positive");
    OptimalTriplet out;
    const std::size_t n = bundle.log_wealth.size();
    out.wealth.resize(n);
    out.state_price.resize(n);
    out.consumption.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.wealth[i] = x * std::exp(bundle.log_wealth[i]);
        out.state_price[i] = y * std::exp(bundle.log_state_price[i]);
        out.consumption[i] = x * bundle.consumption_rate[i];
    }
    return out;
}

namespace {

std::vector<std::int64_t> node_indices(const PathBundle& bundle, const std::vector<double>& times) {
    const double dt = bundle.grid[1];
    std::vector<std::int64_t> nodes;
    nodes.reserve(times.size());
    for (double t : times) {
        const auto k = std::llround(t / dt);
        if (k < 0 || k >= bundle.n_nodes() || std::abs(static_cast<double>(k) * dt - t) > 1e-9)
            throw std::invalid_argument("sample time " + std::to_string(t) +
                                        " does not lie on the bundle grid");
        nodes.push_back(k);
    }
    return nodes;
}

} // namespace

SampledPaths compensated_wealth_paths(const PathBundle& bundle, const std::vector<double>& times) {
    if (!bundle.has_wealth()) throw std::invalid_argument("bundle has no wealth paths");
    const auto nodes = node_indices(bundle, times);
    SampledPaths out;
    out.times = times;
    out.n_paths = bundle.n_paths;
    out.values.resize(static_cast<std::size_t>(bundle.n_paths) * times.size());
    for (std::int64_t p = 0; p < bundle.n_paths; ++p) {
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            const auto row = static_cast<std::size_t>(bundle.idx(p, nodes[j]));
            out.values[static_cast<std::size_t>(p) * times.size() + j] =
                std::exp(bundle.integrated_consumption[row] + bundle.log_wealth[row] +
                         bundle.log_state_price[row]);
        }
    }
    return out;
}

SampledPaths additive_compensated_paths(const PathBundle& bundle, const std::vector<double>& times) {
    if (!bundle.has_wealth()) throw std::invalid_argument("bundle has no wealth paths");
    const auto nodes = node_indices(bundle, times);
    const double dt = bundle.grid[1];
    SampledPaths out;
    out.times = times;
    out.n_paths = bundle.n_paths;
    out.values.resize(static_cast<std::size_t>(bundle.n_paths) * times.size());
    for (std::int64_t p = 0; p < bundle.n_paths; ++p) {
        double consumed = 0.0; // int_0^t Y zeta X ds, left-endpoint rule
        std::size_t j = 0;
        for (std::int64_t k = 0; k < bundle.n_nodes() && j < nodes.size(); ++k) {
            const auto row = static_cast<std::size_t>(bundle.idx(p, k));
            const double y = std::exp(bundle.log_state_price[row]);
            if (nodes[j] == k) {
                out.values[static_cast<std::size_t>(p) * times.size() + j] =
                    y * std::exp(bundle.log_wealth[row]) + consumed;
                ++j;
            }
            consumed += y * bundle.consumption_rate[row] * dt;
        }
    }
    return out;
}

SampledPaths sample_bundle(const PathBundle& bundle, BundleComponent what,
                           const std::vector<double>& times) {
    const auto nodes = node_indices(bundle, times);
    SampledPaths out;
    out.times = times;
    out.n_paths = bundle.n_paths;
    out.values.resize(static_cast<std::size_t>(bundle.n_paths) * times.size());
    for (std::int64_t p = 0; p < bundle.n_paths; ++p) {
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            const auto row = static_cast<std::size_t>(bundle.idx(p, nodes[j]));
            double v = 0.0;
            switch (what) {
                case BundleComponent::StatePrice: v = std::exp(bundle.log_state_price[row]); break;
                case BundleComponent::Wealth: v = std::exp(bundle.log_wealth[row]); break;
                case BundleComponent::Consumption: v = bundle.consumption_rate[row]; break;
            }
            out.values[static_cast<std::size_t>(p) * times.size() + j] = v;
        }
    }
    return out;
}

namespace {

std::vector<std::int64_t> step_nodes(const SimConfig& sim, const std::vector<double>& times) {
    const double dt = sim.horizon / static_cast<double>(sim.n_steps());
    std::vector<std::int64_t> nodes;
    nodes.reserve(times.size());
    for (double t : times) {
        const auto k = std::llround(t / dt);
        if (k < 0 || k > sim.n_steps() || std::abs(static_cast<double>(k) * dt - t) > 1e-9)
            throw std::invalid_argument("sample time " + std::to_string(t) +
                                        " does not lie on the simulation grid");
        nodes.push_back(k);
    }
    return nodes;
}

struct StreamSampleRecorder {
    const std::vector<std::int64_t>& nodes;
    std::vector<double>& values;
    double bias = 0.0;
    bool compensated_product = false;

    void node(std::int64_t p, std::int64_t k, double t, const detail::NodeState& st) {
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            if (nodes[j] != k) continue;
            const double v = compensated_product
                                 ? std::exp(st.int_zeta + st.log_x + st.log_y)
                                 : std::exp(st.int_r + st.log_y + bias * t);
            values[static_cast<std::size_t>(p) * nodes.size() + j] = v;
        }
    }
    void finish_path(std::int64_t, std::int64_t) {}
};

SampledPaths run_sampled(const AffineModelSpec& spec, const SimConfig& sim,
                         const std::vector<double>& times, const MarketLoadings& loadings,
                         bool compensated_product, double bias) {
    require_valid(spec);
    sim.validate();
    const auto nodes = step_nodes(sim, times);
    SampledPaths out;
    out.times = times;
    out.n_paths = sim.n_paths;
    out.values.resize(static_cast<std::size_t>(sim.n_paths) * times.size());
    const auto model = detail::KernelModel::build(spec, loadings, compensated_product);
    StreamSampleRecorder rec{nodes, out.values, bias, compensated_product};
    detail::run_kernel(model, sim, rec);
    return out;
}

} // namespace

SampledPaths simulate_compensated_product(const AffineModelSpec& spec, const SimConfig& sim,
                                          const std::vector<double>& times,
                                          const std::optional<MarketLoadings>& loadings) {
    return run_sampled(spec, sim, times, loadings.value_or(MarketLoadings::from_spec(spec)), true,
                       0.0);
}

SampledPaths simulate_state_price_samples(const AffineModelSpec& spec, const SimConfig& sim,
                                          const std::vector<double>& times, double drift_bias) {
    return run_sampled(spec, sim, times, MarketLoadings::from_spec(spec), false, drift_bias);
}

PowerConstraintSolution solve_backward_power_constraint(const AffineModelSpec& spec, double theta,
                                                        double horizon, double step,
                                                        const RiccatiConfig& config) {
    require_valid(spec);
    if (!(theta > 0.0 && theta < 1.0))
        throw std::invalid_argument("risk aversion theta must lie in (0, 1)");
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");

    const double beta = 1.0 - 1.0 / theta; // negative
    const Eigen::VectorXd a_y = spec.state_price_loading();
    const Eigen::VectorXd scaled = beta * a_y;

    // Affine drift of the log-process int zeta ds + beta * log Y, written against the
    // exponential-martingale part with loading beta * a_Y.
    const AffineForm f_scaled =
        affine_drift_f(spec, scaled, Eigen::VectorXd::Zero(spec.dim), 0.0);
    const AffineForm q_y = quadratic_variation_coeffs(spec, a_y);
    const double quad_corr = 0.5 * (beta * beta - beta);
    AffineForm drift;
    drift.grad = -f_scaled.grad + spec.consumption_loading_a - beta * spec.rate_loading_a +
                 quad_corr * q_y.grad;
    drift.intercept = -f_scaled.intercept + spec.consumption_loading_b -
                      beta * spec.rate_loading_b + quad_corr * q_y.intercept;

    PowerConstraintSolution out;
    out.theta = theta;
    out.horizon = horizon;
    out.riccati = solve_riccati_backward(spec, Eigen::VectorXd::Zero(spec.dim), 0.0, drift, 0.0,
                                         horizon, step, config, scaled);
    return out;
}

std::vector<double> propagate_backward_wealth(const PowerConstraintSolution& sol,
                                              const PathBundle& bundle) {
    if (bundle.grid.back() > sol.horizon + 1e-9)
        throw std::invalid_argument("bundle horizon exceeds the constraint horizon");
    const double inv_theta = 1.0 / sol.theta;
    const std::int64_t n_nodes = bundle.n_nodes();
    std::vector<double> wealth(static_cast<std::size_t>(bundle.n_paths * n_nodes));

    // A(t), B(t) per node, shared across paths.
    std::vector<Eigen::VectorXd> a_nodes(static_cast<std::size_t>(n_nodes));
    std::vector<double> b_nodes(static_cast<std::size_t>(n_nodes));
    for (std::int64_t k = 0; k < n_nodes; ++k) {
        a_nodes[static_cast<std::size_t>(k)] = sol.riccati.a_at(bundle.grid[static_cast<std::size_t>(k)]);
        b_nodes[static_cast<std::size_t>(k)] = sol.riccati.b_at(bundle.grid[static_cast<std::size_t>(k)]);
    }

    for (std::int64_t p = 0; p < bundle.n_paths; ++p) {
        for (std::int64_t k = 0; k < n_nodes; ++k) {
            const auto row = static_cast<std::size_t>(bundle.idx(p, k));
            const auto& a = a_nodes[static_cast<std::size_t>(k)];
            double expo = b_nodes[static_cast<std::size_t>(k)];
            for (int i = 0; i < bundle.n_factors; ++i) expo += a[i] * bundle.factor(p, k, i);
            wealth[row] = std::exp(-inv_theta * bundle.log_state_price[row] + expo);
        }
    }
    return wealth;
}

namespace {

// Running max of |X Y^(1/theta) exp(-A.xi - B) - 1| along simulated paths.
struct ConstraintErrorRecorder {
    const std::vector<double>& a_nodes; // [k*n+i]
    const std::vector<double>& b_nodes;
    int n;
    double inv_theta;
    double log_x0;
    std::vector<double>& per_path_max;

    void node(std::int64_t p, std::int64_t k, double, const detail::NodeState& st) {
        const double* a = a_nodes.data() + static_cast<std::size_t>(k) * n;
        double expo = b_nodes[static_cast<std::size_t>(k)];
        for (int i = 0; i < n; ++i) expo += a[i] * st.xi[i];
        const double err =
            std::abs(std::exp(log_x0 + st.log_x + inv_theta * st.log_y - expo) - 1.0);
        auto& acc = per_path_max[static_cast<std::size_t>(p)];
        acc = std::max(acc, err);
    }
    void finish_path(std::int64_t, std::int64_t) {}
};

} // namespace

double backward_constraint_sup_error(const AffineModelSpec& spec,
                                     const PowerConstraintSolution& sol, const SimConfig& sim) {
    require_valid(spec);
    sim.validate();
    if (sim.horizon > sol.horizon + 1e-9)
        throw std::invalid_argument("simulation horizon exceeds the constraint horizon");
    const int n = spec.dim;
    const std::int64_t n_steps = sim.n_steps();
    const double dt = sim.horizon / static_cast<double>(n_steps);
    const double inv_theta = 1.0 / sol.theta;
    const Eigen::VectorXd a_y = spec.state_price_loading();

    // Implied backward portfolio loading per step and exponent tables per node.
    std::vector<double> w_x_steps(static_cast<std::size_t>(n_steps) * n);
    std::vector<double> a_nodes(static_cast<std::size_t>(n_steps + 1) * n);
    std::vector<double> b_nodes(static_cast<std::size_t>(n_steps) + 1);
    for (std::int64_t k = 0; k <= n_steps; ++k) {
        const double t = dt * static_cast<double>(k);
        const Eigen::VectorXd a = sol.riccati.a_at(t);
        for (int i = 0; i < n; ++i) a_nodes[static_cast<std::size_t>(k) * n + i] = a[i];
        b_nodes[static_cast<std::size_t>(k)] = sol.riccati.b_at(t);
        if (k < n_steps) {
            const Eigen::VectorXd kappa = a - inv_theta * a_y;
            const Eigen::VectorXd w = spec.vol_loading.transpose() * kappa;
            for (int i = 0; i < n; ++i) w_x_steps[static_cast<std::size_t>(k) * n + i] = w[i];
        }
    }

    auto model = detail::KernelModel::build(spec, MarketLoadings::from_spec(spec), true);
    model.w_x_steps = &w_x_steps;

    const double log_x0 = sol.riccati.exponent(0.0, spec.xi0);
    std::vector<double> per_path_max(static_cast<std::size_t>(sim.n_paths), 0.0);
    ConstraintErrorRecorder rec{a_nodes, b_nodes, n, inv_theta, log_x0, per_path_max};
    detail::run_kernel(model, sim, rec);
    return *std::max_element(per_path_max.begin(), per_path_max.end());
}

double orthogonal_identity_residual(const AffineModelSpec& spec,
                                    const PowerConstraintSolution& sol) {
    const Eigen::VectorXd target =
        project_orthogonal(spec, spec.state_price_loading()) / sol.theta;
    double worst = 0.0;
    for (const auto& a : sol.riccati.A) {
        worst = std::max(worst,
                         (project_orthogonal(spec, a) - target).lpNorm<Eigen::Infinity>());
    }
    return worst;
}

namespace {

struct TerminalConstraintRecorder {
    std::int64_t terminal_node;
    double beta;
    std::vector<double>& values;

    void node(std::int64_t p, std::int64_t k, double, const detail::NodeState& st) {
        if (k == terminal_node)
            values[static_cast<std::size_t>(p)] = std::exp(st.int_zeta + beta * st.log_y);
    }
    void finish_path(std::int64_t, std::int64_t) {}
};

} // namespace

PowerConstraintCheck mc_power_constraint_check(const AffineModelSpec& spec, const SimConfig& sim,
                                               double theta, double horizon, double riccati_step) {
    require_valid(spec);
    sim.validate();
    const double dt = sim.horizon / static_cast<double>(sim.n_steps());
    const auto terminal_node = std::llround(horizon / dt);
    if (terminal_node < 1 || terminal_node > sim.n_steps() ||
        std::abs(static_cast<double>(terminal_node) * dt - horizon) > 1e-9)
        throw std::invalid_argument("horizon does not lie on the simulation grid");

    const auto sol = solve_backward_power_constraint(spec, theta, horizon, riccati_step);
    const double beta = 1.0 - 1.0 / theta;

    const auto model = detail::KernelModel::build(spec, MarketLoadings::from_spec(spec), false);
    std::vector<double> values(static_cast<std::size_t>(sim.n_paths), 0.0);
    TerminalConstraintRecorder rec{terminal_node, beta, values};
    detail::run_kernel(model, sim, rec);

    PowerConstraintCheck out;
    out.estimate = estimate_from_samples(values);
    out.riccati_value = std::exp(sol.riccati.exponent(0.0, spec.xi0));
    out.within_3se =
        std::abs(out.estimate.mean - out.riccati_value) <= 3.0 * out.estimate.std_error;
    out.heavy_tail_warning =
        out.estimate.mean != 0.0 && out.estimate.std_error / std::abs(out.estimate.mean) > 0.10;
    return out;
}

namespace {

void put17(std::ofstream& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
}

} // namespace

void write_bundle_summary_csv(const PathBundle& bundle, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("Failed to open: " + path);
    out << "t";
    for (int i = 0; i < bundle.n_factors; ++i) out << ",mean_xi_" << (i + 1);
    out << ",mean_state_price,sd_state_price";
    if (bundle.has_wealth()) out << ",mean_wealth,sd_wealth,mean_consumption";
    out << ",mean_int_rate,mean_int_consumption\n";

    const auto n_paths = static_cast<std::size_t>(bundle.n_paths);
    std::vector<double> column(n_paths);
    auto mean_sd = [&](auto&& get) {
        for (std::size_t p = 0; p < n_paths; ++p) column[p] = get(static_cast<std::int64_t>(p));
        const Estimate e = estimate_from_samples(column);
        return std::pair<double, double>(
            e.mean, e.std_error * std::sqrt(static_cast<double>(n_paths)));
    };

    for (std::int64_t k = 0; k < bundle.n_nodes(); ++k) {
        put17(out, bundle.grid[static_cast<std::size_t>(k)]);
        for (int i = 0; i < bundle.n_factors; ++i) {
            out << ",";
            put17(out, mean_sd([&](std::int64_t p) { return bundle.factor(p, k, i); }).first);
        }
        const auto [ym, ys] =
            mean_sd([&](std::int64_t p) { return std::exp(bundle.log_state_price[static_cast<std::size_t>(bundle.idx(p, k))]); });
        out << ",";
        put17(out, ym);
        out << ",";
        put17(out, ys);
        if (bundle.has_wealth()) {
            const auto [xm, xs] =
                mean_sd([&](std::int64_t p) { return std::exp(bundle.log_wealth[static_cast<std::size_t>(bundle.idx(p, k))]); });
            const auto cm =
                mean_sd([&](std::int64_t p) { return bundle.consumption_rate[static_cast<std::size_t>(bundle.idx(p, k))]; });
            out << ",";
            put17(out, xm);
            out << ",";
            put17(out, xs);
            out << ",";
            put17(out, cm.first);
        }
        out << ",";
        put17(out, mean_sd([&](std::int64_t p) { return bundle.integrated_rate[static_cast<std::size_t>(bundle.idx(p, k))]; }).first);
        out << ",";
        put17(out, mean_sd([&](std::int64_t p) { return bundle.integrated_consumption[static_cast<std::size_t>(bundle.idx(p, k))]; }).first);
        out << "\n";
    }
}

void write_bundle_paths_csv(const PathBundle& bundle, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("Failed to open: " + path);
    out << "path,t";
    for (int i = 0; i < bundle.n_factors; ++i) out << ",xi_" << (i + 1);
    out << ",state_price";
    if (bundle.has_wealth()) out << ",wealth,consumption";
    out << ",int_rate,int_consumption\n";
    for (std::int64_t p = 0; p < bundle.n_paths; ++p) {
        for (std::int64_t k = 0; k < bundle.n_nodes(); ++k) {
            const auto row = static_cast<std::size_t>(bundle.idx(p, k));
            out << p << ",";
            put17(out, bundle.grid[static_cast<std::size_t>(k)]);
            for (int i = 0; i < bundle.n_factors; ++i) {
                out << ",";
                put17(out, bundle.factor(p, k, i));
            }
            out << ",";
            put17(out, std::exp(bundle.log_state_price[row]));
            if (bundle.has_wealth()) {
                out << ",";
                put17(out, std::exp(bundle.log_wealth[row]));
                out << ",";
                put17(out, bundle.consumption_rate[row]);
            }
            out << ",";
            put17(out, bundle.integrated_rate[row]);
            out << ",";
            put17(out, bundle.integrated_consumption[row]);
            out << "\n";
        }
    }
}

} // namespace ramsey
