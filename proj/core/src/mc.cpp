#include "ramsey/mc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "market_kernel.hpp"

namespace ramsey {

std::int64_t SimConfig::n_steps() const {
    return std::llround(horizon / step);
}

void SimConfig::validate() const {
    if (n_paths < 2) throw std::invalid_argument("n_paths must be at least 2");
    if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    const auto k = n_steps();
    if (k < 1 || std::abs(static_cast<double>(k) * step - horizon) > 1e-12 * std::max(1.0, horizon))
        throw std::invalid_argument("step must divide horizon");
    if (antithetic && (n_paths % 2) != 0)
        throw std::invalid_argument("antithetic sampling needs an even path count");
    if (noise_substeps < 1) throw std::invalid_argument("noise_substeps must be positive");
}

nlohmann::json estimate_to_json(const Estimate& e, const std::string& name, std::uint64_t seed,
                                const std::string& verdict) {
    nlohmann::json j;
    j["name"] = name;
    j["mean"] = e.mean;
    j["std_error"] = e.std_error;
    j["ci95"] = {e.ci95.first, e.ci95.second};
    j["n_paths"] = e.n;
    j["seed"] = seed;
    j["verdict"] = verdict;
    return j;
}

double pairwise_sum(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n == 0) return 0.0;
    if (n <= 8) {
        double acc = 0.0;
        for (double v : values) acc += v;
        return acc;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

Estimate estimate_from_samples(std::span<const double> samples) {
    const auto n = static_cast<std::int64_t>(samples.size());
    if (n < 1) throw std::invalid_argument("Empty sample");
    Estimate e;
    e.n = n;
    e.mean = pairwise_sum(samples) / static_cast<double>(n);
    std::vector<double> sq(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double d = samples[i] - e.mean;
        sq[i] = d * d;
    }
    const double var = n > 1 ? pairwise_sum(sq) / static_cast<double>(n - 1) : 0.0;
    e.std_error = std::sqrt(var / static_cast<double>(n));
    e.ci95 = {e.mean - 1.96 * e.std_error, e.mean + 1.96 * e.std_error};
    return e;
}

void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& fn) {
    if (n <= 0) return;
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const auto n_threads = static_cast<std::int64_t>(std::min<std::uint64_t>(hw, 8));
    if (n_threads <= 1 || n < 256) {
        fn(0, n);
        return;
    }
    const std::int64_t chunk = (n + n_threads - 1) / n_threads;
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(n_threads));
    for (std::int64_t t = 0; t < n_threads; ++t) {
        const std::int64_t begin = t * chunk;
        const std::int64_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        workers.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (auto& w : workers) w.join();
}

namespace {

constexpr std::uint64_t kGolden1 = 0x9e3779b97f4a7c15ull;
constexpr std::uint64_t kGolden2 = 0xbf58476d1ce4e5b9ull;

inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
}

} // namespace

std::uint64_t CounterRng::path_key(std::int64_t path) const {
    return mix64(seed_ ^ mix64(static_cast<std::uint64_t>(path) * kGolden1 + 1));
}

std::uint64_t CounterRng::step_key(std::uint64_t path_key, std::int64_t step) {
    return mix64(path_key ^ (static_cast<std::uint64_t>(step) * kGolden2 + 1));
}

double CounterRng::normal(std::uint64_t step_key, std::int64_t component) {
    const std::uint64_t u = mix64(step_key + static_cast<std::uint64_t>(component) * kGolden1);
    // strictly inside (0, 1)
    const double p = (static_cast<double>(u >> 11) + 0.5) * 0x1.0p-53;
    return inverse_normal_cdf(p);
}

double CounterRng::normal(std::int64_t path, std::int64_t step, std::int64_t component) const {
    return normal(step_key(path_key(path), step), component);
}

double inverse_normal_cdf(double p) {
    // Rational approximations on a central and two tail regions (Wichura-style),
    // accurate to roughly 1e-15 over (0, 1).
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("probability outside (0,1)");
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num =
            q * (((((((2509.0809287301226727 * r + 33430.575583588128105) * r +
                      67265.770927008700853) *
                         r +
                     45921.953931549871457) *
                        r +
                    13731.693765509461125) *
                       r +
                   1971.5909503065514427) *
                      r +
                  133.14166789178437745) *
                     r +
                 3.387132872796366608);
        const double den =
            (((((((5226.495278852545703 * r + 28729.085735721942674) * r +
                  39307.89580009271061) *
                     r +
                 21213.794301586595867) *
                    r +
                5394.1960214247511077) *
                   r +
               687.1870074920579083) *
                  r +
              42.313330701600911252) *
                 r +
             1.0);
        return num / den;
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        const double num =
            (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r +
                  0.24178072517745061177) *
                     r +
                 1.27045825245236838258) *
                    r +
                3.64784832476320460504) *
                   r +
               5.7694972214606914055) *
                  r +
              4.6303378461565452959) *
                 r +
             1.42343711074968357734);
        const double den =
            (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r +
                  0.0151986665636164571966) *
                     r +
                 0.14810397642748007459) *
                    r +
                0.68976733498510000455) *
                   r +
               1.6763848301838038494) *
                  r +
              2.05319162663775882187) *
                 r +
             1.0);
        val = num / den;
    } else {
        r -= 5.0;
        const double num =
            (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  0.0012426609473880784386) *
                     r +
                 0.026532189526576123093) *
                    r +
                0.29656057182850489123) *
                   r +
               1.7848265399172913358) *
                  r +
              5.4637849111641143699) *
                 r +
             6.6579046435011037772);
        const double den =
            (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r +
                  1.8463183175100546818e-5) *
                     r +
                 7.868691311456132591e-4) *
                    r +
                0.0148753612908506148525) *
                   r +
               0.13692988092273580531) *
                  r +
              0.59983220655588793769) *
                 r +
             1.0);
        val = num / den;
    }
    return q < 0.0 ? -val : val;
}

double FactorPaths::xi_at(std::int64_t p, std::int64_t k, int i) const {
    return xi[(p * n_nodes() + k) * n_factors + i];
}

double FactorPaths::dw_at(std::int64_t p, std::int64_t k, int i) const {
    return dw[(p * (n_nodes() - 1) + k) * n_factors + i];
}

namespace {

struct FactorRecorder {
    FactorPaths& out;
    std::vector<std::int64_t>& clips;
    int n;
    std::int64_t n_nodes;

    void node(std::int64_t p, std::int64_t k, double, const detail::NodeState& st) {
        double* xi = out.xi.data() + (p * n_nodes + k) * n;
        for (int i = 0; i < n; ++i) xi[i] = st.xi[i];
        if (k > 0) {
            double* dw = out.dw.data() + (p * (n_nodes - 1) + (k - 1)) * n;
            for (int i = 0; i < n; ++i) dw[i] = st.dw[i];
        }
    }
    void finish_path(std::int64_t p, std::int64_t c) { clips[static_cast<std::size_t>(p)] = c; }
};

} // namespace

FactorPaths simulate_factors(const AffineModelSpec& spec, const SimConfig& sim) {
    require_valid(spec);
    sim.validate();
    const auto model = detail::KernelModel::build(spec, MarketLoadings::from_spec(spec), false);
    const std::int64_t n_steps = sim.n_steps();

    FactorPaths out;
    out.n_paths = sim.n_paths;
    out.n_factors = spec.dim;
    out.seed = sim.seed;
    out.grid.resize(static_cast<std::size_t>(n_steps) + 1);
    const double dt = sim.horizon / static_cast<double>(n_steps);
    for (std::int64_t k = 0; k <= n_steps; ++k)
        out.grid[static_cast<std::size_t>(k)] = dt * static_cast<double>(k);
    out.xi.resize(static_cast<std::size_t>(sim.n_paths * (n_steps + 1) * spec.dim));
    out.dw.resize(static_cast<std::size_t>(sim.n_paths * n_steps * spec.dim));

    std::vector<std::int64_t> clips(static_cast<std::size_t>(sim.n_paths), 0);
    FactorRecorder rec{out, clips, spec.dim, n_steps + 1};
    detail::run_kernel(model, sim, rec);
    out.clip_events = 0;
    for (auto c : clips) out.clip_events += c;
    return out;
}

namespace {

// Records the simulated state price at a fixed set of node indices. The log carries
// the left-endpoint rate integral; upgrading it to the trapezoidal rule only needs the
// endpoint rates, -1/2 dt (r_T - r_0), and halves the weak bias constant at long
// horizons. A per-path cursor keeps the node hook O(1); nodes arrive in ascending
// order within each path.
struct TenorRecorder {
    const std::vector<std::int64_t>& tenor_nodes; // ascending, deduplicated
    std::vector<double>& values;                  // [p * tenor_nodes.size() + j]
    std::vector<std::uint32_t>& cursor;           // [p]
    double dt;
    double r0;

    void node(std::int64_t p, std::int64_t k, double, const detail::NodeState& st) {
        auto& c = cursor[static_cast<std::size_t>(p)];
        if (c >= tenor_nodes.size() || tenor_nodes[c] != k) return;
        values[p * static_cast<std::int64_t>(tenor_nodes.size()) + c] =
            std::exp(st.log_y - 0.5 * dt * (st.r - r0));
        ++c;
    }
    void finish_path(std::int64_t, std::int64_t) {}
};

Estimate estimate_mc(std::span<const double> per_path, bool antithetic) {
    if (!antithetic) return estimate_from_samples(per_path);
    const std::size_t n_pairs = per_path.size() / 2;
    std::vector<double> pair_means(n_pairs);
    for (std::size_t i = 0; i < n_pairs; ++i)
        pair_means[i] = 0.5 * (per_path[2 * i] + per_path[2 * i + 1]);
    return estimate_from_samples(pair_means);
}

} // namespace

std::vector<Estimate> mc_bond_prices(const AffineModelSpec& spec, const SimConfig& sim,
                                     const std::vector<double>& tenors) {
    require_valid(spec);
    sim.validate();
    const std::int64_t n_steps = sim.n_steps();
    const double dt = sim.horizon / static_cast<double>(n_steps);
    std::vector<std::int64_t> tenor_nodes;
    for (double T : tenors) {
        const auto k = std::llround(T / dt);
        if (k < 0 || k > n_steps || std::abs(static_cast<double>(k) * dt - T) > 1e-9)
            throw std::invalid_argument("tenor " + std::to_string(T) +
                                        " does not lie on the simulation grid");
        if (!tenor_nodes.empty() && k <= tenor_nodes.back())
            throw std::invalid_argument("tenors must be strictly increasing");
        tenor_nodes.push_back(k);
    }

    const auto model = detail::KernelModel::build(spec, MarketLoadings::from_spec(spec), false);
    std::vector<double> values(static_cast<std::size_t>(sim.n_paths) * tenors.size(), 0.0);
    std::vector<std::uint32_t> cursor(static_cast<std::size_t>(sim.n_paths), 0);
    TenorRecorder rec{tenor_nodes, values, cursor, dt, spec.short_rate(spec.xi0)};
    detail::run_kernel(model, sim, rec);

    std::vector<Estimate> out;
    out.reserve(tenors.size());
    std::vector<double> column(static_cast<std::size_t>(sim.n_paths));
    for (std::size_t j = 0; j < tenors.size(); ++j) {
        for (std::int64_t p = 0; p < sim.n_paths; ++p)
            column[static_cast<std::size_t>(p)] = values[static_cast<std::size_t>(p) * tenors.size() + j];
        out.push_back(estimate_mc(column, sim.antithetic));
    }
    return out;
}

Estimate mc_bond_price(const AffineModelSpec& spec, const SimConfig& sim, double T) {
    return mc_bond_prices(spec, sim, {T}).front();
}

DriftTestResult martingale_drift_test(const SampledPaths& m) {
    const auto n_times = static_cast<std::int64_t>(m.times.size());
    if (n_times < 2) throw std::invalid_argument("need at least two sample times");
    if (m.n_paths < 2) throw std::invalid_argument("need at least two paths");
    for (std::int64_t b = 0; b + 1 < n_times; ++b)
        if (!(m.times[static_cast<std::size_t>(b) + 1] > m.times[static_cast<std::size_t>(b)]))
            throw std::invalid_argument("sample times must be strictly increasing");

    DriftTestResult res;
    const double total_dt = m.times.back() - m.times.front();
    std::vector<double> incr(static_cast<std::size_t>(m.n_paths));

    for (std::int64_t b = 0; b + 1 < n_times; ++b) {
        const double dt = m.times[static_cast<std::size_t>(b) + 1] - m.times[static_cast<std::size_t>(b)];
        for (std::int64_t p = 0; p < m.n_paths; ++p)
            incr[static_cast<std::size_t>(p)] = (m.at(p, b + 1) - m.at(p, b)) / dt;
        res.buckets.push_back(estimate_from_samples(incr));
    }

    for (std::int64_t p = 0; p < m.n_paths; ++p)
        incr[static_cast<std::size_t>(p)] = (m.at(p, n_times - 1) - m.at(p, 0)) / total_dt;
    res.aggregate = estimate_from_samples(incr);
    res.pass = res.aggregate.contains(0.0);
    return res;
}

} // namespace ramsey
