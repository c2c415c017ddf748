#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "ramsey/affine_model.hpp"

namespace ramsey {

enum class Scheme { EulerFullTruncation };

struct SimConfig {
    std::int64_t n_paths = 0;
    double step = 0.0;
    double horizon = 0.0;
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::EulerFullTruncation;
    bool antithetic = false;
    // Each step's increment is the sum of this many sub-draws, indexed on the refined
    // grid. A run at (step, m) and one at (step/2, m/2) then share the same Brownian
    // path exactly, which makes step-halving comparisons pathwise meaningful.
    int noise_substeps = 1;

    std::int64_t n_steps() const;
    // Throws std::invalid_argument unless step divides horizon within 1e-12 and
    // n_paths >= 2.
    void validate() const;
};

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::int64_t n = 0;
    std::pair<double, double> ci95{0.0, 0.0};

    bool contains(double value) const {
        return value >= ci95.first && value <= ci95.second;
    }
};

nlohmann::json estimate_to_json(const Estimate& e, const std::string& name,
                                std::uint64_t seed, const std::string& verdict);

// Deterministic pairwise summation; the reduction order depends only on the array
// layout, never on thread scheduling.
double pairwise_sum(std::span<const double> values);

Estimate estimate_from_samples(std::span<const double> samples);

// Runs fn(begin, end) over disjoint chunks of [0, n) on a few threads. Writers must
// target disjoint slots; results are independent of the thread count.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& fn);

/// Counter-based generator: every normal draw is a pure function of
/// (seed, path, step, component), so paths are reproducible under any parallel
/// schedule and can be regenerated without storing noise.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t path_key(std::int64_t path) const;
    static std::uint64_t step_key(std::uint64_t path_key, std::int64_t step);
    static double normal(std::uint64_t step_key, std::int64_t component);

    double normal(std::int64_t path, std::int64_t step, std::int64_t component) const;

private:
    std::uint64_t seed_;
};

// Inverse standard normal CDF (Wichura-style rational approximation, ~1e-15 accurate).
double inverse_normal_cdf(double p);

/// Dense factor paths with the driving noise increments stored for reuse.
/// Layout: value(p, k, i) with k = 0..n_steps over grid t_k = k * step.
struct FactorPaths {
    std::vector<double> grid;
    std::int64_t n_paths = 0;
    int n_factors = 0;
    std::uint64_t seed = 0;
    std::vector<double> xi; // [(p * n_nodes + k) * N + i]
    std::vector<double> dw; // [(p * n_steps + k) * N + i], increment over [t_k, t_{k+1}]
    std::int64_t clip_events = 0;

    std::int64_t n_nodes() const { return static_cast<std::int64_t>(grid.size()); }
    double xi_at(std::int64_t p, std::int64_t k, int i) const;
    double dw_at(std::int64_t p, std::int64_t k, int i) const;
};

// Euler full-truncation scheme:
//   xi_{k+1} = xi_k + (drift_matrix xi_k + drift_intercept) dt
//            + vol_loading diag(sqrt(lambda+(xi_k))) dW_k.
FactorPaths simulate_factors(const AffineModelSpec& spec, const SimConfig& sim);

// Monte Carlo estimate of E[Y_T] at t = 0 (Y the optimal state price density, Y_0 = 1),
// streaming paths without storing them. With sim.antithetic the estimator averages
// mirrored pairs and reports the pair-level standard error.
Estimate mc_bond_price(const AffineModelSpec& spec, const SimConfig& sim, double T);

// One factor/state-price sweep over the full horizon, recording E[Y_T] per tenor.
std::vector<Estimate> mc_bond_prices(const AffineModelSpec& spec, const SimConfig& sim,
                                     const std::vector<double>& tenors);

/// Process values sampled at a fixed set of times, one row per path.
struct SampledPaths {
    std::vector<double> times;
    std::int64_t n_paths = 0;
    std::vector<double> values; // [p * times.size() + k]

    double at(std::int64_t p, std::int64_t k) const {
        return values[p * static_cast<std::int64_t>(times.size()) + k];
    }
};

struct DriftTestResult {
    Estimate aggregate;            // drift per unit time over the whole window
    std::vector<Estimate> buckets; // drift per unit time, per time bucket
    bool pass = false;             // 0 inside the aggregate 95% CI
};

// Regresses increments of a candidate martingale on time across paths and buckets;
// the verdict passes iff 0 lies in the 95% CI of the aggregate drift.
DriftTestResult martingale_drift_test(const SampledPaths& m);

} // namespace ramsey
