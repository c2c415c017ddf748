#pragma once

// Internal Euler full-truncation kernel shared by the Monte Carlo estimators and the
// path-bundle builders. Paths are advanced with plain arrays; a Recorder template
// parameter receives every node so callers can store dense paths, sample a few times,
// or stream reductions without materializing anything.

#include <cmath>
#include <cstdint>
#include <vector>

#include "ramsey/affine_model.hpp"
#include "ramsey/market.hpp"
#include "ramsey/mc.hpp"

namespace ramsey::detail {

struct KernelModel {
    int n = 0;
    std::vector<double> rho;      // drift matrix, row-major [j*n+i]
    std::vector<double> delta0;   // [j]
    std::vector<double> theta;    // vol loading, row-major [j*n+i]
    std::vector<double> lam0;     // [i]
    std::vector<double> lam_grad; // eigen loading rows, [i*n+j]
    std::vector<double> a_r;
    double b_r = 0.0;
    std::vector<double> a_zeta;
    double b_zeta = 0.0;
    std::vector<double> w_y;   // Theta^T a_Y (state price volatility per component)
    std::vector<double> w_eta; // Theta^T a_YR (hedgeable risk premium)
    std::vector<double> w_x;   // Theta^T a_X (portfolio), constant case
    const std::vector<double>* w_x_steps = nullptr; // per-step portfolio [k*n+i]
    std::vector<double> xi0;
    bool with_wealth = false;

    static KernelModel build(const AffineModelSpec& spec, const MarketLoadings& loadings,
                             bool with_wealth);
};

inline double dot_row(const std::vector<double>& m, int row, int n, const double* v) {
    const double* r = m.data() + static_cast<std::size_t>(row) * n;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += r[i] * v[i];
    return acc;
}

inline double affine_eval(const std::vector<double>& a, double b, const double* xi, int n) {
    double acc = b;
    for (int i = 0; i < n; ++i) acc += a[i] * xi[i];
    return acc;
}

// sqrt of the truncated eigenvariances at the current state; returns the clip count.
inline int fill_vol_scales(const KernelModel& m, const double* xi, double* s) {
    int clips = 0;
    for (int i = 0; i < m.n; ++i) {
        double lam = m.lam0[i] + dot_row(m.lam_grad, i, m.n, xi);
        if (lam < 0.0) {
            lam = 0.0;
            ++clips;
        }
        s[i] = std::sqrt(lam);
    }
    return clips;
}

// Wealth log-increment over one step; recomputes the vol scales from (xi, dw) so the
// two-phase bundle fill reproduces the joint simulation bitwise.
inline double wealth_log_increment(const KernelModel& m, const double* xi, const double* dw,
                                   const double* w_x, double r, double zeta, double dt) {
    double qx = 0.0, qxe = 0.0, mx = 0.0;
    for (int i = 0; i < m.n; ++i) {
        double lam = m.lam0[i] + dot_row(m.lam_grad, i, m.n, xi);
        if (lam < 0.0) lam = 0.0;
        const double s = std::sqrt(lam);
        const double xv = w_x[i] * s;
        qx += xv * xv;
        qxe += xv * (m.w_eta[i] * s);
        mx += xv * dw[i];
    }
    return (r + qxe - zeta - 0.5 * qx) * dt + mx;
}

inline double consumption_value(double zeta, double log_x) { return zeta * std::exp(log_x); }

struct NodeState {
    const double* xi;
    const double* dw; // increments of the step just taken; nullptr at the first node
    double log_y = 0.0;
    double log_x = 0.0;
    double int_r = 0.0;
    double int_zeta = 0.0;
    double r = 0.0;
    double zeta = 0.0;
};

// Recorder concept:
//   void node(std::int64_t path, std::int64_t k, double t, const NodeState&);
//   void finish_path(std::int64_t path, std::int64_t clip_events);
template <class Recorder>
void run_kernel(const KernelModel& m, const SimConfig& sim, Recorder&& rec) {
    sim.validate();
    const std::int64_t n_steps = sim.n_steps();
    const double dt = sim.horizon / static_cast<double>(n_steps);
    const int sub = sim.noise_substeps;
    const double sqrt_sub_dt = std::sqrt(dt / static_cast<double>(sub));
    const int n = m.n;
    const CounterRng rng(sim.seed);

    parallel_for(sim.n_paths, [&](std::int64_t p0, std::int64_t p1) {
        std::vector<double> xi(n), xin(n), s(n), dwv(n);
        for (std::int64_t p = p0; p < p1; ++p) {
            const std::int64_t stream = sim.antithetic ? p / 2 : p;
            const double sign = (sim.antithetic && (p & 1)) ? -1.0 : 1.0;
            const std::uint64_t path_key = rng.path_key(stream);

            for (int i = 0; i < n; ++i) xi[i] = m.xi0[i];
            NodeState st;
            st.xi = xi.data();
            st.r = affine_eval(m.a_r, m.b_r, xi.data(), n);
            st.zeta = affine_eval(m.a_zeta, m.b_zeta, xi.data(), n);
            rec.node(p, 0, 0.0, st);

            std::int64_t clips = 0;
            for (std::int64_t k = 0; k < n_steps; ++k) {
                clips += fill_vol_scales(m, xi.data(), s.data());
                for (int i = 0; i < n; ++i) dwv[i] = 0.0;
                for (int j = 0; j < sub; ++j) {
                    const std::uint64_t step_key = CounterRng::step_key(path_key, k * sub + j);
                    for (int i = 0; i < n; ++i)
                        dwv[i] += sign * CounterRng::normal(step_key, i) * sqrt_sub_dt;
                }

                const double* w_x =
                    m.w_x_steps ? m.w_x_steps->data() + static_cast<std::size_t>(k) * n
                                : m.w_x.data();
                double qy = 0.0, my = 0.0;
                for (int i = 0; i < n; ++i) {
                    const double yv = m.w_y[i] * s[i];
                    qy += yv * yv;
                    my += yv * dwv[i];
                }
                st.log_y += (-st.r - 0.5 * qy) * dt + my;
                if (m.with_wealth)
                    st.log_x +=
                        wealth_log_increment(m, xi.data(), dwv.data(), w_x, st.r, st.zeta, dt);
                st.int_r += st.r * dt;
                st.int_zeta += st.zeta * dt;

                for (int j = 0; j < n; ++j) {
                    double diff = 0.0;
                    const double* th = m.theta.data() + static_cast<std::size_t>(j) * n;
                    for (int i = 0; i < n; ++i) diff += th[i] * s[i] * dwv[i];
                    xin[j] = xi[j] + (dot_row(m.rho, j, n, xi.data()) + m.delta0[j]) * dt + diff;
                }
                xi.swap(xin);

                st.xi = xi.data();
                st.dw = dwv.data();
                st.r = affine_eval(m.a_r, m.b_r, xi.data(), n);
                st.zeta = affine_eval(m.a_zeta, m.b_zeta, xi.data(), n);
                rec.node(p, k + 1, dt * static_cast<double>(k + 1), st);
            }
            rec.finish_path(p, clips);
        }
    });
}

} // namespace ramsey::detail
