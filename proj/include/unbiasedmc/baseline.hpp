#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "unbiasedmc/estimator.hpp"
#include "unbiasedmc/model.hpp"
#include "unbiasedmc/random.hpp"
#include "unbiasedmc/unbiased1d.hpp"

// Biased reference schemes on a uniform time grid, for benchmarking the
// unbiased estimator against.

namespace umc {

enum class BaselineScheme { euler, milstein };

/// Uniform grid over [t0, T].
struct GridSpec {
    int n_steps = 1;
};

template <ScalarModel M>
double euler_step(const M& model, double t, double s, double dt, double dw) {
    return s + model.mu(t, s) * dt + model.sigma(t, s) * dw;
}

template <ScalarModel M>
double milstein_step(const M& model, double t, double s, double dt, double dw) {
    const double sig = model.sigma(t, s);
    return euler_step(model, t, s, dt, dw) +
           0.5 * sig * model.dsigma_ds(t, s) * (dw * dw - dt);
}

template <ScalarModel M, typename H>
EstimatorResult price_baseline(BaselineScheme scheme, const M& model, const H& payoff,
                               double s0, double T, int n_steps, std::uint64_t n_paths,
                               std::uint64_t seed, const RunOptions& opts = {}) {
    if (n_steps < 1) throw std::invalid_argument("price_baseline: n_steps must be >= 1");
    const double t0 = 0.0;
    const double dt = (T - t0) / n_steps;
    const double sqrt_dt = std::sqrt(dt);
    const double discount = std::exp(-rate_integral(model, t0, T));
    if (opts.diagnostics) opts.diagnostics->resize(n_paths);
    return run_paths(n_paths, opts.threads, [&](std::uint64_t i, PathExtras&) {
        PathStream stream(seed, i);
        double s = s0;
        double t = t0;
        for (int k = 0; k < n_steps; ++k) {
            const double dw = sqrt_dt * stream.gaussian();
            s = scheme == BaselineScheme::euler ? euler_step(model, t, s, dt, dw)
                                                : milstein_step(model, t, s, dt, dw);
            t += dt;
        }
        const double h = payoff(s);
        if (opts.diagnostics) (*opts.diagnostics)[i] = PathDiag{i, 0, h, discount};
        return discount * h;
    });
}

}  // namespace umc
