#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "unbiasedmc/estimator.hpp"
#include "unbiasedmc/model.hpp"
#include "unbiasedmc/random.hpp"

// One-dimensional unbiased Monte Carlo scheme.
//
// Time stepping is randomized by the jump times of an auxiliary Poisson
// process with intensity lambda.  Between jumps the state follows an exactly
// simulable polynomial map of (dt, dW) whose coefficients are frozen at the
// segment start; the mismatch with the true generator is re-injected at each
// jump, compensated by 1/lambda, and carried along the path as a second-order
// differential operator (the correction state).  The final segment uses
// antithetic sampling to keep the contribution bounded as dt -> 0.

namespace umc {

enum class RecursionVariant {
    standard,  // the default correction recursion
    alt        // alternative half-weight placement, kept for validation; biased
};

namespace detail {
struct VariantWeights {
    double cross;     // weight of the b * (dsigma/sigma) * A_SS transport term
    double dc;        // gain on the dC/lambda accumulation
    double second;    // weight of A_SS terms in d and in the terminal S0 leg
};
inline constexpr VariantWeights variant_weights(RecursionVariant v) {
    return v == RecursionVariant::standard ? VariantWeights{0.5, 1.0, 0.5}
                                           : VariantWeights{1.0, 0.5, 1.0};
}
}  // namespace detail

/// Polynomial-map coefficients frozen at (t_k, S_k), plus the raw model
/// values they came from.
struct StepCoeffs1D {
    double mu = 0.0;
    double sigma = 0.0;
    double dmu = 0.0;    // d mu / dS
    double dsigma = 0.0; // d sigma / dS
    double f01 = 0.0;    // sigma
    double f02 = 0.0;    // sigma * dsigma
    double f10 = 0.0;    // mu - sigma * dsigma / 2
    double f11 = 0.0;    // sigma * dmu
};

template <ScalarModel M>
StepCoeffs1D step_coeffs(const M& model, double t, double s,
                         std::uint64_t path_index = static_cast<std::uint64_t>(-1)) {
    StepCoeffs1D c;
    c.mu = model.mu(t, s);
    c.sigma = model.sigma(t, s);
    if (!(c.sigma > 0.0))
        throw NonPositiveVol("step_coeffs: sigma <= 0", t, s, path_index);
    c.dmu = model.dmu_ds(t, s);
    c.dsigma = model.dsigma_ds(t, s);
    c.f01 = c.sigma;
    c.f02 = c.sigma * c.dsigma;
    c.f10 = c.mu - 0.5 * c.f02;
    c.f11 = c.sigma * c.dmu;
    return c;
}

/// State increment over one segment:
/// f(dt, dW) = f10 dt + f01 dW + f02 dW^2 / 2 + f11 dt dW, with f(0,0) = 0.
inline double apply_f(const StepCoeffs1D& c, double dt, double dw) {
    return c.f10 * dt + c.f01 * dw + 0.5 * c.f02 * dw * dw + c.f11 * dt * dw;
}

/// Drift of the simulated segment process at offset (dt, dW).
inline double hat_mu(const StepCoeffs1D& c, double /*dt*/, double dw) {
    return c.mu + c.f11 * dw;
}

/// Volatility of the simulated segment process at offset (dt, dW).
inline double hat_sigma(const StepCoeffs1D& c, double dt, double dw) {
    return c.sigma * (1.0 + c.dsigma * dw + c.dmu * dt);
}

struct DeltaTerms1D {
    double dmu = 0.0;  // mu(next point) - hat drift on the previous segment
    double dc = 0.0;   // sigma^2(next point) - hat variance on the previous segment
};

/// Generator mismatch at the arrival point of a segment, both O(dt) by the
/// choice of f.
template <ScalarModel M>
DeltaTerms1D delta_terms(const M& model, double t_next, double s_next,
                         const StepCoeffs1D& prev, double dt_prev, double dw_prev) {
    DeltaTerms1D d;
    d.dmu = model.mu(t_next, s_next) - hat_mu(prev, dt_prev, dw_prev);
    // sigma_next^2 - hat_sigma^2 in difference form, so constant-coefficient
    // models give exactly zero
    const double sig_next = model.sigma(t_next, s_next);
    const double de = prev.f02 * dw_prev + prev.f11 * dt_prev;  // hat_sigma - sigma
    d.dc = (sig_next * sig_next - prev.sigma * prev.sigma) -
           (prev.sigma * de + de * prev.sigma + de * de);
    return d;
}

/// Accumulated corrective operator 1 + A_S d/dS + (A_SS/2) d^2/dS^2.
struct CorrectionState1D {
    double a_s = 0.0;
    double a_ss = 0.0;
};

/// Frame transport factor of one segment.
inline double b_factor(const StepCoeffs1D& c, double dt, double dw) {
    return c.dsigma * dw + c.dmu * dt;
}

/// Weight realizing the corrective operator on the Gaussian kernel.
inline double d_weight(const CorrectionState1D& st, const StepCoeffs1D& c, double dt,
                       double dw, RecursionVariant v = RecursionVariant::standard) {
    const auto w = detail::variant_weights(v);
    const double s2 = c.sigma * c.sigma;
    return 1.0 + (st.a_s / c.sigma - w.second * st.a_ss * c.dsigma / s2) * (dw / dt) +
           w.second * (st.a_ss / s2) * (dw * dw - dt) / (dt * dt);
}

/// One step of the correction recursion.
inline CorrectionState1D update_correction(const CorrectionState1D& st, double b, double d,
                                           const DeltaTerms1D& delta, double lambda,
                                           const StepCoeffs1D& c,
                                           RecursionVariant v = RecursionVariant::standard) {
    const auto w = detail::variant_weights(v);
    CorrectionState1D out;
    out.a_s = (1.0 + b) * st.a_s - w.cross * b * (c.dsigma / c.sigma) * st.a_ss +
              d * delta.dmu / lambda;
    out.a_ss = (1.0 + b) * (1.0 + b) * st.a_ss + w.dc * d * delta.dc / lambda;
    return out;
}

/// Antithetic terminal contribution.  The S0 leg subtracts a null-expectation
/// term so constant payoffs are reproduced exactly.
template <typename H>
double terminal_contribution(const CorrectionState1D& st, const StepCoeffs1D& cp,
                             double s_p, double dt_p, double dw_p, const H& payoff,
                             RecursionVariant v = RecursionVariant::standard) {
    const auto w = detail::variant_weights(v);
    const double s_plus = s_p + apply_f(cp, dt_p, dw_p);
    const double s_minus = s_p + apply_f(cp, dt_p, -dw_p);
    const double s_zero = s_p + cp.mu * dt_p;
    const double d_plus = d_weight(st, cp, dt_p, dw_p, v);
    const double d_minus = d_weight(st, cp, dt_p, -dw_p, v);
    const double w_zero =
        w.second * (st.a_ss / (cp.sigma * cp.sigma)) * (dw_p * dw_p - dt_p) / (dt_p * dt_p);
    return 0.5 * d_plus * payoff(s_plus) + 0.5 * d_minus * payoff(s_minus) -
           w_zero * payoff(s_zero);
}

// ---------------------------------------------------------------------------
// Deterministic discounting
// ---------------------------------------------------------------------------

namespace detail {

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double integrate(const F& f, double a, double b, double tol = 1e-12) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

template <typename M>
concept HasConstantRate = requires(const M m) { m.constant_rate(); };

template <typename M>
concept HasDomain = requires(const M m) { m.domain(); };

}  // namespace detail

/// int_{t0}^{T} r(t) dt, closed form for constant rates, adaptive quadrature
/// (absolute tolerance 1e-12) otherwise.
template <ScalarModel M>
double rate_integral(const M& model, double t0, double T) {
    if constexpr (detail::HasConstantRate<M>) {
        if (const auto r = model.constant_rate()) return *r * (T - t0);
    }
    return detail::integrate([&](double t) { return model.rate(t); }, t0, T);
}

// ---------------------------------------------------------------------------
// Path simulation
// ---------------------------------------------------------------------------

/// Full record of one simulated path, for diagnostics and tests.
struct PathRecord1D {
    std::vector<double> times;   // t_0 ... t_p
    std::vector<double> states;  // S at those times
    std::vector<double> dts;     // per-segment dt, terminal segment last
    std::vector<double> dws;     // per-segment dW, terminal segment last
    std::vector<CorrectionState1D> corrections;  // state after each update
    std::vector<double> d_weights;               // d_k at each intermediate jump
    double p_t = 0.0;
    double discount = 1.0;
};

struct PathOutcome1D {
    double p_t = 0.0;       // undiscounted terminal contribution
    std::uint32_t jumps = 0;
    bool terminal_floored = false;
    bool domain_exited = false;
};

template <ScalarModel M, typename H>
PathOutcome1D simulate_path_1d(const M& model, const H& payoff, double t0, double s0,
                               double T, double lambda, RecursionVariant variant,
                               PathStream& stream, std::uint64_t path_index = 0,
                               PathRecord1D* record = nullptr) {
    PathOutcome1D out;
    double t = t0;
    double s = s0;
    CorrectionState1D state;
    StepCoeffs1D coeffs = step_coeffs(model, t, s, path_index);

    if (record) {
        *record = PathRecord1D{};
        record->times.push_back(t);
        record->states.push_back(s);
        record->discount = std::exp(-rate_integral(model, t0, T));
    }

    auto check_domain = [&](double value) {
        if constexpr (detail::HasDomain<M>) {
            if (const auto box = model.domain()) {
                if (!(value > box->first && value < box->second)) out.domain_exited = true;
            }
        }
    };
    check_domain(s);

    for (;;) {
        const double dt = draw_exponential(lambda, stream.uniform01());
        if (!(t + dt < T)) {
            double dt_p = T - t;
            if (dt_p < kMinTerminalDt) {
                dt_p = kMinTerminalDt;
                out.terminal_floored = true;
            }
            const double dw_p = std::sqrt(dt_p) * stream.gaussian();
            out.p_t = terminal_contribution(state, coeffs, s, dt_p, dw_p, payoff, variant);
            if (record) {
                record->dts.push_back(dt_p);
                record->dws.push_back(dw_p);
                record->p_t = out.p_t;
            }
            return out;
        }
        const double dw = std::sqrt(dt) * stream.gaussian();
        const double s_next = s + apply_f(coeffs, dt, dw);
        const double t_next = t + dt;
        check_domain(s_next);

        const StepCoeffs1D coeffs_next = step_coeffs(model, t_next, s_next, path_index);
        const DeltaTerms1D delta = delta_terms(model, t_next, s_next, coeffs, dt, dw);
        const double d_k = d_weight(state, coeffs, dt, dw, variant);
        const double b_k = b_factor(coeffs, dt, dw);
        state = update_correction(state, b_k, d_k, delta, lambda, coeffs, variant);

        if (record) {
            record->times.push_back(t_next);
            record->states.push_back(s_next);
            record->dts.push_back(dt);
            record->dws.push_back(dw);
            record->corrections.push_back(state);
            record->d_weights.push_back(d_k);
        }

        t = t_next;
        s = s_next;
        coeffs = coeffs_next;
        ++out.jumps;
    }
}

/// Unbiased estimate of E[exp(-int r) h(S_T)] over n_paths independent paths.
template <ScalarModel M, typename H>
EstimatorResult price_1d(const M& model, const H& payoff, double s0, double T,
                         double lambda, std::uint64_t n_paths, std::uint64_t seed,
                         RecursionVariant variant = RecursionVariant::standard,
                         const RunOptions& opts = {}) {
    const double t0 = 0.0;
    const double discount = std::exp(-rate_integral(model, t0, T));
    if (opts.diagnostics) opts.diagnostics->resize(n_paths);
    auto result = run_paths(n_paths, opts.threads, [&](std::uint64_t i, PathExtras& extras) {
        PathStream stream(seed, i);
        const PathOutcome1D o =
            simulate_path_1d(model, payoff, t0, s0, T, lambda, variant, stream, i);
        extras.terminal_floored = o.terminal_floored;
        extras.domain_exited = o.domain_exited;
        if (opts.diagnostics) (*opts.diagnostics)[i] = PathDiag{i, o.jumps, o.p_t, discount};
        return discount * o.p_t;
    });
    return result;
}

}  // namespace umc
