#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "unbiasedmc/estimator.hpp"
#include "unbiasedmc/linalg.hpp"
#include "unbiasedmc/model.hpp"
#include "unbiasedmc/random.hpp"

// Multidimensional unbiased scheme with stochastic discount rates.
//
// Each segment carries two changes of variable: a space map X = X_k + f(dt,dW)
// whose Jacobian frame e converts Brownian and state derivatives into each
// other, and a numeraire map g whose exponential accumulates the stochastic
// discount factor.  The corrective operator is propagated as
// (A, A^a, A^{ab}), acting through Gaussian weights at each Poisson time, and
// the terminal segment is handled by antithetic sampling with per-leg
// discounts.

namespace umc {

/// Per-segment polynomial coefficients frozen at (t_k, X_k).
struct StepCoeffsND {
    int d = 0;
    std::vector<double> mu;  // model drift at the segment start
    double r = 0.0;          // model rate at the segment start
    Matrix cov;              // model covariance (symmetrized)
    Matrix sigma;            // lower-triangular Cholesky factor of cov (= f01)
    Matrix e_inv;            // sigma^{-1}
    Matrix dmu;              // (a,g) -> d_g mu^a
    Tensor3 f02;             // curvature tensor (a, i, j), symmetric in (i, j)
    std::vector<double> f10;
    Matrix f11;              // (a, i)
    double g10 = 0.0;
    std::vector<double> g11;  // (i)
};

template <VectorModel M>
StepCoeffsND step_coeffs_nd(const M& model, double t, const std::vector<double>& x) {
    StepCoeffsND c;
    c.d = model.dim();
    const int d = c.d;
    c.mu = model.mu(t, x);
    c.r = model.rate(t, x);
    c.cov = symmetrized(model.cov(t, x));
    c.sigma = cholesky(c.cov);
    c.e_inv = invert_lower_triangular(c.sigma);
    c.dmu = model.dmu(t, x);
    const Tensor3 dc = model.dcov(t, x);
    const std::vector<double> dr = model.drate(t, x);

    // f02: half of (sigma e_inv dC + transpose-in-(i,j) - e_inv e_inv C dC).
    Tensor3 a1(d);  // a1(g,a,i) = sum_b e_inv(i,b) dC(g,a,b)
    for (int g = 0; g < d; ++g)
        for (int a = 0; a < d; ++a)
            for (int i = 0; i < d; ++i) {
                double s = 0.0;
                for (int b = 0; b < d; ++b) s += c.e_inv(i, b) * dc(g, a, b);
                a1(g, a, i) = s;
            }
    Tensor3 term1(d);  // term1(a,i,j) = sum_g sigma(g,j) a1(g,a,i)
    for (int a = 0; a < d; ++a)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                double s = 0.0;
                for (int g = 0; g < d; ++g) s += c.sigma(g, j) * a1(g, a, i);
                term1(a, i, j) = s;
            }
    Tensor3 h1(d);  // h1(g,i,b) = sum_a e_inv(i,a) dC(g,a,b)
    for (int g = 0; g < d; ++g)
        for (int i = 0; i < d; ++i)
            for (int b = 0; b < d; ++b) {
                double s = 0.0;
                for (int a = 0; a < d; ++a) s += c.e_inv(i, a) * dc(g, a, b);
                h1(g, i, b) = s;
            }
    Tensor3 h(d);  // h(g,i,j) = sum_b e_inv(j,b) h1(g,i,b)
    for (int g = 0; g < d; ++g)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                double s = 0.0;
                for (int b = 0; b < d; ++b) s += c.e_inv(j, b) * h1(g, i, b);
                h(g, i, j) = s;
            }
    c.f02 = Tensor3(d);
    for (int a = 0; a < d; ++a)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                double t3 = 0.0;
                for (int g = 0; g < d; ++g) t3 += c.cov(a, g) * h(g, i, j);
                const double v = 0.5 * (term1(a, i, j) + term1(a, j, i) - t3);
                c.f02(a, i, j) = v;
            }
    // enforce exact symmetry in the Brownian indices
    for (int a = 0; a < d; ++a)
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j) {
                const double v = 0.5 * (c.f02(a, i, j) + c.f02(a, j, i));
                c.f02(a, i, j) = v;
                c.f02(a, j, i) = v;
            }

    // f10 via the log-det form: mu - dC/2 + C dlogdet(C)/4,
    // with d_g log det C = Tr(C^{-1} d_g C) and C^{-1} = e_inv^T e_inv.
    Matrix cinv(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double s = 0.0;
            for (int a = 0; a < d; ++a) s += c.e_inv(a, i) * c.e_inv(a, j);
            cinv(i, j) = s;
        }
    std::vector<double> dlogdet(d, 0.0);
    for (int g = 0; g < d; ++g) {
        double s = 0.0;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) s += cinv(i, j) * dc(g, j, i);
        dlogdet[g] = s;
    }
    c.f10.assign(d, 0.0);
    for (int a = 0; a < d; ++a) {
        double div = 0.0;
        for (int b = 0; b < d; ++b) div += dc(b, a, b);
        double clog = 0.0;
        for (int g = 0; g < d; ++g) clog += c.cov(a, g) * dlogdet[g];
        c.f10[a] = c.mu[a] - 0.5 * div + 0.25 * clog;
    }

    c.f11 = Matrix(d);
    for (int a = 0; a < d; ++a)
        for (int i = 0; i < d; ++i) {
            double s = 0.0;
            for (int g = 0; g < d; ++g) s += c.sigma(g, i) * c.dmu(a, g);
            c.f11(a, i) = s;
        }

    c.g10 = c.r;
    c.g11.assign(d, 0.0);
    for (int i = 0; i < d; ++i) {
        double s = 0.0;
        for (int g = 0; g < d; ++g) s += c.sigma(g, i) * dr[g];
        c.g11[i] = s;
    }
    return c;
}

/// State increment over one segment.
inline std::vector<double> apply_f_nd(const StepCoeffsND& c, double dt,
                                      const std::vector<double>& dw) {
    const int d = c.d;
    std::vector<double> dx(d, 0.0);
    for (int a = 0; a < d; ++a) {
        double s = c.f10[a] * dt;
        for (int i = 0; i < d; ++i) {
            s += c.sigma(a, i) * dw[i] + c.f11(a, i) * dt * dw[i];
            for (int j = 0; j < d; ++j) s += 0.5 * c.f02(a, i, j) * dw[i] * dw[j];
        }
        dx[a] = s;
    }
    return dx;
}

/// Numeraire exponent over one segment; the discount step is exp(-g).
inline double apply_g(const StepCoeffsND& c, double dt, const std::vector<double>& dw) {
    double g = c.g10 * dt;
    for (int i = 0; i < c.d; ++i) g += c.g11[i] * dt * dw[i];
    return g;
}

/// Frame offset e(dt,dW) - e(0,0); zero for constant-coefficient models.
inline Matrix frame_offset(const StepCoeffsND& c, double dt, const std::vector<double>& dw) {
    const int d = c.d;
    Matrix off(d);
    for (int a = 0; a < d; ++a)
        for (int i = 0; i < d; ++i) {
            double s = c.f11(a, i) * dt;
            for (int j = 0; j < d; ++j) s += c.f02(a, i, j) * dw[j];
            off(a, i) = s;
        }
    return off;
}

/// Frame e(dt,dW) = d f / d dW at the given offset.
inline Matrix frame_at(const StepCoeffsND& c, double dt, const std::vector<double>& dw) {
    Matrix e = frame_offset(c, dt, dw);
    for (int a = 0; a < c.d; ++a)
        for (int i = 0; i < c.d; ++i) e(a, i) += c.sigma(a, i);
    return e;
}

/// Transport matrix b with e_inv(0,0) e(dt,dW) = I + b.
inline Matrix b_matrix(const StepCoeffsND& c, double dt, const std::vector<double>& dw) {
    const int d = c.d;
    Matrix b(d);
    for (int a = 0; a < d; ++a)
        for (int g = 0; g < d; ++g) {
            double s = c.dmu(a, g) * dt;
            for (int i = 0; i < d; ++i) {
                double f = 0.0;
                for (int j = 0; j < d; ++j) f += c.f02(a, i, j) * dw[j];
                s += f * c.e_inv(i, g);
            }
            b(a, g) = s;
        }
    return b;
}

/// Per-segment frame data consumed by the correction recursion.
struct SegmentFrame {
    Frame e0;                 // frame at the segment start and its inverse
    Tensor3 c;                // curvature tensor
    Matrix b;                 // transport built from this segment's (dt, dW)
    Matrix e_end;             // frame at the segment end, e(dt, dW)
    std::vector<double> g11;  // numeraire gradient of the segment
    double dt = 0.0;
};

inline SegmentFrame make_segment_frame(const StepCoeffsND& coeffs, double dt,
                                       const std::vector<double>& dw) {
    return SegmentFrame{Frame{coeffs.sigma, coeffs.e_inv}, coeffs.f02,
                        b_matrix(coeffs, dt, dw),  frame_at(coeffs, dt, dw),
                        coeffs.g11,                dt};
}

/// Malliavin-type weights of the discounted Gaussian kernel, differentiated
/// through the increment slot of the discount.
struct WeightsND {
    std::vector<double> w1;  // W_a
    Matrix w2;               // W_ab
};

inline WeightsND weights_nd(const StepCoeffsND& c, double dt, const std::vector<double>& dw) {
    const int d = c.d;
    WeightsND w;
    w.w1.assign(d, 0.0);
    for (int a = 0; a < d; ++a) w.w1[a] = dw[a] / dt + c.g11[a] * dt;
    w.w2 = Matrix(d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            w.w2(a, b) = w.w1[a] * w.w1[b] - (a == b ? 1.0 / dt : 0.0);
    return w;
}

/// Weights of the Gaussian density alone.  The simulated segment process is
/// the flow of coefficient fields frozen at the segment start, so its kernel
/// carries the numeraire anchored at the start point: derivatives with
/// respect to the starting state see the density factor only, and the
/// numeraire sensitivity enters the corrective transport instead (see
/// update_correction_nd).  These are the weights the recursion consumes.
inline WeightsND gaussian_weights_nd(int d, double dt, const std::vector<double>& dw) {
    WeightsND w;
    w.w1.assign(d, 0.0);
    for (int a = 0; a < d; ++a) w.w1[a] = dw[a] / dt;
    w.w2 = Matrix(d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            w.w2(a, b) = w.w1[a] * w.w1[b] - (a == b ? 1.0 / dt : 0.0);
    return w;
}

/// Generator and rate mismatches at the arrival point of a segment.  All are
/// O(dt) and exactly zero for constant coefficients with constant rate.
struct DeltaTermsND {
    double dr = 0.0;
    std::vector<double> dmu;
    Matrix dc;
};

template <VectorModel M>
DeltaTermsND delta_terms_nd(const M& model, double t_next, const std::vector<double>& x_next,
                            const StepCoeffsND& prev, double dt, const std::vector<double>& dw) {
    const int d = prev.d;
    DeltaTermsND out;
    const std::vector<double> mu_next = model.mu(t_next, x_next);
    const Matrix c_next = symmetrized(model.cov(t_next, x_next));
    const double r_next = model.rate(t_next, x_next);

    const Matrix de = frame_offset(prev, dt, dw);

    out.dmu.assign(d, 0.0);
    for (int a = 0; a < d; ++a) {
        double s = mu_next[a] - prev.mu[a];
        for (int i = 0; i < d; ++i) {
            s -= prev.f11(a, i) * dw[i];
            s += prev.g11[i] * (prev.sigma(a, i) + de(a, i)) * dt;
        }
        out.dmu[a] = s;
    }

    // dC in difference form: (C_next - C_prev) - (sigma de^T + de sigma^T + de de^T)
    out.dc = Matrix(d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            double s = c_next(a, b) - prev.cov(a, b);
            for (int i = 0; i < d; ++i)
                s -= prev.sigma(a, i) * de(b, i) + de(a, i) * prev.sigma(b, i) +
                     de(a, i) * de(b, i);
            out.dc(a, b) = s;
        }

    double g11_sq = 0.0;
    double g11_dw = 0.0;
    for (int i = 0; i < d; ++i) {
        g11_sq += prev.g11[i] * prev.g11[i];
        g11_dw += prev.g11[i] * dw[i];
    }
    out.dr = r_next - prev.r - g11_dw + 0.5 * g11_sq * dt * dt;
    return out;
}

/// Accumulated corrective operator A + A^a d_a + (A^{ab}/2) d_a d_b.
struct CorrectionStateND {
    double a = 1.0;
    std::vector<double> a1;
    Matrix a2;
};

inline CorrectionStateND init_correction_nd(int d) {
    return CorrectionStateND{1.0, std::vector<double>(d, 0.0), Matrix(d)};
}

namespace detail {
/// A2 pulled back to Brownian indices: e_inv A2 e_inv^T.
inline Matrix brownian_a2(const CorrectionStateND& st, const Matrix& e_inv) {
    const int d = e_inv.dim();
    Matrix b2(d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            double s = 0.0;
            for (int i = 0; i < d; ++i) {
                double ti = 0.0;
                for (int j = 0; j < d; ++j) ti += st.a2(i, j) * e_inv(b, j);
                s += e_inv(a, i) * ti;
            }
            b2(a, b) = s;
        }
    return b2;
}
}  // namespace detail

/// Scalar effect of the corrective operator realized by weight multiplication.
inline double d_scalar(const CorrectionStateND& st, const SegmentFrame& frame,
                       const WeightsND& w) {
    const int d = frame.e0.e.dim();
    const Matrix& e_inv = frame.e0.e_inv;
    double out = st.a;
    for (int a = 0; a < d; ++a) {
        double s = 0.0;
        for (int i = 0; i < d; ++i) s += e_inv(a, i) * st.a1[i];
        out += s * w.w1[a];
    }
    const Matrix b2 = detail::brownian_a2(st, e_inv);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            double curv = 0.0;
            for (int cidx = 0; cidx < d; ++cidx) {
                double eg = 0.0;
                for (int g = 0; g < d; ++g) eg += e_inv(cidx, g) * frame.c(g, a, b);
                curv += eg * w.w1[cidx];
            }
            out += 0.5 * b2(a, b) * (w.w2(a, b) - curv);
        }
    return out;
}

/// One step of the correction recursion.  Besides the frame transport and
/// the jump terms, the zeroth- and first-order parts pick up the sensitivity
/// of the segment's anchored numeraire to the starting state (the g11 dt
/// terms); those vanish for deterministic rates.
inline CorrectionStateND update_correction_nd(const CorrectionStateND& st,
                                              const SegmentFrame& frame, double d_k,
                                              const DeltaTermsND& delta, double lambda) {
    const int d = frame.e0.e.dim();
    const Matrix& e_inv = frame.e0.e_inv;
    const Matrix& b = frame.b;
    CorrectionStateND out;

    const Matrix b2 = detail::brownian_a2(st, e_inv);
    std::vector<double> curv(d, 0.0);  // G^g = c(g,i,j) B2(i,j)
    for (int g = 0; g < d; ++g) {
        double s = 0.0;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) s += frame.c(g, i, j) * b2(i, j);
        curv[g] = s;
    }
    // operator in Brownian coordinates at the segment start: p_a d_a + q_ab d_a d_b
    std::vector<double> p(d, 0.0);
    for (int a = 0; a < d; ++a) {
        double s = 0.0;
        for (int i = 0; i < d; ++i) s += e_inv(a, i) * st.a1[i];
        for (int g = 0; g < d; ++g) s -= 0.5 * e_inv(a, g) * curv[g];
        p[a] = s;
    }

    out.a = st.a - d_k * delta.dr / lambda;
    for (int a = 0; a < d; ++a) out.a -= p[a] * frame.g11[a] * frame.dt;
    for (int a = 0; a < d; ++a)
        for (int bb = 0; bb < d; ++bb)
            out.a += 0.5 * b2(a, bb) * frame.g11[a] * frame.g11[bb] * frame.dt * frame.dt;

    out.a1.assign(d, 0.0);
    for (int a = 0; a < d; ++a) {
        double s = st.a1[a] + d_k * delta.dmu[a] / lambda;
        for (int g = 0; g < d; ++g) s += b(a, g) * st.a1[g] - 0.5 * b(a, g) * curv[g];
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                s -= frame.dt * b2(i, j) * frame.g11[j] * frame.e_end(a, i);
        out.a1[a] = s;
    }

    out.a2 = Matrix(d);
    for (int a = 0; a < d; ++a)
        for (int bb = 0; bb < d; ++bb) {
            double s = d_k * delta.dc(a, bb) / lambda;
            for (int g = 0; g < d; ++g)
                for (int h = 0; h < d; ++h) {
                    const double ta = (a == g ? 1.0 : 0.0) + b(a, g);
                    const double tb = (bb == h ? 1.0 : 0.0) + b(bb, h);
                    s += ta * tb * st.a2(g, h);
                }
            out.a2(a, bb) = s;
        }
    out.a2 = symmetrized(out.a2);
    return out;
}

/// Null-expectation weight of the terminal X0 leg.
inline double d_zero(const CorrectionStateND& st, const Matrix& e_inv, double dt,
                     const std::vector<double>& dw) {
    const int d = e_inv.dim();
    const Matrix b2 = detail::brownian_a2(st, e_inv);
    double s = 0.0;
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            s += b2(a, b) * (dw[a] * dw[b] / (dt * dt) - (a == b ? 1.0 / dt : 0.0));
    return 0.5 * s;
}

/// Antithetic terminal contribution with per-leg discounts, including the
/// accumulated discount D_p.
template <typename H>
double terminal_contribution_nd(const CorrectionStateND& st, const StepCoeffsND& cp,
                                const std::vector<double>& x_p, double dt_p,
                                const std::vector<double>& dw_p, const H& payoff,
                                double d_accum) {
    const int d = cp.d;
    std::vector<double> dw_neg(d);
    for (int i = 0; i < d; ++i) dw_neg[i] = -dw_p[i];

    std::vector<double> x_plus = x_p, x_minus = x_p, x_zero = x_p;
    const auto dxp = apply_f_nd(cp, dt_p, dw_p);
    const auto dxm = apply_f_nd(cp, dt_p, dw_neg);
    for (int i = 0; i < d; ++i) {
        x_plus[i] += dxp[i];
        x_minus[i] += dxm[i];
        x_zero[i] += cp.mu[i] * dt_p;
    }
    const double disc_plus = std::exp(-apply_g(cp, dt_p, dw_p));
    const double disc_minus = std::exp(-apply_g(cp, dt_p, dw_neg));
    const double disc_zero = std::exp(-cp.g10 * dt_p);

    const SegmentFrame frame = make_segment_frame(cp, dt_p, dw_p);
    const double d_plus = d_scalar(st, frame, gaussian_weights_nd(d, dt_p, dw_p));
    const double d_minus = d_scalar(st, frame, gaussian_weights_nd(d, dt_p, dw_neg));
    const double d0 = d_zero(st, cp.e_inv, dt_p, dw_p);

    return d_accum * (0.5 * d_plus * disc_plus * payoff(x_plus) +
                      0.5 * d_minus * disc_minus * payoff(x_minus) -
                      d0 * disc_zero * payoff(x_zero));
}

// ---------------------------------------------------------------------------
// Path simulation
// ---------------------------------------------------------------------------

/// Running stochastic discount factor.
struct DiscountAccumulator {
    double value = 1.0;
    void step(double g) { value *= std::exp(-g); }
};

struct PathRecordND {
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    std::vector<double> dts;
    std::vector<std::vector<double>> dws;
    std::vector<CorrectionStateND> corrections;
    std::vector<double> d_weights;
    double p_t = 0.0;      // terminal bracket (terminal-leg discounts included)
    double discount = 1.0; // accumulated D_p up to the last Poisson time
};

struct PathOutcomeND {
    double contribution = 0.0;  // fully discounted path contribution
    double p_t = 0.0;
    double discount = 1.0;
    std::uint32_t jumps = 0;
    bool terminal_floored = false;
};

template <VectorModel M, typename H>
PathOutcomeND simulate_path_nd(const M& model, const H& payoff, double t0,
                               const std::vector<double>& x0, double T, double lambda,
                               PathStream& stream, std::uint64_t path_index = 0,
                               PathRecordND* record = nullptr) {
    const int d = model.dim();
    PathOutcomeND out;
    double t = t0;
    std::vector<double> x = x0;
    CorrectionStateND state = init_correction_nd(d);
    DiscountAccumulator discount;

    StepCoeffsND coeffs;
    try {
        coeffs = step_coeffs_nd(model, t, x);
    } catch (const NotPositiveDefinite& e) {
        throw NonPositiveVol(std::string("step_coeffs_nd: ") + e.what(), t, x[0], path_index);
    }

    if (record) {
        *record = PathRecordND{};
        record->times.push_back(t);
        record->states.push_back(x);
    }

    for (;;) {
        const double dt = draw_exponential(lambda, stream.uniform01());
        if (!(t + dt < T)) {
            double dt_p = T - t;
            if (dt_p < kMinTerminalDt) {
                dt_p = kMinTerminalDt;
                out.terminal_floored = true;
            }
            const std::vector<double> dw_p = draw_gaussian_vector(d, dt_p, stream);
            const double bracket =
                terminal_contribution_nd(state, coeffs, x, dt_p, dw_p, payoff, 1.0);
            out.p_t = bracket;
            out.discount = discount.value;
            out.contribution = discount.value * bracket;
            if (record) {
                record->dts.push_back(dt_p);
                record->dws.push_back(dw_p);
                record->p_t = bracket;
                record->discount = discount.value;
            }
            return out;
        }
        const std::vector<double> dw = draw_gaussian_vector(d, dt, stream);
        const auto dx = apply_f_nd(coeffs, dt, dw);
        std::vector<double> x_next = x;
        for (int i = 0; i < d; ++i) x_next[i] += dx[i];
        const double t_next = t + dt;
        discount.step(apply_g(coeffs, dt, dw));

        StepCoeffsND coeffs_next;
        try {
            coeffs_next = step_coeffs_nd(model, t_next, x_next);
        } catch (const NotPositiveDefinite& e) {
            throw NonPositiveVol(std::string("step_coeffs_nd: ") + e.what(), t_next,
                                 x_next[0], path_index);
        }
        const DeltaTermsND delta = delta_terms_nd(model, t_next, x_next, coeffs, dt, dw);
        const SegmentFrame frame = make_segment_frame(coeffs, dt, dw);
        const double d_k = d_scalar(state, frame, gaussian_weights_nd(d, dt, dw));
        state = update_correction_nd(state, frame, d_k, delta, lambda);

        if (record) {
            record->times.push_back(t_next);
            record->states.push_back(x_next);
            record->dts.push_back(dt);
            record->dws.push_back(dw);
            record->corrections.push_back(state);
            record->d_weights.push_back(d_k);
        }

        t = t_next;
        x = x_next;
        coeffs = coeffs_next;
        ++out.jumps;
    }
}

/// Unbiased estimate of E[exp(-int r(t,X) dt) h(X_T)].
template <VectorModel M, typename H>
EstimatorResult price_nd(const M& model, const H& payoff, const std::vector<double>& x0,
                         double T, double lambda, std::uint64_t n_paths, std::uint64_t seed,
                         const RunOptions& opts = {}) {
    const double t0 = 0.0;
    if (opts.diagnostics) opts.diagnostics->resize(n_paths);
    return run_paths(n_paths, opts.threads, [&](std::uint64_t i, PathExtras& extras) {
        PathStream stream(seed, i);
        const PathOutcomeND o = simulate_path_nd(model, payoff, t0, x0, T, lambda, stream, i);
        extras.terminal_floored = o.terminal_floored;
        if (opts.diagnostics) (*opts.diagnostics)[i] = PathDiag{i, o.jumps, o.p_t, o.discount};
        return o.contribution;
    });
}

}  // namespace umc
