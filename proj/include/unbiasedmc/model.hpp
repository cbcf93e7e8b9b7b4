#pragma once

#include <cmath>
#include <concepts>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "unbiasedmc/linalg.hpp"

// Diffusion model interfaces.  The simulation schemes need the coefficient
// functions and their spatial derivatives pointwise, so models supply
// explicit closures for all of them; validate_derivatives() exists to catch
// a model whose hand-written derivatives drift out of sync.
//
// Model evaluators must be pure functions of (t, x): they are called
// concurrently from many worker threads.

namespace umc {

/// One-dimensional diffusion dS = mu dt + sigma dW with deterministic
/// discount rate r(t).
template <typename M>
concept ScalarModel = requires(const M m, double t, double s) {
    { m.mu(t, s) } -> std::convertible_to<double>;
    { m.sigma(t, s) } -> std::convertible_to<double>;
    { m.dmu_ds(t, s) } -> std::convertible_to<double>;
    { m.dsigma_ds(t, s) } -> std::convertible_to<double>;
    { m.rate(t) } -> std::convertible_to<double>;
};

/// d-dimensional diffusion dX = mu dt + sigma dW with covariance
/// C = sigma sigma^T and state-dependent discount rate r(t, X).
///   cov(t,x)   : C, symmetric positive definite
///   dcov(t,x)  : (g,a,b) -> d_g C^{ab}, symmetric in (a,b)
///   dmu(t,x)   : (a,g)   -> d_g mu^a
///   drate(t,x) : g       -> d_g r
template <typename M>
concept VectorModel = requires(const M m, double t, const std::vector<double>& x) {
    { m.dim() } -> std::convertible_to<int>;
    { m.mu(t, x) } -> std::convertible_to<std::vector<double>>;
    { m.cov(t, x) } -> std::convertible_to<Matrix>;
    { m.dcov(t, x) } -> std::convertible_to<Tensor3>;
    { m.dmu(t, x) } -> std::convertible_to<Matrix>;
    { m.rate(t, x) } -> std::convertible_to<double>;
    { m.drate(t, x) } -> std::convertible_to<std::vector<double>>;
};

// ---------------------------------------------------------------------------
// Payoffs
// ---------------------------------------------------------------------------

enum class Smoothness { smooth, piecewise_linear };

struct Payoff1D {
    std::function<double(double)> h;
    Smoothness smoothness = Smoothness::smooth;
};

struct PayoffND {
    std::function<double(const std::vector<double>&)> h;
    Smoothness smoothness = Smoothness::smooth;
};

inline Payoff1D put_payoff(double strike) {
    return {[strike](double s) { return std::max(strike - s, 0.0); },
            Smoothness::piecewise_linear};
}

inline Payoff1D call_payoff(double strike) {
    return {[strike](double s) { return std::max(s - strike, 0.0); },
            Smoothness::piecewise_linear};
}

inline Payoff1D identity_payoff() {
    return {[](double s) { return s; }, Smoothness::smooth};
}

inline Payoff1D constant_payoff(double value = 1.0) {
    return {[value](double) { return value; }, Smoothness::smooth};
}

/// Put on the arithmetic average of the components.
inline PayoffND basket_put_payoff(double strike) {
    return {[strike](const std::vector<double>& x) {
                double avg = 0.0;
                for (double v : x) avg += v;
                avg /= static_cast<double>(x.size());
                return std::max(strike - avg, 0.0);
            },
            Smoothness::piecewise_linear};
}

inline PayoffND constant_payoff_nd(double value = 1.0) {
    return {[value](const std::vector<double>&) { return value; }, Smoothness::smooth};
}

// ---------------------------------------------------------------------------
// Built-in one-dimensional models
// ---------------------------------------------------------------------------

/// dS = mu0 S dt + sigma0 S dW, constant rate.
struct BlackScholesModel {
    double mu0 = 0.05;
    double sigma0 = 0.2;
    double r = 0.0;

    double mu(double, double s) const { return mu0 * s; }
    double sigma(double, double s) const { return sigma0 * s; }
    double dmu_ds(double, double) const { return mu0; }
    double dsigma_ds(double, double) const { return sigma0; }
    double rate(double) const { return r; }
    std::optional<double> constant_rate() const { return r; }
    std::optional<std::pair<double, double>> domain() const {
        return std::make_pair(0.0, std::numeric_limits<double>::infinity());
    }
};

/// dS = m dt + s dW, constant rate.
struct ConstantCoeffModel {
    double m = 0.0;
    double s = 1.0;
    double r = 0.0;

    double mu(double, double) const { return m; }
    double sigma(double, double) const { return s; }
    double dmu_ds(double, double) const { return 0.0; }
    double dsigma_ds(double, double) const { return 0.0; }
    double rate(double) const { return r; }
    std::optional<double> constant_rate() const { return r; }
};

/// dS = mu0 S dt + sigma0 S^beta dW, constant rate.
struct CevModel {
    double mu0 = 0.0;
    double sigma0 = 0.2;
    double beta = 0.5;
    double r = 0.0;

    double mu(double, double s) const { return mu0 * s; }
    double sigma(double, double s) const { return sigma0 * std::pow(s, beta); }
    double dmu_ds(double, double) const { return mu0; }
    double dsigma_ds(double, double s) const { return sigma0 * beta * std::pow(s, beta - 1.0); }
    double rate(double) const { return r; }
    std::optional<double> constant_rate() const { return r; }
    std::optional<std::pair<double, double>> domain() const {
        return std::make_pair(0.0, std::numeric_limits<double>::infinity());
    }
};

// ---------------------------------------------------------------------------
// Built-in multidimensional models
// ---------------------------------------------------------------------------

/// dX = dW in one dimension with affine stochastic rate r(t,X) = r0 + eps X.
struct GaussianRate1DModel {
    double r0 = 0.0;
    double eps = 0.0;

    int dim() const { return 1; }
    std::vector<double> mu(double, const std::vector<double>&) const { return {0.0}; }
    Matrix cov(double, const std::vector<double>&) const {
        Matrix c(1);
        c(0, 0) = 1.0;
        return c;
    }
    Tensor3 dcov(double, const std::vector<double>&) const { return Tensor3(1); }
    Matrix dmu(double, const std::vector<double>&) const { return Matrix(1); }
    double rate(double, const std::vector<double>& x) const { return r0 + eps * x[0]; }
    std::vector<double> drate(double, const std::vector<double>&) const { return {eps}; }
};

/// d-dimensional lognormal with one common pairwise correlation:
/// mu^a = mu0 X^a, C^{ab} = sigma0^2 rho_{ab} X^a X^b, constant rate.
struct NdLognormalModel {
    int d = 1;
    double mu0 = 0.0;
    double sigma0 = 0.2;
    double corr = 0.0;  // off-diagonal correlation
    double r = 0.0;

    double rho(int a, int b) const { return a == b ? 1.0 : corr; }

    int dim() const { return d; }
    std::vector<double> mu(double, const std::vector<double>& x) const {
        std::vector<double> m(d);
        for (int a = 0; a < d; ++a) m[a] = mu0 * x[a];
        return m;
    }
    Matrix cov(double, const std::vector<double>& x) const {
        Matrix c(d);
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) c(a, b) = sigma0 * sigma0 * rho(a, b) * x[a] * x[b];
        return c;
    }
    Tensor3 dcov(double, const std::vector<double>& x) const {
        Tensor3 t(d);
        const double s2 = sigma0 * sigma0;
        for (int g = 0; g < d; ++g)
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) {
                    double v = 0.0;
                    if (g == a) v += s2 * rho(a, b) * x[b];
                    if (g == b) v += s2 * rho(a, b) * x[a];
                    t(g, a, b) = v;
                }
        return t;
    }
    Matrix dmu(double, const std::vector<double>&) const {
        Matrix m(d);
        for (int a = 0; a < d; ++a) m(a, a) = mu0;
        return m;
    }
    double rate(double, const std::vector<double>&) const { return r; }
    std::vector<double> drate(double, const std::vector<double>&) const {
        return std::vector<double>(d, 0.0);
    }
};

/// Constant drift vector and covariance matrix, constant rate.
struct ConstantCoeffNdModel {
    std::vector<double> m;
    Matrix c;
    double r = 0.0;

    int dim() const { return static_cast<int>(m.size()); }
    std::vector<double> mu(double, const std::vector<double>&) const { return m; }
    Matrix cov(double, const std::vector<double>&) const { return c; }
    Tensor3 dcov(double, const std::vector<double>&) const { return Tensor3(dim()); }
    Matrix dmu(double, const std::vector<double>&) const { return Matrix(dim()); }
    double rate(double, const std::vector<double>&) const { return r; }
    std::vector<double> drate(double, const std::vector<double>&) const {
        return std::vector<double>(dim(), 0.0);
    }
};

// ---------------------------------------------------------------------------
// Closed-form oracles
// ---------------------------------------------------------------------------

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Black-Scholes European put.
inline double black_scholes_put(double s0, double k, double r, double sigma0, double T) {
    if (!(s0 > 0.0) || !(k > 0.0) || !(sigma0 > 0.0))
        throw std::domain_error("black_scholes_put: s0, k and sigma0 must be positive");
    if (T < 0.0) throw std::domain_error("black_scholes_put: negative maturity");
    if (T == 0.0) return std::max(k - s0, 0.0);
    const double sq = sigma0 * std::sqrt(T);
    const double d1 = (std::log(s0 / k) + (r + 0.5 * sigma0 * sigma0) * T) / sq;
    const double d2 = d1 - sq;
    return k * std::exp(-r * T) * norm_cdf(-d2) - s0 * norm_cdf(-d1);
}

/// E[exp(-int_0^T (r0 + eps W_t) dt)] = exp(-r0 T + eps^2 T^3 / 6).
/// Exact expected discount for the affine-rate pure-Brownian model; the
/// variance of int_0^T W dt is T^3/3.
inline double gaussian_rate_bond_oracle(double r0, double eps, double T) {
    if (T < 0.0) throw std::domain_error("gaussian_rate_bond_oracle: negative maturity");
    return std::exp(-r0 * T + eps * eps * T * T * T / 6.0);
}

// ---------------------------------------------------------------------------
// Derivative validation
// ---------------------------------------------------------------------------

struct DerivativeCheck {
    std::string name;
    double max_rel_error = 0.0;
};

struct DerivativeReport {
    std::vector<DerivativeCheck> checks;
    double tolerance = 1e-5;

    double worst() const {
        double w = 0.0;
        for (const auto& c : checks) w = std::max(w, c.max_rel_error);
        return w;
    }
    bool ok() const { return worst() <= tolerance; }
};

namespace detail {
inline double rel_err(double got, double want) {
    return std::abs(got - want) / std::max({1.0, std::abs(got), std::abs(want)});
}
inline double fd_step(double x) { return 1e-5 * std::max(1.0, std::abs(x)); }
}  // namespace detail

/// Central finite differences of mu and sigma against the supplied
/// derivative closures.  Violations are reported, never thrown.
template <ScalarModel M>
DerivativeReport validate_derivatives(const M& model, const std::vector<std::pair<double, double>>& probes) {
    DerivativeCheck dmu{"dmu_ds"}, dsig{"dsigma_ds"};
    for (const auto& [t, s] : probes) {
        const double h = detail::fd_step(s);
        const double fd_mu = (model.mu(t, s + h) - model.mu(t, s - h)) / (2.0 * h);
        const double fd_sig = (model.sigma(t, s + h) - model.sigma(t, s - h)) / (2.0 * h);
        dmu.max_rel_error = std::max(dmu.max_rel_error, detail::rel_err(model.dmu_ds(t, s), fd_mu));
        dsig.max_rel_error =
            std::max(dsig.max_rel_error, detail::rel_err(model.dsigma_ds(t, s), fd_sig));
    }
    return DerivativeReport{{dmu, dsig}};
}

template <VectorModel M>
DerivativeReport validate_derivatives(const M& model,
                                      const std::vector<std::pair<double, std::vector<double>>>& probes) {
    const int d = model.dim();
    DerivativeCheck cmu{"dmu"}, ccov{"dcov"}, crate{"drate"};
    for (const auto& [t, x] : probes) {
        const Matrix sup_dmu = model.dmu(t, x);
        const Tensor3 sup_dc = model.dcov(t, x);
        const std::vector<double> sup_dr = model.drate(t, x);
        for (int g = 0; g < d; ++g) {
            const double h = detail::fd_step(x[g]);
            std::vector<double> xp = x, xm = x;
            xp[g] += h;
            xm[g] -= h;
            const auto mu_p = model.mu(t, xp), mu_m = model.mu(t, xm);
            const auto c_p = model.cov(t, xp), c_m = model.cov(t, xm);
            const double r_p = model.rate(t, xp), r_m = model.rate(t, xm);
            for (int a = 0; a < d; ++a) {
                cmu.max_rel_error = std::max(
                    cmu.max_rel_error,
                    detail::rel_err(sup_dmu(a, g), (mu_p[a] - mu_m[a]) / (2.0 * h)));
                for (int b = 0; b < d; ++b)
                    ccov.max_rel_error = std::max(
                        ccov.max_rel_error,
                        detail::rel_err(sup_dc(g, a, b), (c_p(a, b) - c_m(a, b)) / (2.0 * h)));
            }
            crate.max_rel_error = std::max(
                crate.max_rel_error, detail::rel_err(sup_dr[g], (r_p - r_m) / (2.0 * h)));
        }
    }
    return DerivativeReport{{cmu, ccov, crate}};
}

}  // namespace umc
