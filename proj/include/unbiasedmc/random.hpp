#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

// Reproducible random streams.
//
// Every Monte Carlo path owns its own counter-based stream keyed by
// (master_seed, path_index).  The mapping is injective by construction: the
// pair is used verbatim as the 128-bit Philox key and the 256-bit block
// counter starts at zero, so distinct keys can never produce overlapping
// sequences.  Results are therefore independent of how paths are scheduled
// across worker threads.

namespace umc {

/// Philox 4x64 keyed counter permutation, 10 rounds.
struct Philox4x64 {
    static constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ull;
    static constexpr std::uint64_t kMul1 = 0xCA5A826395121157ull;
    static constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ull;
    static constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73Bull;

    static std::array<std::uint64_t, 4> block(std::array<std::uint64_t, 4> x,
                                              std::array<std::uint64_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            const unsigned __int128 p0 = static_cast<unsigned __int128>(kMul0) * x[0];
            const unsigned __int128 p1 = static_cast<unsigned __int128>(kMul1) * x[2];
            const std::uint64_t hi0 = static_cast<std::uint64_t>(p0 >> 64);
            const std::uint64_t lo0 = static_cast<std::uint64_t>(p0);
            const std::uint64_t hi1 = static_cast<std::uint64_t>(p1 >> 64);
            const std::uint64_t lo1 = static_cast<std::uint64_t>(p1);
            x = {hi1 ^ x[1] ^ key[0], lo1, hi0 ^ x[3] ^ key[1], lo0};
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return x;
    }
};

struct StreamKey {
    std::uint64_t master_seed = 0;
    std::uint64_t path_index = 0;
};

namespace detail {
/// Horner evaluation, highest-degree coefficient first.
template <std::size_t N>
double horner(const double (&coef)[N], double x) {
    double acc = coef[0];
    for (std::size_t i = 1; i < N; ++i) acc = acc * x + coef[i];
    return acc;
}
}  // namespace detail

/// Inverse of the standard normal CDF (Wichura's AS 241, double precision).
inline double inverse_normal_cdf(double p) {
    static constexpr double a[] = {2.5090809287301226727e+3, 3.3430575583588128105e+4,
                                   6.7265770927008700853e+4, 4.5921953931549871457e+4,
                                   1.3731693765509461125e+4, 1.9715909503065514427e+3,
                                   1.3314166789178437745e+2, 3.3871328727963666080e0};
    static constexpr double b[] = {5.2264952788528545610e+3, 2.8729085735721942674e+4,
                                   3.9307895800092710610e+4, 2.1213794301586595867e+4,
                                   5.3941960214247511077e+3, 6.8718700749205790830e+2,
                                   4.2313330701600911252e+1, 1.0};
    static constexpr double c[] = {7.74545014278341407640e-4, 2.27238449892691845833e-2,
                                   2.41780725177450611770e-1, 1.27045825245236838258e0,
                                   3.64784832476320460504e0,  5.76949722146069140550e0,
                                   4.63033784615654529590e0,  1.42343711074968357734e0};
    static constexpr double d[] = {1.05075007164441684324e-9, 5.47593808499534494600e-4,
                                   1.51986665636164571966e-2, 1.48103976427480074590e-1,
                                   6.89767334985100004550e-1, 1.67638483018380384940e0,
                                   2.05319162663775882187e0,  1.0};
    static constexpr double e[] = {2.01033439929228813265e-7, 2.71155556874348757815e-5,
                                   1.24266094738807843860e-3, 2.65321895265761230930e-2,
                                   2.96560571828504891230e-1, 1.78482653991729133580e0,
                                   5.46378491116411436990e0,  6.65790464350110377720e0};
    static constexpr double f[] = {1.42151175831644588870e-15, 1.84631831751005468180e-6,
                                   7.86869131145613259100e-4,  1.48753612908506148525e-2,
                                   1.36929880922735805310e-1,  5.99832206555887937690e-1,
                                   1.0};

    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("inverse_normal_cdf: p must be in (0,1)");
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q * detail::horner(a, r) / detail::horner(b, r);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double x;
    if (r <= 5.0) {
        r -= 1.6;
        x = detail::horner(c, r) / detail::horner(d, r);
    } else {
        r -= 5.0;
        x = detail::horner(e, r) / detail::horner(f, r);
    }
    return q < 0.0 ? -x : x;
}

/// One path's private stream of uniforms and Gaussians.
class PathStream {
public:
    explicit PathStream(StreamKey k) : key_{k.master_seed, k.path_index} {}
    PathStream(std::uint64_t master_seed, std::uint64_t path_index)
        : key_{master_seed, path_index} {}

    std::uint64_t next_u64() {
        if (pos_ == 4) {
            buf_ = Philox4x64::block(ctr_, key_);
            for (int i = 0; i < 4; ++i)
                if (++ctr_[i] != 0) break;
            pos_ = 0;
        }
        return buf_[pos_++];
    }

    /// Uniform on (0, 1], 53-bit resolution.
    double uniform01() { return 1.0 - static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on the open interval (0, 1).
    double uniform_open() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal draw (inverse CDF of one uniform).
    double gaussian() { return inverse_normal_cdf(uniform_open()); }

private:
    std::array<std::uint64_t, 2> key_;
    std::array<std::uint64_t, 4> ctr_{0, 0, 0, 0};
    std::array<std::uint64_t, 4> buf_{};
    int pos_ = 4;
};

/// Exponential inter-arrival time by inversion of the cumulative law.
inline double draw_exponential(double lambda, double u) {
    if (!(lambda > 0.0)) throw std::domain_error("draw_exponential: lambda must be > 0");
    if (!(u > 0.0 && u <= 1.0)) throw std::domain_error("draw_exponential: u must be in (0,1]");
    return -std::log(u) / lambda;
}

/// Jump times of a Poisson process on (t0, T): draw inter-arrival times until
/// one lands past T and discard that draw.  May be empty.
inline std::vector<double> poisson_times(double t0, double T, double lambda,
                                         PathStream& stream) {
    std::vector<double> times;
    double t = t0;
    for (;;) {
        t += draw_exponential(lambda, stream.uniform01());
        if (!(t < T)) break;
        times.push_back(t);
    }
    return times;
}

/// d independent N(0, variance) draws.
inline std::vector<double> draw_gaussian_vector(int d, double variance, PathStream& stream) {
    const double sd = std::sqrt(variance);
    std::vector<double> z(d);
    for (int i = 0; i < d; ++i) z[i] = sd * stream.gaussian();
    return z;
}

}  // namespace umc
