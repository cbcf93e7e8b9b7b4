#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

// Small dense linear algebra for the per-segment work of the multidimensional
// scheme: Cholesky factors, triangular inverses, frames and rank-3 tensors.
// Dimensions are expected to stay small (d <= 16), so everything is plain
// O(d^3) with no blocking or pivoting.

namespace umc {

struct NotPositiveDefinite : std::runtime_error {
    explicit NotPositiveDefinite(const std::string& what) : std::runtime_error(what) {}
};

/// Square dense matrix, row-major.
class Matrix {
public:
    Matrix() = default;
    explicit Matrix(int n, double fill = 0.0) : n_(n), a_(static_cast<size_t>(n) * n, fill) {}

    static Matrix identity(int n) {
        Matrix m(n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int dim() const { return n_; }
    double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * n_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * n_ + j]; }

    bool operator==(const Matrix&) const = default;

private:
    int n_ = 0;
    std::vector<double> a_;
};

inline Matrix operator*(const Matrix& a, const Matrix& b) {
    const int n = a.dim();
    Matrix c(n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

inline std::vector<double> operator*(const Matrix& a, const std::vector<double>& x) {
    const int n = a.dim();
    std::vector<double> y(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

inline Matrix transpose(const Matrix& a) {
    const int n = a.dim();
    Matrix t(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) t(j, i) = a(i, j);
    return t;
}

inline double max_abs(const Matrix& a) {
    double m = 0.0;
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < a.dim(); ++j) m = std::max(m, std::abs(a(i, j)));
    return m;
}

/// Largest |a_ij - a_ji|.
inline double max_asymmetry(const Matrix& a) {
    double m = 0.0;
    for (int i = 0; i < a.dim(); ++i)
        for (int j = i + 1; j < a.dim(); ++j) m = std::max(m, std::abs(a(i, j) - a(j, i)));
    return m;
}

inline Matrix symmetrized(const Matrix& a) {
    const int n = a.dim();
    Matrix s(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
    return s;
}

/// Lower-triangular Cholesky factor L with L L^T = C.  The input is
/// symmetrized first; a non-positive pivot throws NotPositiveDefinite.
/// Returns true in `warned` (when given) if the asymmetry of the input
/// exceeded 1e-9 relative to its largest entry.
inline Matrix cholesky(const Matrix& c, bool* asymmetry_warning = nullptr) {
    const int n = c.dim();
    const double scale = max_abs(c);
    if (asymmetry_warning)
        *asymmetry_warning = scale > 0.0 && max_asymmetry(c) > 1e-9 * scale;
    const Matrix s = symmetrized(c);
    Matrix l(n);
    for (int j = 0; j < n; ++j) {
        double d = s(j, j);
        for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > 0.0))
            throw NotPositiveDefinite("cholesky: pivot " + std::to_string(j) +
                                      " is non-positive (" + std::to_string(d) + ")");
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (int i = j + 1; i < n; ++i) {
            double v = s(i, j);
            for (int k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
            l(i, j) = v / ljj;
        }
    }
    return l;
}

/// Inverse of a lower-triangular matrix by forward substitution.
inline Matrix invert_lower_triangular(const Matrix& l) {
    const int n = l.dim();
    Matrix inv(n);
    for (int j = 0; j < n; ++j) {
        if (l(j, j) == 0.0)
            throw std::domain_error("invert_lower_triangular: zero diagonal at " + std::to_string(j));
        inv(j, j) = 1.0 / l(j, j);
        for (int i = j + 1; i < n; ++i) {
            double s = 0.0;
            for (int k = j; k < i; ++k) s += l(i, k) * inv(k, j);
            inv(i, j) = -s / l(i, i);
        }
    }
    return inv;
}

/// Jacobian frame of a space change of variables: e maps Brownian to state
/// directions, e_inv is its inverse.
struct Frame {
    Matrix e;
    Matrix e_inv;
};

inline Frame make_frame(const Matrix& lower_triangular) {
    return Frame{lower_triangular, invert_lower_triangular(lower_triangular)};
}

/// Rank-3 tensor t(i,j,k), cube-shaped.
class Tensor3 {
public:
    Tensor3() = default;
    explicit Tensor3(int n, double fill = 0.0)
        : n_(n), a_(static_cast<size_t>(n) * n * n, fill) {}

    int dim() const { return n_; }
    double& operator()(int i, int j, int k) {
        return a_[(static_cast<size_t>(i) * n_ + j) * n_ + k];
    }
    double operator()(int i, int j, int k) const {
        return a_[(static_cast<size_t>(i) * n_ + j) * n_ + k];
    }

private:
    int n_ = 0;
    std::vector<double> a_;
};

}  // namespace umc
