// SPDX-License-Identifier: Apache-2.0
//
// mimobf: finite-blocklength limits of coherent MIMO block-fading channels
// ------------------------------------------------------------------------
//
// Small dense numerics: Jacobi eigensolver, one-sided Jacobi SVD, Cholesky,
// Haar-orthogonal sampling and the Gaussian tail function with its inverse.

#ifndef MIMOBF_LINALG_HPP
#define MIMOBF_LINALG_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"
#include "rng.hpp"

namespace mimobf {

inline constexpr int kJacobiMaxSweeps = 100;

struct SymEigen {
    std::vector<double> values; // descending
    Matrix vectors;             // column j pairs with values[j]
};

namespace detail {

inline void check_symmetric(const Matrix &a) {
    require(a.rows() == a.cols(), "sym_eigen: matrix must be square");
    require(a.all_finite(), "sym_eigen: non-finite entry");
    const double scale = std::max(1.0, a.frobenius());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            require(std::abs(a(i, j) - a(j, i)) <= 1e-12 * scale, "sym_eigen: matrix is not symmetric");
}

inline double off_diagonal_sq(const Matrix &a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (i != j)
                s += a(i, j) * a(i, j);
    return s;
}

// Cyclic Jacobi. `vecs` may be null when only eigenvalues are wanted.
inline std::vector<double> jacobi(Matrix a, Matrix *vecs) {
    const std::size_t n = a.rows();
    if (vecs)
        *vecs = Matrix::identity(n);
    const double thresh = 1e-14 * a.frobenius();
    const double thresh_sq = thresh * thresh;

    int sweep = 0;
    while (off_diagonal_sq(a) > thresh_sq) {
        if (++sweep > kJacobiMaxSweeps)
            throw NumericalFailure("sym_eigen: Jacobi did not converge within " + std::to_string(kJacobiMaxSweeps) +
                                   " sweeps");
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0)
                    continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                if (vecs) {
                    Matrix &v = *vecs;
                    for (std::size_t k = 0; k < n; ++k) {
                        const double vkp = v(k, p), vkq = v(k, q);
                        v(k, p) = c * vkp - s * vkq;
                        v(k, q) = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i)
        d[i] = a(i, i);
    return d;
}

inline std::vector<std::size_t> descending_order(const std::vector<double> &v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return v[i] > v[j]; });
    return idx;
}

// Extend the first `filled` orthonormal columns of q to a full orthonormal basis.
inline void complete_basis(Matrix &q, std::size_t filled) {
    const std::size_t m = q.rows();
    std::size_t col = filled;
    for (std::size_t e = 0; e < m && col < q.cols(); ++e) {
        std::vector<double> w(m, 0.0);
        w[e] = 1.0;
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t j = 0; j < col; ++j) {
                double dot = 0.0;
                for (std::size_t k = 0; k < m; ++k)
                    dot += q(k, j) * w[k];
                for (std::size_t k = 0; k < m; ++k)
                    w[k] -= dot * q(k, j);
            }
        }
        double norm = 0.0;
        for (double x : w)
            norm += x * x;
        norm = std::sqrt(norm);
        if (norm < 1e-8)
            continue;
        for (std::size_t k = 0; k < m; ++k)
            q(k, col) = w[k] / norm;
        ++col;
    }
    if (col != q.cols())
        throw NumericalFailure("svd: failed to complete orthonormal basis");
}

} // namespace detail

/// Full eigendecomposition of a symmetric matrix, eigenvalues descending.
inline SymEigen sym_eigen(const Matrix &a) {
    detail::check_symmetric(a);
    Matrix vecs;
    const auto d = detail::jacobi(a, &vecs);
    const auto order = detail::descending_order(d);
    SymEigen out;
    out.values.resize(d.size());
    out.vectors = Matrix(a.rows(), a.rows());
    for (std::size_t j = 0; j < order.size(); ++j) {
        out.values[j] = d[order[j]];
        for (std::size_t k = 0; k < a.rows(); ++k)
            out.vectors(k, j) = vecs(k, order[j]);
    }
    return out;
}

inline std::vector<double> sym_eigenvalues(const Matrix &a) {
    detail::check_symmetric(a);
    auto d = detail::jacobi(a, nullptr);
    std::sort(d.begin(), d.end(), std::greater<>());
    return d;
}

struct SvdResult {
    Matrix u;                  // m×m
    std::vector<double> sigma; // min(m,n), descending
    Matrix v;                  // n×n
};

/// One-sided (Hestenes) Jacobi SVD with U and V completed to square
/// orthogonal matrices.
inline SvdResult svd(const Matrix &a) {
    require(a.all_finite(), "svd: non-finite entry");
    const std::size_t m = a.rows(), n = a.cols();
    if (m < n) {
        SvdResult t = svd(a.transpose());
        return {std::move(t.v), std::move(t.sigma), std::move(t.u)};
    }
    // m >= n: orthogonalize the columns of w = a·v.
    Matrix w = a;
    Matrix v = Matrix::identity(n);
    const double eps = 1e-15;
    bool rotated = true;
    int sweep = 0;
    while (rotated) {
        if (++sweep > kJacobiMaxSweeps)
            throw NumericalFailure("svd: one-sided Jacobi did not converge");
        rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t k = 0; k < m; ++k) {
                    alpha += w(k, p) * w(k, p);
                    beta += w(k, q) * w(k, q);
                    gamma += w(k, p) * w(k, q);
                }
                if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta))
                    continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t k = 0; k < m; ++k) {
                    const double wp = w(k, p), wq = w(k, q);
                    w(k, p) = c * wp - s * wq;
                    w(k, q) = s * wp + c * wq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vp = v(k, p), vq = v(k, q);
                    v(k, p) = c * vp - s * vq;
                    v(k, q) = s * vp + c * vq;
                }
            }
        }
    }

    std::vector<double> norms(n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < m; ++k)
            s += w(k, j) * w(k, j);
        norms[j] = std::sqrt(s);
    }
    const auto order = detail::descending_order(norms);
    const double smax = norms.empty() ? 0.0 : norms[order[0]];
    const double cutoff = std::max(smax, 1.0) * 1e-13;

    SvdResult out;
    out.sigma.resize(n);
    out.u = Matrix(m, m);
    out.v = Matrix(n, n);
    std::size_t filled = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t src = order[j];
        out.sigma[j] = norms[src];
        for (std::size_t k = 0; k < n; ++k)
            out.v(k, j) = v(k, src);
        if (norms[src] > cutoff && filled == j) {
            for (std::size_t k = 0; k < m; ++k)
                out.u(k, j) = w(k, src) / norms[src];
            ++filled;
        }
    }
    // Columns whose direction is numerically undetermined (tiny or zero
    // singular values) and the m > n complement come from basis completion.
    detail::complete_basis(out.u, filled);
    return out;
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
inline Matrix cholesky(const Matrix &a) {
    require(a.rows() == a.cols(), "cholesky: matrix must be square");
    const std::size_t n = a.rows();
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k)
            d -= l(j, k) * l(j, k);
        if (!(d > 0.0))
            throw NumericalFailure("cholesky: matrix is not positive definite");
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k)
                s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

inline double log_det_from_cholesky(const Matrix &l) {
    double s = 0.0;
    for (std::size_t i = 0; i < l.rows(); ++i)
        s += std::log(l(i, i));
    return 2.0 * s;
}

// Solve (L Lᵀ) X = B in place.
inline Matrix cholesky_solve(const Matrix &l, Matrix b) {
    const std::size_t n = l.rows();
    require(b.rows() == n, "cholesky_solve: dimension mismatch");
    for (std::size_t c = 0; c < b.cols(); ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = b(i, c);
            for (std::size_t k = 0; k < i; ++k)
                s -= l(i, k) * b(k, c);
            b(i, c) = s / l(i, i);
        }
        for (std::size_t i = n; i-- > 0;) {
            double s = b(i, c);
            for (std::size_t k = i + 1; k < n; ++k)
                s -= l(k, i) * b(k, c);
            b(i, c) = s / l(i, i);
        }
    }
    return b;
}

/// Haar-distributed orthogonal n×n matrix: Householder QR of a Gaussian matrix
/// with each Q column multiplied by the sign of the matching R diagonal.
inline Matrix sample_haar_orthogonal(std::size_t n, RngStream &rng) {
    require(n >= 1, "sample_haar_orthogonal: n must be positive");
    Matrix g(n, n);
    for (double &x : g.data())
        x = rng.normal();

    Matrix q = Matrix::identity(n);
    std::vector<double> rdiag(n);
    std::vector<double> vh(n);
    for (std::size_t k = 0; k < n; ++k) {
        double norm = 0.0;
        for (std::size_t i = k; i < n; ++i)
            norm += g(i, k) * g(i, k);
        norm = std::sqrt(norm);
        const double alpha = g(k, k) > 0 ? -norm : norm;
        rdiag[k] = alpha;
        if (k + 1 == n || norm == 0.0)
            continue;
        for (std::size_t i = k; i < n; ++i)
            vh[i] = g(i, k);
        vh[k] -= alpha;
        double vnorm_sq = 0.0;
        for (std::size_t i = k; i < n; ++i)
            vnorm_sq += vh[i] * vh[i];
        if (vnorm_sq == 0.0)
            continue;
        // G <- (I - 2vvᵀ/vᵀv) G  on the trailing block.
        for (std::size_t j = k; j < n; ++j) {
            double dot = 0.0;
            for (std::size_t i = k; i < n; ++i)
                dot += vh[i] * g(i, j);
            const double f = 2.0 * dot / vnorm_sq;
            for (std::size_t i = k; i < n; ++i)
                g(i, j) -= f * vh[i];
        }
        // Q <- Q (I - 2vvᵀ/vᵀv)
        for (std::size_t r = 0; r < n; ++r) {
            double dot = 0.0;
            for (std::size_t i = k; i < n; ++i)
                dot += q(r, i) * vh[i];
            const double f = 2.0 * dot / vnorm_sq;
            for (std::size_t i = k; i < n; ++i)
                q(r, i) -= f * vh[i];
        }
    }
    // The last Householder step is skipped, so R's final diagonal is g(n-1,n-1).
    rdiag[n - 1] = g(n - 1, n - 1);
    for (std::size_t j = 0; j < n; ++j) {
        if (rdiag[j] < 0)
            for (std::size_t r = 0; r < n; ++r)
                q(r, j) = -q(r, j);
    }
    return q;
}

/// Gaussian tail probability P[N(0,1) > x].
inline double qfunc(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

namespace detail {

// Acklam's rational approximation to the standard normal quantile.
inline double acklam_quantile(double p) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double plow = 0.02425;
    if (p < plow) {
        const double q = std::sqrt(-2 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    if (p > 1 - plow) {
        const double q = std::sqrt(-2 * std::log1p(-p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

} // namespace detail

/// Inverse of qfunc on (0,1). Acklam start, then Newton on qfunc.
inline double qfunc_inv(double eps) {
    require(eps > 0.0 && eps < 1.0, "qfunc_inv: eps must lie in (0,1)");
    if (eps == 0.5)
        return 0.0;
    if (eps > 0.5)
        return -qfunc_inv(1.0 - eps);
    double x = -detail::acklam_quantile(eps);
    constexpr double inv_sqrt_2pi = 0.39894228040143267794;
    for (int it = 0; it < 50; ++it) {
        const double err = qfunc(x) - eps;
        const double pdf = inv_sqrt_2pi * std::exp(-0.5 * x * x);
        if (pdf == 0.0)
            break;
        const double step = err / pdf;
        x += step;
        if (std::abs(err) <= 1e-12 * std::min(1.0, eps * 1e3) || std::abs(step) <= 1e-15 * std::abs(x))
            break;
    }
    return x;
}

} // namespace mimobf

#endif
