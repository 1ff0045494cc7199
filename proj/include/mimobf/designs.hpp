// SPDX-License-Identifier: Apache-2.0
//
// mimobf: finite-blocklength limits of coherent MIMO block-fading channels
// ------------------------------------------------------------------------
//
// Hurwitz–Radon families, full-rate orthogonal designs, second-moment checks
// for capacity-achieving Gaussian inputs on rank-1 fading, and bounds on the
// largest achievable normalized variance of ‖X‖_F².

#ifndef MIMOBF_DESIGNS_HPP
#define MIMOBF_DESIGNS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "matrix.hpp"

namespace mimobf {

/// Hurwitz–Radon number: ρ(2^a b) = 8⌊a/4⌋ + 2^(a mod 4) for odd b.
inline int rho(int n) {
    require(n >= 1, "rho: n must be positive");
    int a = 0;
    while (n % 2 == 0) {
        n /= 2;
        ++a;
    }
    return 8 * (a / 4) + (1 << (a % 4));
}

/// Dense square integer matrix, row-major.
struct IntMatrix {
    int n = 0;
    std::vector<int> v;

    IntMatrix() = default;
    explicit IntMatrix(int size) : n(size), v(std::size_t(size) * size, 0) {}
    static IntMatrix identity(int size) {
        IntMatrix m(size);
        for (int i = 0; i < size; ++i)
            m(i, i) = 1;
        return m;
    }
    int &operator()(int r, int c) { return v[std::size_t(r) * n + c]; }
    int operator()(int r, int c) const { return v[std::size_t(r) * n + c]; }
    friend bool operator==(const IntMatrix &, const IntMatrix &) = default;
};

inline IntMatrix kron(const IntMatrix &a, const IntMatrix &b) {
    IntMatrix out(a.n * b.n);
    for (int i = 0; i < a.n; ++i)
        for (int j = 0; j < a.n; ++j) {
            const int aij = a(i, j);
            if (aij == 0)
                continue;
            for (int k = 0; k < b.n; ++k)
                for (int l = 0; l < b.n; ++l)
                    out(i * b.n + k, j * b.n + l) = aij * b(k, l);
        }
    return out;
}

// Aᵀ B.
inline IntMatrix transpose_times(const IntMatrix &a, const IntMatrix &b) {
    IntMatrix out(a.n);
    for (int k = 0; k < a.n; ++k)
        for (int i = 0; i < a.n; ++i) {
            const int aki = a(k, i);
            if (aki == 0)
                continue;
            for (int j = 0; j < a.n; ++j)
                out(i, j) += aki * b(k, j);
        }
    return out;
}

struct HurwitzRadonFamily {
    int n = 0;
    std::vector<IntMatrix> mats;
    int k() const { return static_cast<int>(mats.size()); }
};

struct HrCheck {
    bool ok = true;
    std::string violation; // first failed condition, empty when ok
};

/// Exact integer check of VᵢᵀVᵢ = I and VᵢᵀVⱼ + VⱼᵀVᵢ = 0 (i ≠ j).
inline HrCheck check_hr(const HurwitzRadonFamily &fam) {
    const IntMatrix eye = IntMatrix::identity(fam.n);
    for (int i = 0; i < fam.k(); ++i) {
        const IntMatrix &m = fam.mats[i];
        if (m.n != fam.n || m.v.size() != std::size_t(fam.n) * fam.n)
            return {false, "matrix " + std::to_string(i + 1) + " has the wrong size"};
        for (int x : m.v)
            if (x < -1 || x > 1)
                return {false, "matrix " + std::to_string(i + 1) + " has an entry outside {-1,0,1}"};
        if (!(transpose_times(m, m) == eye))
            return {false, "orthogonality fails for matrix " + std::to_string(i + 1)};
    }
    for (int i = 0; i < fam.k(); ++i)
        for (int j = i + 1; j < fam.k(); ++j) {
            const IntMatrix a = transpose_times(fam.mats[i], fam.mats[j]);
            const IntMatrix b = transpose_times(fam.mats[j], fam.mats[i]);
            for (std::size_t e = 0; e < a.v.size(); ++e)
                if (a.v[e] + b.v[e] != 0)
                    return {false, "anticommutation fails for pair (" + std::to_string(i + 1) + "," +
                                       std::to_string(j + 1) + ")"};
        }
    return {};
}

namespace detail {

// Tensor words over {I, X, Z, J} with J = [[0,1],[-1,0]]. A word is skew
// exactly when it holds an odd number of J factors; two words anticommute
// exactly when the positions where both are non-identity and differ are odd
// in number.
using Word = std::vector<int>; // 0=I, 1=X, 2=Z, 3=J

inline bool word_skew(const Word &w) { return std::count(w.begin(), w.end(), 3) % 2 == 1; }

inline bool words_anticommute(const Word &a, const Word &b) {
    int c = 0;
    for (std::size_t p = 0; p < a.size(); ++p)
        if (a[p] && b[p] && a[p] != b[p])
            ++c;
    return c % 2 == 1;
}

inline IntMatrix word_matrix(const Word &w) {
    static const IntMatrix factors[4] = {
        [] { IntMatrix m(2); m.v = {1, 0, 0, 1}; return m; }(),
        [] { IntMatrix m(2); m.v = {0, 1, 1, 0}; return m; }(),
        [] { IntMatrix m(2); m.v = {1, 0, 0, -1}; return m; }(),
        [] { IntMatrix m(2); m.v = {0, 1, -1, 0}; return m; }(),
    };
    IntMatrix out = IntMatrix::identity(1);
    for (int f : w)
        out = kron(out, factors[f]);
    return out;
}

// First (in word order) set of `need` mutually anticommuting skew words on
// `a` positions; depth-first with candidate filtering.
inline bool search_words(const std::vector<Word> &cands, std::size_t need, std::vector<Word> &chosen) {
    if (chosen.size() == need)
        return true;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        if (cands.size() - i < need - chosen.size())
            return false;
        std::vector<Word> rest;
        for (std::size_t j = i + 1; j < cands.size(); ++j)
            if (words_anticommute(cands[i], cands[j]))
                rest.push_back(cands[j]);
        chosen.push_back(cands[i]);
        if (search_words(rest, need, chosen))
            return true;
        chosen.pop_back();
    }
    return false;
}

inline std::vector<Word> maximal_skew_words(int a) {
    static std::mutex guard;
    static std::map<int, std::vector<Word>> cache;
    std::lock_guard<std::mutex> lock(guard);
    if (auto it = cache.find(a); it != cache.end())
        return it->second;
    std::vector<Word> cands;
    const std::uint64_t total = std::uint64_t{1} << (2 * a);
    for (std::uint64_t code = 0; code < total; ++code) {
        Word w(a);
        for (int p = 0; p < a; ++p)
            w[p] = static_cast<int>((code >> (2 * (a - 1 - p))) & 3u);
        if (word_skew(w))
            cands.push_back(std::move(w));
    }
    const std::size_t need = static_cast<std::size_t>(rho(1 << a) - 1);
    std::vector<Word> chosen;
    if (!search_words(cands, need, chosen))
        throw NumericalFailure("build_hr_family: word search failed for 2^" + std::to_string(a));
    cache[a] = chosen;
    return chosen;
}

} // namespace detail

/// k signed-permutation matrices of size n satisfying the Hurwitz–Radon
/// conditions. The first is always the identity. Every family is verified
/// before it is returned.
inline HurwitzRadonFamily build_hr_family(int n, int k) {
    require(n >= 1, "build_hr_family: n must be positive");
    require(k >= 1 && k <= rho(n), "build_hr_family: k must lie in [1, rho(n)] (rho(" + std::to_string(n) +
                                       ") = " + std::to_string(rho(n)) + ")");
    int a = 0, b = n;
    while (b % 2 == 0) {
        b /= 2;
        ++a;
    }
    require(a <= 10, "build_hr_family: power-of-two part too large");
    HurwitzRadonFamily fam;
    fam.n = n;
    const IntMatrix tail = IntMatrix::identity(b);
    fam.mats.push_back(IntMatrix::identity(n));
    if (k > 1) {
        const auto words = detail::maximal_skew_words(a);
        for (int i = 0; i + 1 < k; ++i)
            fam.mats.push_back(kron(detail::word_matrix(words[i]), tail));
    }
    const HrCheck chk = check_hr(fam);
    if (!chk.ok)
        throw NumericalFailure("build_hr_family: constructed family failed verification: " + chk.violation);
    return fam;
}

/// n_t × T grid of signed indeterminate indices: 0 for an empty cell, ±k for ±ξ_k (k ≥ 1).
struct OccupancyDesign {
    int rows = 0;
    int cols = 0;
    int num_indeterminates = 0;
    std::vector<int> cells;

    OccupancyDesign() = default;
    OccupancyDesign(int r, int c, int d) : rows(r), cols(c), num_indeterminates(d), cells(std::size_t(r) * c, 0) {}

    int &at(int i, int j) { return cells[std::size_t(i) * cols + j]; }
    int at(int i, int j) const { return cells[std::size_t(i) * cols + j]; }

    /// ℓ_t: occurrences of ±ξ_t, t = 1..d (index 0 unused).
    std::vector<long> occupancy() const {
        std::vector<long> l(std::size_t(num_indeterminates) + 1, 0);
        for (int c : cells)
            if (c != 0)
                ++l[std::size_t(std::abs(c))];
        return l;
    }

    /// Σ ℓ_t².
    long score() const {
        long s = 0;
        for (long x : occupancy())
            s += x * x;
        return s;
    }

    OccupancyDesign transpose() const {
        OccupancyDesign t(cols, rows, num_indeterminates);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j)
                t.at(j, i) = at(i, j);
        return t;
    }

    OccupancyDesign submatrix(const std::vector<int> &rs, const std::vector<int> &cs) const {
        OccupancyDesign s(static_cast<int>(rs.size()), static_cast<int>(cs.size()), num_indeterminates);
        for (std::size_t i = 0; i < rs.size(); ++i)
            for (std::size_t j = 0; j < cs.size(); ++j)
                s.at(int(i), int(j)) = at(rs[i], cs[j]);
        return s;
    }

    /// Cell token: "+x3", "-x1" or "0".
    std::string token(int i, int j) const {
        const int c = at(i, j);
        if (c == 0)
            return "0";
        return (c > 0 ? "+x" : "-x") + std::to_string(std::abs(c));
    }

    void validate() const {
        require(rows >= 1 && cols >= 1, "OccupancyDesign: empty design");
        require(cells.size() == std::size_t(rows) * cols, "OccupancyDesign: cell count mismatch");
        for (int c : cells)
            require(std::abs(c) <= num_indeterminates, "OccupancyDesign: indeterminate index out of range");
    }
};

/// Design whose row i is ξ·Vᵢ for the first n_t members of the family.
inline OccupancyDesign assemble_design(const HurwitzRadonFamily &fam, int n_t) {
    require(n_t >= 1 && n_t <= fam.k(), "assemble_design: n_t must lie in [1, family size]");
    const HrCheck chk = check_hr(fam);
    require(chk.ok, "assemble_design: family is not Hurwitz-Radon: " + chk.violation);
    OccupancyDesign d(n_t, fam.n, fam.n);
    for (int i = 0; i < n_t; ++i)
        for (int j = 0; j < fam.n; ++j)
            for (int k = 0; k < fam.n; ++k)
                if (const int s = fam.mats[i](k, j); s != 0)
                    d.at(i, j) = s * (k + 1);
    return d;
}

/// Full-rate orthogonal design of size n_t × T when n_t ≤ ρ(T), or the
/// transpose of a T × n_t one when T ≤ ρ(n_t).
inline OccupancyDesign full_rate_design(int n_t, int T) {
    require(n_t >= 1 && T >= 1, "full_rate_design: dimensions must be positive");
    if (n_t <= rho(T))
        return assemble_design(build_hr_family(T, rho(T)), n_t);
    require(T <= rho(n_t), "full_rate_design: needs n_t <= rho(T) or T <= rho(n_t)");
    return assemble_design(build_hr_family(n_t, rho(n_t)), T).transpose();
}

/// Covariance of vec(X) (row-major, index i·T + k), together with the shape
/// and per-entry power it describes.
struct GaussianCaidCov {
    int n_t = 0;
    int T = 0;
    double power = 0.0;
    Matrix cov;
};

/// Covariance when the ξ_k are i.i.d. N(0, P/n_t).
inline GaussianCaidCov design_cov(const OccupancyDesign &design, double power) {
    design.validate();
    require(power > 0.0, "design_cov: power must be positive");
    const int n = design.rows * design.cols;
    const double a = power / design.rows;
    GaussianCaidCov out{design.rows, design.cols, power, Matrix(n, n)};
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
            const int cp = design.cells[p], cq = design.cells[q];
            if (cp != 0 && std::abs(cp) == std::abs(cq))
                out.cov(p, q) = a * ((cp > 0) == (cq > 0) ? 1.0 : -1.0);
        }
    return out;
}

/// The one-parameter Gaussian family of 2×2 capacity-achieving inputs.
inline GaussianCaidCov gaussian_caid_2x2(double corr, double power) {
    require(std::abs(corr) <= 1.0, "gaussian_caid_2x2: correlation must lie in [-1, 1]");
    require(power > 0.0, "gaussian_caid_2x2: power must be positive");
    const double s = std::sqrt(1.0 - corr * corr);
    // Loadings of (X11, X12, X21, X22) on (ξ1..ξ4), before the sqrt(P/2) scale.
    const Matrix load{{1, 0, 0, 0}, {0, -corr, s, 0}, {0, 1, 0, 0}, {corr, 0, 0, s}};
    Matrix cov = load * load.transpose();
    cov *= power / 2.0;
    return {2, 2, power, cov};
}

struct CaidCheck {
    bool rows_ok = true;
    bool cols_ok = true;
    std::vector<std::string> violations;
    bool ok() const { return rows_ok && cols_ok; }
};

/// Second-moment conditions on rows and columns:
///   E[RᵢᵀRᵢ] = (P/n_t) I_T,  E[RᵢᵀRⱼ] = −E[RⱼᵀRᵢ],
///   E[CₖCₖᵀ] = (P/n_t) I_{n_t},  E[CₖCₗᵀ] = −E[CₗCₖᵀ].
inline CaidCheck check_caid(const GaussianCaidCov &g, double tol = 1e-10) {
    const int n_t = g.n_t, T = g.T;
    const std::size_t n = std::size_t(n_t) * T;
    require(g.cov.rows() == n && g.cov.cols() == n, "check_caid: covariance must be (n_t T) x (n_t T)");
    require(g.power > 0.0, "check_caid: power must be positive");
    const double scale = std::max(1.0, g.cov.frobenius());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j)
            require(std::abs(g.cov(i, j) - g.cov(j, i)) <= 1e-12 * scale, "check_caid: covariance is not symmetric");
    const auto ev = sym_eigenvalues(g.cov);
    require(ev.back() >= -1e-10 * scale, "check_caid: covariance is not positive semidefinite");

    const double a = g.power / n_t;
    auto c = [&](int i, int k, int j, int l) { return g.cov(std::size_t(i) * T + k, std::size_t(j) * T + l); };
    CaidCheck out;
    auto fail = [&](bool &flag, const std::string &what) {
        flag = false;
        if (out.violations.size() < 16)
            out.violations.push_back(what);
    };
    auto loc = [](int a1, int a2, int b1, int b2) {
        return " at (" + std::to_string(a1 + 1) + "," + std::to_string(a2 + 1) + "),(" + std::to_string(b1 + 1) + "," +
               std::to_string(b2 + 1) + ")";
    };
    for (int i = 0; i < n_t; ++i)
        for (int j = 0; j < n_t; ++j)
            for (int k = 0; k < T; ++k)
                for (int l = 0; l < T; ++l) {
                    if (i == j) {
                        const double want = k == l ? a : 0.0;
                        if (std::abs(c(i, k, i, l) - want) > tol)
                            fail(out.rows_ok, "row1" + loc(i, k, i, l));
                    } else if (std::abs(c(i, k, j, l) + c(j, k, i, l)) > tol) {
                        fail(out.rows_ok, "row2" + loc(i, k, j, l));
                    }
                    if (k == l) {
                        const double want = i == j ? a : 0.0;
                        if (std::abs(c(i, k, j, k) - want) > tol)
                            fail(out.cols_ok, "col1" + loc(i, k, j, k));
                    } else if (std::abs(c(i, k, j, l) + c(i, l, j, k)) > tol) {
                        fail(out.cols_ok, "col2" + loc(i, k, j, l));
                    }
                }
    return out;
}

/// Covariance of a row/column submatrix of a Gaussian input.
inline GaussianCaidCov sub_cov(const GaussianCaidCov &g, const std::vector<int> &rs, const std::vector<int> &cs) {
    GaussianCaidCov out{static_cast<int>(rs.size()), static_cast<int>(cs.size()), 0.0, {}};
    out.power = g.power * out.n_t / g.n_t; // keep the per-entry power P/n_t
    const std::size_t n = rs.size() * cs.size();
    out.cov = Matrix(n, n);
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = 0; q < n; ++q) {
            const std::size_t i = rs[p / cs.size()], k = cs[p % cs.size()];
            const std::size_t j = rs[q / cs.size()], l = cs[q % cs.size()];
            out.cov(p, q) = g.cov(i * g.T + k, j * g.T + l);
        }
    return out;
}

/// Normalized variance n_t²/(2P²)·Var‖X‖_F² = (n_t/P)² ‖Cov‖_F² for Gaussian X.
inline double caid_score(const GaussianCaidCov &g) {
    const double k = g.n_t / g.power;
    return k * k * g.cov.frobenius_sq();
}

struct FrobVariance {
    double variance = 0.0; // Var ‖X‖_F²
    long score = 0;        // Σ ℓ_t²
    double score_from_cov = 0.0;
};

inline FrobVariance var_frobsq(const OccupancyDesign &design, double power) {
    const GaussianCaidCov g = design_cov(design, power);
    FrobVariance out;
    out.variance = 2.0 * g.cov.frobenius_sq();
    out.score = design.score();
    out.score_from_cov = caid_score(g);
    return out;
}

struct VstarBound {
    long upper = 0;
    bool exact = false;
};

/// v*(n_t,T) ≤ n_t T min(n_t,T), with equality when n_t ≤ ρ(T) or T ≤ ρ(n_t).
inline VstarBound vstar_upper(int n_t, int T) {
    require(n_t >= 1 && T >= 1, "vstar_upper: dimensions must be positive");
    return {long(n_t) * T * std::min(n_t, T), n_t <= rho(T) || T <= rho(n_t)};
}

struct TruncationResult {
    OccupancyDesign design;
    long score = 0;
    std::vector<int> rows;
    std::vector<int> cols;
};

namespace detail {

inline double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i)
        r = r * (n - k + i) / i;
    return r;
}

// Visit all k-subsets of {0..n-1} in lexicographic order.
inline void for_each_subset(int n, int k, const std::function<void(const std::vector<int> &)> &fn) {
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i)
        idx[i] = i;
    for (;;) {
        fn(idx);
        int i = k - 1;
        while (i >= 0 && idx[i] == n - k + i)
            --i;
        if (i < 0)
            return;
        ++idx[i];
        for (int j = i + 1; j < k; ++j)
            idx[j] = idx[j - 1] + 1;
    }
}

} // namespace detail

inline constexpr double kMaxTruncationSubsets = 2e7;

/// Exhaustive search for the n_t × T submatrix of `base` with the largest
/// Σ ℓ_t². Ties keep the lexicographically first (row subset, column subset).
inline TruncationResult truncation_search(int n_t, int T, const OccupancyDesign &base) {
    base.validate();
    require(n_t >= 1 && T >= 1, "truncation_search: dimensions must be positive");
    require(n_t <= base.rows && T <= base.cols, "truncation_search: target exceeds base design");
    require(detail::binomial(base.rows, n_t) * detail::binomial(base.cols, T) <= kMaxTruncationSubsets,
            "truncation_search: search space too large");

    TruncationResult best;
    best.score = -1;
    std::vector<long> counts(std::size_t(base.num_indeterminates) + 1);
    detail::for_each_subset(base.rows, n_t, [&](const std::vector<int> &rs) {
        detail::for_each_subset(base.cols, T, [&](const std::vector<int> &cs) {
            std::fill(counts.begin(), counts.end(), 0);
            for (int r : rs)
                for (int c : cs)
                    if (const int v = base.at(r, c); v != 0)
                        ++counts[std::size_t(std::abs(v))];
            long s = 0;
            for (long x : counts)
                s += x * x;
            if (s > best.score) {
                best.score = s;
                best.rows = rs;
                best.cols = cs;
            }
        });
    });
    best.design = base.submatrix(best.rows, best.cols);
    return best;
}

struct VstarEntry {
    int n_t = 0;
    int T = 0;
    long lower = 0;
    long upper = 0;
    bool exact = false;
    std::string method; // "design", "truncation" or "iid"
};

/// Smallest power of two m ≥ max(lo, 8) whose ρ(m) ≥ need: the side of the
/// square base design used for truncation.
inline int truncation_base_size(int need, int lo) {
    int m = 8;
    while (m < lo || rho(m) < need)
        m *= 2;
    return m;
}

/// Exact values where the bound is tight, otherwise [truncation lower bound, upper bound].
inline VstarEntry vstar_entry(int n_t, int T) {
    const VstarBound ub = vstar_upper(n_t, T);
    VstarEntry e{n_t, T, 0, ub.upper, ub.exact, ""};
    if (ub.exact) {
        e.lower = full_rate_design(n_t, T).score();
        e.method = "design";
        if (e.lower != ub.upper)
            throw NumericalFailure("vstar_entry: full-rate design score disagrees with the upper bound");
        return e;
    }
    const int small = std::min(n_t, T), large = std::max(n_t, T);
    const int m = truncation_base_size(small, large);
    const int r = rho(m);
    if (detail::binomial(r, small) * detail::binomial(m, large) <= kMaxTruncationSubsets) {
        const OccupancyDesign base = assemble_design(build_hr_family(m, r), r);
        e.lower = truncation_search(small, large, base).score;
        e.method = "truncation";
    } else {
        e.lower = long(n_t) * T;
        e.method = "iid";
    }
    return e;
}

/// Rows n_t = 1..max_dim, columns T = 1..max_dim (row-major).
inline std::vector<VstarEntry> vstar_table(int max_dim) {
    require(max_dim >= 1, "vstar_table: max_dim must be positive");
    std::vector<VstarEntry> out(std::size_t(max_dim) * max_dim);
    for (int i = 1; i <= max_dim; ++i)
        for (int j = i; j <= max_dim; ++j) {
            VstarEntry e = vstar_entry(i, j);
            out[std::size_t(i - 1) * max_dim + (j - 1)] = e;
            std::swap(e.n_t, e.T);
            out[std::size_t(j - 1) * max_dim + (i - 1)] = e;
        }
    return out;
}

} // namespace mimobf

#endif
