// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <mimobf/linalg.hpp>
#include <mimobf/montecarlo.hpp>

#include "oracles.hpp"

using namespace mimobf;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, RngStream &rng) {
    Matrix m(r, c);
    for (double &v : m.data())
        v = rng.normal();
    return m;
}

Matrix random_symmetric(std::size_t n, RngStream &rng) {
    Matrix a = random_matrix(n, n, rng);
    return a + a.transpose();
}

double orthogonality_error(const Matrix &q) {
    return (q.transpose() * q - Matrix::identity(q.cols())).frobenius();
}

} // namespace

TEST(SymEigen, IdentityAndDiagonal) {
    EXPECT_EQ(sym_eigenvalues(Matrix::identity(3)), (std::vector<double>{1, 1, 1}));
    const Matrix d{{4, 0, 0}, {0, 9, 0}, {0, 0, 1}};
    EXPECT_EQ(sym_eigenvalues(d), (std::vector<double>{9, 4, 1}));
}

TEST(SymEigen, TwoByTwoMatchesQuadraticFormula) {
    RngStream rng(11, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const double a = rng.normal(), b = rng.normal(), d = rng.normal();
        const auto ev = sym_eigenvalues(Matrix{{a, b}, {b, d}});
        const auto [hi, lo] = oracle::eig2x2(a, b, d);
        EXPECT_NEAR(ev[0], hi, 1e-12);
        EXPECT_NEAR(ev[1], lo, 1e-12);
    }
}

TEST(SymEigen, TraceAndReconstruction) {
    RngStream rng(12, 0);
    for (std::size_t n : {1u, 2u, 5u, 16u, 40u}) {
        const Matrix a = random_symmetric(n, rng);
        const SymEigen e = sym_eigen(a);
        double trace = 0.0, sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            trace += a(i, i);
            sum += e.values[i];
        }
        EXPECT_NEAR(sum, trace, 1e-9 * std::max(1.0, a.frobenius()));
        EXPECT_TRUE(std::is_sorted(e.values.rbegin(), e.values.rend()));
        Matrix lam(n, n);
        for (std::size_t i = 0; i < n; ++i)
            lam(i, i) = e.values[i];
        const Matrix rec = e.vectors * lam * e.vectors.transpose();
        EXPECT_LE((rec - a).frobenius(), 1e-10 * std::max(1.0, a.frobenius()));
        EXPECT_LE(orthogonality_error(e.vectors), 1e-10);
    }
}

TEST(SymEigen, RejectsAsymmetricInput) {
    EXPECT_THROW(sym_eigenvalues(Matrix{{1, 2}, {0, 1}}), InvalidArgument);
    EXPECT_THROW(sym_eigenvalues(Matrix(2, 3)), InvalidArgument);
}

TEST(Svd, ZeroAndOrthogonalInputs) {
    const SvdResult z = svd(Matrix(3, 2));
    for (double s : z.sigma)
        EXPECT_EQ(s, 0.0);
    EXPECT_LE(orthogonality_error(z.u), 1e-10);
    EXPECT_LE(orthogonality_error(z.v), 1e-10);

    RngStream rng(3, 0);
    const Matrix q = sample_haar_orthogonal(5, rng);
    for (double s : svd(q).sigma)
        EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(Svd, ReconstructionAndEigenCrossCheck) {
    RngStream rng(13, 0);
    const std::vector<std::pair<std::size_t, std::size_t>> shapes{{3, 2}, {2, 3}, {4, 4}, {1, 5}, {6, 1}, {16, 7}};
    for (const auto &[m, n] : shapes) {
        for (int trial = 0; trial < 20; ++trial) {
            const Matrix a = random_matrix(m, n, rng);
            const SvdResult s = svd(a);
            ASSERT_EQ(s.sigma.size(), std::min(m, n));
            Matrix sig(m, n);
            for (std::size_t j = 0; j < s.sigma.size(); ++j)
                sig(j, j) = s.sigma[j];
            EXPECT_LE((s.u * sig * s.v.transpose() - a).frobenius(), 1e-10 * std::max(1.0, a.frobenius()));
            EXPECT_LE(orthogonality_error(s.u), 1e-10);
            EXPECT_LE(orthogonality_error(s.v), 1e-10);
            const auto ev = sym_eigenvalues(a * a.transpose());
            for (std::size_t j = 0; j < s.sigma.size(); ++j) {
                EXPECT_GE(s.sigma[j], 0.0);
                EXPECT_NEAR(s.sigma[j], std::sqrt(std::max(0.0, ev[j])), 1e-9);
            }
        }
    }
}

TEST(Svd, RankDeficientInput) {
    const Matrix a{{1, 2, 3}, {2, 4, 6}, {1, 2, 3}, {0, 0, 0}};
    const SvdResult s = svd(a);
    EXPECT_NEAR(s.sigma[1], 0.0, 1e-12);
    EXPECT_LE(orthogonality_error(s.u), 1e-10);
    Matrix sig(4, 3);
    for (std::size_t j = 0; j < 3; ++j)
        sig(j, j) = s.sigma[j];
    EXPECT_LE((s.u * sig * s.v.transpose() - a).frobenius(), 1e-10 * a.frobenius());
}

TEST(Cholesky, SolveAndLogDet) {
    const Matrix a{{4, 2, 0}, {2, 5, 1}, {0, 1, 3}};
    const Matrix l = cholesky(a);
    EXPECT_LE((l * l.transpose() - a).frobenius(), 1e-14);
    // det = 4(15-1) - 2(6) = 44
    EXPECT_NEAR(log_det_from_cholesky(l), std::log(44.0), 1e-14);
    const Matrix b{{1}, {2}, {3}};
    EXPECT_LE((a * cholesky_solve(l, b) - b).frobenius(), 1e-14);
    EXPECT_THROW(cholesky(Matrix{{1, 2}, {2, 1}}), NumericalFailure);
}

TEST(Haar, OrthogonalAndDeterministic) {
    RngStream r1(5, 9), r2(5, 9);
    for (std::size_t n : {1u, 2u, 3u, 8u, 32u}) {
        const Matrix a = sample_haar_orthogonal(n, r1);
        const Matrix b = sample_haar_orthogonal(n, r2);
        EXPECT_LE(orthogonality_error(a), 1e-10);
        EXPECT_EQ(a, b);
    }
}

TEST(Haar, OneDimensionalSign) {
    RngStream rng(21, 0);
    const int draws = 100000;
    int plus = 0;
    for (int i = 0; i < draws; ++i) {
        const double v = sample_haar_orthogonal(1, rng)(0, 0);
        ASSERT_TRUE(v == 1.0 || v == -1.0);
        plus += v > 0;
    }
    EXPECT_NEAR(double(plus) / draws, 0.5, 3.0 * 0.5 / std::sqrt(draws));
}

// The six fourth-order moments of Haar matrices, at index choices i≠k, j≠l.
TEST(Haar, MomentSuite) {
    for (std::size_t n : {2u, 3u, 4u, 8u}) {
        MonteCarloConfig mc{100000, 7 + n, 4096, 0};
        const SampleTable t = fill_samples(mc, StreamTag::Haar, 6, [n](RngStream &rng, double *row) {
            const Matrix v = sample_haar_orthogonal(n, rng);
            const double vij = v(0, 0), vik = v(0, 1), vkl = v(1, 1), vlj = v(1, 0);
            row[0] = vij * vij;
            row[1] = vij * vik;
            row[2] = vij * vij * vik * vik;
            row[3] = vij * vij * vkl * vkl;
            row[4] = vij * vij * vij * vij;
            row[5] = vij * vik * vlj * vkl;
        });
        const double N = double(n);
        const double expect[6] = {1 / N,
                                  0.0,
                                  1 / (N * (N + 2)),
                                  (N + 1) / (N * (N - 1) * (N + 2)),
                                  3 / (N * (N + 2)),
                                  -1 / (N * (N - 1) * (N + 2))};
        JackknifeMoments jk(t);
        for (std::size_t c = 0; c < 6; ++c) {
            const double mean = jk.full().mean(c);
            const double se = std::sqrt(jk.full().var(c) / double(mc.samples));
            EXPECT_LE(std::abs(mean - expect[c]), 4 * se) << "n=" << n << " moment " << c + 1 << " mean=" << mean;
        }
    }
}

TEST(Qfunc, BasicValues) {
    EXPECT_EQ(qfunc(0.0), 0.5);
    EXPECT_LT(qfunc(10.0), 1e-22);
    EXPECT_GT(qfunc(10.0), 0.0);
    double prev = 1.0;
    for (double x = -8; x <= 8; x += 0.25) {
        EXPECT_LT(qfunc(x), prev);
        prev = qfunc(x);
    }
}

TEST(Qfunc, MatchesQuadratureOracle) {
    for (double x : {-3.0, -1.0, 0.3, 1.0, 2.5, 3.0902, 5.0}) {
        const double ref = oracle::q_by_quadrature(x);
        EXPECT_NEAR(qfunc(x), ref, 1e-12) << x;
    }
    EXPECT_NEAR(qfunc(3.0902) / oracle::q_by_quadrature(3.0902), 1.0, 1e-6);
    EXPECT_NEAR(qfunc(3.0902), 1e-3, 1e-6);
}

TEST(QfuncInv, ValuesAndSymmetry) {
    EXPECT_EQ(qfunc_inv(0.5), 0.0);
    EXPECT_NEAR(qfunc_inv(1e-3), oracle::qinv_by_bisection(1e-3), 1e-4);
    EXPECT_NEAR(qfunc_inv(1e-3), 3.0902, 1e-4);
    for (double eps : {1e-12, 1e-9, 1e-6, 1e-3, 0.01, 0.1, 0.3, 0.49}) {
        const double x = qfunc_inv(eps);
        EXPECT_NEAR(qfunc(x), eps, 1e-10);
        EXPECT_NEAR(qfunc(x) / eps, 1.0, 1e-9);
        // 1 - eps is rounded; that perturbs the mirror point by about ulp(1)/pdf(x).
        const double slack = 4e-16 / oracle::normal_pdf(x) + 1e-12;
        EXPECT_NEAR(qfunc_inv(1.0 - eps), -x, slack);
    }
    for (double eps : {0.25, 0.125, 0.0625, 0.03125})
        EXPECT_EQ(qfunc_inv(1.0 - eps), -qfunc_inv(eps));
}

TEST(QfuncInv, RejectsOutOfRange) {
    EXPECT_THROW(qfunc_inv(0.0), InvalidArgument);
    EXPECT_THROW(qfunc_inv(1.0), InvalidArgument);
    EXPECT_THROW(qfunc_inv(-0.1), InvalidArgument);
}

TEST(Rng, StreamsAreReproducibleAndDistinct) {
    RngStream a(1, 2), b(1, 2), c(1, 3), d(2, 2);
    for (int i = 0; i < 100; ++i) {
        const double x = a.normal();
        EXPECT_EQ(x, b.normal());
        EXPECT_NE(x, c.normal());
        EXPECT_NE(x, d.normal());
    }
}

TEST(MonteCarlo, ThreadCountInvariant) {
    auto run = [](unsigned threads) {
        MonteCarloConfig mc{20000, 99, 1000, threads};
        return fill_samples(mc, StreamTag::ChannelUse, 2, [](RngStream &rng, double *row) {
                   row[0] = rng.normal();
                   row[1] = rng.uniform();
               })
            .data;
    };
    const auto one = run(1);
    EXPECT_EQ(one, run(3));
    EXPECT_EQ(one, run(8));
}

TEST(MonteCarlo, ConstantColumnsAreExact) {
    MonteCarloConfig mc{1000, 1, 64, 0};
    const SampleTable t = fill_samples(mc, StreamTag::ChannelUse, 1, [](RngStream &, double *row) { row[0] = 0.1; });
    JackknifeMoments jk(t);
    EXPECT_EQ(jk.full().mean(0), 0.1);
    EXPECT_EQ(jk.full().var(0), 0.0);
    const Estimate e = jk.estimate([](const Moments &m) { return m.mean(0); });
    EXPECT_EQ(e.value, 0.1);
    EXPECT_EQ(e.std_error, 0.0);
}

TEST(MonteCarlo, JackknifeMatchesClassicalStandardError) {
    MonteCarloConfig mc{100000, 4, 4096, 0};
    const SampleTable t = fill_samples(mc, StreamTag::ChannelUse, 1, [](RngStream &rng, double *row) { row[0] = rng.normal(); });
    JackknifeMoments jk(t);
    const Estimate e = jk.estimate([](const Moments &m) { return m.mean(0); });
    const double classical = std::sqrt(jk.full().var(0) / 1e5);
    // Twenty groups: the jackknife estimate scatters about ±16% around the truth.
    EXPECT_NEAR(e.std_error / classical, 1.0, 0.5);
}
