// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <mimobf/dispersion.hpp>
#include <mimobf/infodensity.hpp>

#include "oracles.hpp"

using namespace mimobf;

namespace {

ChannelParams params(int nt, int nr, int T, double P) { return {nt, nr, T, P, PowerConvention::Transmit}; }

MonteCarloConfig mc(std::uint64_t samples = 100000, std::uint64_t seed = 1) { return {samples, seed, 4096, 0}; }

const FadingModel kGauss = FadingModel::iid_gaussian();
const FadingModel kRad = FadingModel::scalar_rademacher();

} // namespace

TEST(Closed, CSigma) {
    EXPECT_EQ(c_sigma(0.0, params(2, 2, 1, 5.0)), 0.0);
    EXPECT_EQ(c_sigma(1.0, params(3, 1, 1, 3.0)), 0.5);
    EXPECT_NEAR(c_sigma(1e12, params(4, 1, 1, 2.0)), 2.0, 1e-10);
    EXPECT_LT(c_sigma(1e12, params(4, 1, 1, 2.0)), 2.0);
    EXPECT_THROW(c_sigma(-1.0, params(1, 1, 1, 1.0)), InvalidArgument);
}

TEST(Closed, AwgnCapacityAndDispersion) {
    EXPECT_EQ(capacity_awgn(0.0), 0.0);
    EXPECT_NEAR(capacity_awgn(1.0), 0.5 * std::log(2.0), 1e-16);
    EXPECT_NEAR(capacity_awgn(std::exp(2.0) - 1.0), 1.0, 1e-15);
    EXPECT_EQ(dispersion_awgn(0.0), 0.0);
    EXPECT_EQ(dispersion_awgn(1.0), 0.375);
    EXPECT_NEAR(dispersion_awgn(1e9), 0.5, 1e-15);
    EXPECT_LT(dispersion_awgn(1e6), 0.5);
    double prev = -1;
    for (double p = 0; p < 100; p += 0.5) {
        EXPECT_GT(capacity_awgn(p), prev);
        prev = capacity_awgn(p);
    }
}

TEST(Capacity, ZeroPowerIsExactlyZero) {
    const Estimate c = capacity(params(3, 2, 2, 0.0), kGauss, mc());
    EXPECT_EQ(c.value, 0.0);
    EXPECT_EQ(c.std_error, 0.0);
}

TEST(Capacity, RademacherIsAwgn) {
    const Estimate c = capacity(params(1, 1, 1, 1.0), kRad, mc(1000));
    EXPECT_EQ(c.value, capacity_awgn(1.0));
    EXPECT_EQ(c.std_error, 0.0);
}

TEST(Capacity, ScalarGaussianMatchesQuadrature) {
    const double ref = oracle::gaussian_expectation([](double g) { return 0.5 * std::log1p(g * g); });
    // The Hermite rule against plain quadrature of the same integral.
    const double ref2 =
        2 * oracle::integrate([](double g) { return oracle::normal_pdf(g) * 0.5 * std::log1p(g * g); }, 0, 40, 8000);
    ASSERT_NEAR(ref, ref2, 1e-6);
    const Estimate c = capacity(params(1, 1, 1, 1.0), kGauss, mc());
    EXPECT_GT(c.std_error, 0.0);
    EXPECT_NEAR(c.value, ref2, 3 * c.std_error);
}

TEST(Capacity, LogDetRouteAgreesPerSample) {
    RngStream rng(3, 0);
    for (auto [nt, nr] : std::vector<std::pair<int, int>>{{2, 2}, {4, 2}, {1, 5}, {6, 3}}) {
        const auto p = params(nt, nr, 1, 7.0);
        const Matrix h = sample_H(kGauss, p, rng);
        double eig_route = 0.0;
        for (double s : eigs_of_gram(h))
            eig_route += capacity_awgn(p.power / nt * s);
        Matrix sigma = gram_rows(h) * (p.power / nt);
        for (int i = 0; i < nr; ++i)
            sigma(i, i) += 1.0;
        EXPECT_NEAR(0.5 * log_det_from_cholesky(cholesky(sigma)), eig_route, 1e-9);
    }
}

TEST(Eta, RademacherDegenerate) {
    const EtaMoments e = eta_moments(params(1, 1, 1, 1.0), kRad, mc(1000));
    EXPECT_EQ(e.eta1.value, 0.125);
    EXPECT_EQ(e.eta2.value, 0.125);
    EXPECT_EQ(e.eta3.value, 0.0);
    EXPECT_EQ(e.eta4.value, 0.25 / 6.0);
    EXPECT_EQ(e.eta5.value, 0.25);
    EXPECT_EQ(e.eta1.std_error, 0.0);
}

TEST(Eta, ZeroPowerUsesRawEigenvalues) {
    // c(s) = s at P = 0, so the moments are Wishart moments of HHᵀ.
    const EtaMoments e = eta_moments(params(2, 2, 1, 0.0), kGauss, mc());
    EXPECT_NEAR(e.eta1.value, 10.0, 4 * e.eta1.std_error); // ½ E tr W² = ½·n_t n_r (n_t+n_r+1)
    EXPECT_NEAR(e.eta2.value, 8.0, 4 * e.eta2.std_error);  // ½ (E tr W)²
    EXPECT_NEAR(e.eta3.value, 2.0, 4 * e.eta3.std_error);  // ¼ Var χ²₄
}

TEST(Eta, PowerTermNonNegative) {
    const DispersionReport r = v_iid(params(2, 2, 1, 4.0), kGauss, mc());
    EXPECT_GE(r.power_term.value, -4 * r.power_term.std_error);
    EXPECT_GE(r.eta.eta1.value, 0.0);
    EXPECT_GE(r.eta.eta2.value, 0.0);
    EXPECT_GE(r.eta.eta3.value, 0.0);
    EXPECT_GE(r.eta.eta4.value, -4 * r.eta.eta4.std_error);
}

TEST(Viid, RademacherIsAwgnDispersion) {
    const DispersionReport r = v_iid(params(1, 1, 1, 1.0), kRad, mc(1000));
    EXPECT_EQ(r.capacity.value, capacity_awgn(1.0));
    EXPECT_EQ(r.dispersion.value, 0.375);
    EXPECT_EQ(r.fading_term.value, 0.0);
    EXPECT_EQ(r.power_term.value, 0.0);
    EXPECT_EQ(r.dispersion.std_error, 0.0);
}

TEST(Viid, ZeroPower) {
    const DispersionReport r = v_iid(params(4, 4, 4, 0.0), kGauss, mc());
    EXPECT_EQ(r.capacity.value, 0.0);
    EXPECT_EQ(r.dispersion.value, 0.0);
}

TEST(Viid, ScalarGaussianTermsPositive) {
    const DispersionReport r = v_iid(params(1, 1, 1, 1.0), kGauss, mc());
    EXPECT_GT(r.fading_term.value, 4 * r.fading_term.std_error);
    EXPECT_GT(r.awgn_term.value, 4 * r.awgn_term.std_error);
    EXPECT_GT(r.power_term.value, 4 * r.power_term.std_error);
    EXPECT_NEAR(r.dispersion.value, r.fading_term.value + r.awgn_term.value + r.power_term.value, 1e-12);
}

TEST(Viid, TermsNonNegativeOnGrid) {
    for (int nt : {1, 3})
        for (int nr : {1, 2})
            for (int T : {1, 4})
                for (double P : {0.5, 30.0}) {
                    const DispersionReport r = v_iid(params(nt, nr, T, P), kGauss, mc(20000, 5));
                    for (const Estimate *e : {&r.fading_term, &r.awgn_term, &r.power_term})
                        EXPECT_GE(e->value, -4 * e->std_error) << nt << "x" << nr << " T=" << T << " P=" << P;
                }
}

TEST(Viid, Deterministic) {
    MonteCarloConfig a = mc(30000, 77), b = mc(30000, 77);
    a.threads = 1;
    b.threads = 4;
    const auto ra = v_iid(params(3, 2, 2, 10.0), kGauss, a);
    const auto rb = v_iid(params(3, 2, 2, 10.0), kGauss, b);
    EXPECT_EQ(ra.capacity.value, rb.capacity.value);
    EXPECT_EQ(ra.dispersion.value, rb.dispersion.value);
    EXPECT_EQ(ra.dispersion.std_error, rb.dispersion.std_error);
}

TEST(Viid, UnitsConversion) {
    const DispersionReport r = v_iid(params(1, 1, 1, 1.0), kRad, mc(100)).in_units(Units::Bits);
    EXPECT_NEAR(r.capacity.value, 0.5, 1e-15);
    EXPECT_NEAR(r.dispersion.value, 0.375 / (std::numbers::ln2 * std::numbers::ln2), 1e-15);
    const DispersionReport back = r.in_units(Units::Nats);
    EXPECT_NEAR(back.dispersion.value, 0.375, 1e-15);
}

TEST(Reciprocity, ReceivedPowerSwapsAntennas) {
    ChannelParams a{4, 2, 1, 30.0, PowerConvention::Received};
    ChannelParams b{2, 4, 1, 30.0, PowerConvention::Received};
    const Estimate ca = capacity(a, kGauss, mc(100000, 3));
    const Estimate cb = capacity(b, kGauss, mc(100000, 4));
    EXPECT_NEAR(ca.value, cb.value, 4 * std::hypot(ca.std_error, cb.std_error));
}

TEST(Rank1, TelatarValueMatchesIid) {
    const auto p = params(4, 1, 4, 100.0);
    const auto iid = v_iid(p, kGauss, mc(50000, 2));
    const auto r1 = v_rank1(p, kGauss, 16.0, mc(50000, 2));
    EXPECT_NEAR(r1.dispersion.value, iid.dispersion.value, 1e-12);
    const auto one = params(1, 3, 5, 10.0);
    EXPECT_NEAR(v_rank1(one, kGauss, 5.0, mc(20000)).dispersion.value, v_iid(one, kGauss, mc(20000)).dispersion.value,
                1e-12);
}

TEST(Rank1, LargerVstarLowersDispersion) {
    const auto p = params(4, 1, 4, 10.0);
    double prev = std::numeric_limits<double>::infinity();
    for (double v : {16.0, 32.0, 48.0, 64.0}) {
        const double d = v_rank1(p, kGauss, v, mc(20000)).dispersion.value;
        EXPECT_LT(d, prev);
        prev = d;
    }
}

TEST(Rank1, RejectsInvalidInput) {
    EXPECT_THROW(v_rank1(params(2, 2, 2, 1.0), kGauss, 4.0, mc()), InvalidArgument);
    EXPECT_THROW(v_rank1(params(2, 1, 2, 1.0), kGauss, 9.0, mc()), InvalidArgument);
    EXPECT_THROW(v_rank1(params(2, 1, 2, 1.0), kGauss, 3.0, mc()), InvalidArgument);
}

TEST(ConditionalDispersion, CaidShapedInputKeepsOnlyFirstTwoTerms) {
    const auto p = params(2, 2, 2, 4.0);
    const FadingFunctionals f = fading_functionals(p, kGauss, mc(20000));
    // ‖x‖² = TP and xxᵀ = (‖x‖²/n_t) I.
    const double s = std::sqrt(p.power * p.coherence_T / p.n_t / p.coherence_T * 1.0);
    const Matrix x{{s, s}, {s, -s}};
    ASSERT_NEAR(x.frobenius_sq(), p.coherence_T * p.power, 1e-12);
    EXPECT_NEAR(v1_of_x(x, f), p.coherence_T * f.var_cr.value + f.awgn_disp.value, 1e-12);
    EXPECT_NEAR(d1_of_x(x, f), f.capacity.value, 1e-12);
}

TEST(ConditionalDispersion, ZeroInput) {
    const auto p = params(2, 3, 3, 5.0);
    const FadingFunctionals f = fading_functionals(p, kGauss, mc(20000));
    const double T = p.coherence_T, nt = p.n_t, P = p.power;
    const double expect = T * f.var_cr.value + f.awgn_disp.value - f.eta.eta5.value * T * P / nt +
                          f.eta.eta3.value * T * P * P / (nt * nt);
    EXPECT_NEAR(v1_of_x(Matrix(2, 3), f), expect, 1e-12);
    EXPECT_THROW(v1_of_x(Matrix(3, 3), f), InvalidArgument);
}

TEST(ConditionalDispersion, TelatarAverageIsIidDispersion) {
    const auto p = params(2, 2, 2, 4.0);
    const FadingFunctionals f = fading_functionals(p, kGauss, mc(100000, 9));
    const DispersionReport r = v_iid(p, kGauss, mc(100000, 9));
    const Estimate avg = mean_v1_telatar(f, mc(10000, 10));
    EXPECT_NEAR(avg.value, r.dispersion.value, 4 * std::hypot(avg.std_error, r.dispersion.std_error));
}

TEST(NormalApprox, Basics) {
    const auto p = params(1, 1, 4, 1.0);
    EXPECT_EQ(normal_approx_logM(250, 0.5, 0.3, 0.4, p).log_m, 1000 * 0.3);
    EXPECT_EQ(normal_approx_logM(250, 1e-3, 0.3, 0.0, p).log_m, 1000 * 0.3);
    const auto awgn = params(1, 1, 1, 1.0);
    const double c = capacity_awgn(1.0), v = dispersion_awgn(1.0);
    const NormalApprox na = normal_approx_logM(1000, 1e-3, c, v, awgn);
    EXPECT_NEAR(na.rate, c - std::sqrt(v / 1000.0) * qfunc_inv(1e-3), 1e-14);
    EXPECT_NEAR(na.rate, c - std::sqrt(0.375 / 1000.0) * 3.0902, 1e-5);
    EXPECT_THROW(normal_approx_logM(10, 0.0, c, v, awgn), InvalidArgument);
}

TEST(Blocklength, Basics) {
    EXPECT_EQ(min_blocklength(0.9, 1e-3, 1.0, 0.0).channel_uses, 0.0);
    const double n9 = min_blocklength(0.9, 1e-3, 1.2, 0.7).channel_uses;
    const double n8 = min_blocklength(0.8, 1e-3, 1.2, 0.7).channel_uses;
    EXPECT_NEAR(n9 / n8, 4.0, 1e-12);
    for (double eps : {1e-2, 1e-3, 1e-6}) {
        const double a = min_blocklength(0.9, eps, 1.2, 0.7).channel_uses;
        const double b = min_blocklength(0.9, eps, 1.2, 0.35).channel_uses;
        EXPECT_NEAR(a / b, 2.0, 1e-12);
    }
    const Blocklength bl = min_blocklength(0.9, 1e-3, 1.0, 1.0, 8);
    EXPECT_EQ(std::fmod(bl.rounded_channel_uses, 8.0), 0.0);
    EXPECT_GE(bl.rounded_channel_uses, bl.channel_uses);
    EXPECT_LT(bl.rounded_channel_uses - bl.channel_uses, 8.0);
    EXPECT_TRUE(std::isinf(min_blocklength(1.0, 1e-3, 1.0, 1.0).channel_uses));
    EXPECT_THROW(min_blocklength(0.9, 1e-3, 0.0, 1.0), InvalidArgument);
    EXPECT_THROW(min_blocklength(1.5, 1e-3, 1.0, 1.0), InvalidArgument);
}

TEST(Asymptotic, ClosedForms) {
    using R = AsymptoticRegime;
    const auto a = asymptotic_limits(R::FixTransmitGrowReceive, PowerConvention::Transmit, 4, 100.0, 256);
    EXPECT_EQ(a.dispersion, 2.0);
    EXPECT_NEAR(a.capacity, 2.0 * std::log1p(256 * 100.0 / 4), 1e-12);
    const auto b = asymptotic_limits(R::FixReceiveGrowTransmit, PowerConvention::Received, 16, 100.0);
    EXPECT_NEAR(b.capacity, 8.0 * std::log(1.0 + 6.25), 1e-12);
    EXPECT_NEAR(b.dispersion, 100.0 / 7.25, 1e-12);
    const auto c = asymptotic_limits(R::FixTransmitGrowReceive, PowerConvention::Received, 16, 100.0);
    EXPECT_EQ(b.capacity, c.capacity);
    const auto d = asymptotic_limits(R::FixReceiveGrowTransmit, PowerConvention::Transmit, 3, 100.0);
    EXPECT_NEAR(d.capacity, 1.5 * std::log(101.0), 1e-12);
    EXPECT_NEAR(d.dispersion, 300.0 / 101.0, 1e-12);
    EXPECT_THROW(asymptotic_limits(R::FixTransmitGrowReceive, PowerConvention::Transmit, 4, 100.0), InvalidArgument);
}
