// SPDX-License-Identifier: Apache-2.0
//
// mimobf: finite-blocklength limits of coherent MIMO block-fading channels
// ------------------------------------------------------------------------
//
// Block channel simulator and the information density against the
// capacity-achieving output law, computed two independent ways.

#ifndef MIMOBF_INFODENSITY_HPP
#define MIMOBF_INFODENSITY_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "dispersion.hpp"
#include "errors.hpp"
#include "fading.hpp"
#include "linalg.hpp"
#include "matrix.hpp"
#include "montecarlo.hpp"

namespace mimobf {

struct ChannelRealization {
    Matrix y; // n_r×T
    Matrix h; // n_r×n_t
};

inline void check_block(const Matrix &x, const ChannelParams &p) {
    require(x.rows() == std::size_t(p.n_t) && x.cols() == std::size_t(p.coherence_T), "block input must be n_t x T");
    require(x.all_finite(), "block input has non-finite entries");
}

/// One block: draws H, then Z with i.i.d. N(0,1) entries, and returns Y = HX + Z.
inline ChannelRealization simulate_output(const Matrix &x, const FadingModel &model, const ChannelParams &params,
                                          RngStream &rng) {
    check_block(x, params);
    ChannelRealization out;
    out.h = sample_H(model, params, rng);
    out.y = out.h * x;
    for (double &v : out.y.data())
        v += rng.normal();
    return out;
}

namespace detail {

inline void check_triple(const Matrix &x, const Matrix &y, const Matrix &h, const ChannelParams &p) {
    require(p.convention == PowerConvention::Transmit, "information density needs transmit-convention power");
    check_block(x, p);
    require(h.rows() == std::size_t(p.n_r) && h.cols() == std::size_t(p.n_t), "h must be n_r x n_t");
    require(y.rows() == std::size_t(p.n_r) && y.cols() == std::size_t(p.coherence_T), "y must be n_r x T");
}

} // namespace detail

/// i(x; y, h) in nats given any decomposition h = U Λ Vᵀ (sign and order of
/// the singular triplets are irrelevant).
inline double info_density_svd(const Matrix &x, const Matrix &y, const Matrix &h, const SvdResult &s,
                               const ChannelParams &params) {
    detail::check_triple(x, y, h, params);
    require(s.u.rows() == h.rows() && s.u.cols() == h.rows() && s.v.rows() == h.cols() && s.v.cols() == h.cols() &&
                s.sigma.size() == std::min(h.rows(), h.cols()),
            "info_density_svd: decomposition does not match h");
    const double a = params.power / params.n_t;
    const std::size_t T = params.coherence_T;
    const Matrix vx = s.v.transpose() * x;         // row j: v_jᵀ x
    const Matrix zt = s.u.transpose() * (y - h * x); // row j: noise along u_j

    double out = 0.0;
    for (std::size_t j = 0; j < s.sigma.size(); ++j) {
        const double lam = s.sigma[j];
        const double l2 = lam * lam;
        const double den = 1.0 + a * l2;
        double sig = 0.0, crossterm = 0.0, noise = 0.0;
        for (std::size_t t = 0; t < T; ++t) {
            sig += vx(j, t) * vx(j, t);
            crossterm += vx(j, t) * zt(j, t);
            noise += zt(j, t) * zt(j, t);
        }
        out += 0.5 * T * std::log1p(a * l2);
        out += 0.5 * (l2 * sig + 2.0 * lam * crossterm - a * l2 * noise) / den;
    }
    return out;
}

/// i(x; y, h) in nats, through the SVD of h.
inline double info_density(const Matrix &x, const Matrix &y, const Matrix &h, const ChannelParams &params) {
    detail::check_triple(x, y, h, params);
    return info_density_svd(x, y, h, svd(h), params);
}

/// Same quantity via Σ = I + (P/n_t) h hᵀ:
/// (T/2) log det Σ − ½‖y − hx‖² + ½ tr(yᵀ Σ⁻¹ y).
inline double info_density_alt(const Matrix &x, const Matrix &y, const Matrix &h, const ChannelParams &params) {
    detail::check_triple(x, y, h, params);
    const double a = params.power / params.n_t;
    const double T = params.coherence_T;
    Matrix sigma = gram_rows(h) * a;
    for (std::size_t i = 0; i < sigma.rows(); ++i)
        sigma(i, i) += 1.0;
    const Matrix l = cholesky(sigma);
    const Matrix sy = cholesky_solve(l, y);
    double quad = 0.0;
    for (std::size_t k = 0; k < y.data().size(); ++k)
        quad += y.data()[k] * sy.data()[k];
    return 0.5 * T * log_det_from_cholesky(l) - 0.5 * (y - h * x).frobenius_sq() + 0.5 * quad;
}

struct CondMomentEstimate {
    Estimate mean;              // E[i | x] / T, per channel use
    Estimate variance;          // Var[i | x] / T
    Estimate abs_third_central; // E|i − E i|³, per block (not normalized)
    double block_variance = 0.0; // Var[i | x], per block
    std::uint64_t samples = 0;
};

/// Moments of i(x; Y, H) at fixed x. `family` selects an independent set of
/// substreams; estimates at different x with the same family share draws.
inline CondMomentEstimate empirical_conditional_moments(const Matrix &x, const FadingModel &model,
                                                        const ChannelParams &params_in, const MonteCarloConfig &mc,
                                                        std::uint64_t family = 0) {
    const ChannelParams params = to_transmit(params_in, model);
    check_block(x, params);
    const double T = params.coherence_T;
    SampleTable table = fill_samples(
        mc, StreamTag::ChannelUse, 1,
        [&](RngStream &rng, double *row) {
            const auto r = simulate_output(x, model, params, rng);
            row[0] = info_density(x, r.y, r.h, params);
        },
        family);
    JackknifeMoments jk(table);
    CondMomentEstimate out;
    out.samples = mc.samples;
    out.mean = jk.estimate([T](const Moments &m) { return m.mean(0) / T; });
    out.variance = jk.estimate([T](const Moments &m) { return m.var(0) / T; });
    out.block_variance = jk.full().var(0);

    const double mu = jk.full().mean(0);
    double s = 0.0, s2 = 0.0;
    for (std::size_t r = 0; r < table.rows; ++r) {
        const double d = std::abs(table.row(r)[0] - mu);
        const double d3 = d * d * d;
        s += d3;
        s2 += d3 * d3;
    }
    const double n = static_cast<double>(table.rows);
    const double m3 = s / n;
    out.abs_third_central = {m3, std::sqrt(std::max(0.0, s2 / n - m3 * m3) / n)};
    return out;
}

/// Plug-in Berry–Esseen ratio √n Σ E|W_j − E W_j|³ / (Σ Var W_j)^{3/2} over
/// blocks x_1..x_n, with W_j the per-block information density. All blocks
/// are simulated on the same substreams.
inline double berry_esseen_ratio(const std::vector<Matrix> &xs, const FadingModel &model, const ChannelParams &params,
                                 const MonteCarloConfig &mc) {
    require(!xs.empty(), "berry_esseen_ratio: need at least one block");
    double third = 0.0, var = 0.0;
    for (const Matrix &x : xs) {
        const auto m = empirical_conditional_moments(x, model, params, mc);
        third += m.abs_third_central.value;
        var += m.block_variance;
    }
    if (!(var > 0.0))
        throw NumericalFailure("berry_esseen_ratio: total variance is zero");
    return std::sqrt(static_cast<double>(xs.size())) * third / std::pow(var, 1.5);
}

/// Telatar input: i.i.d. N(0, P/n_t) entries.
inline Matrix sample_telatar_input(const ChannelParams &params, RngStream &rng) {
    require(params.convention == PowerConvention::Transmit, "sample_telatar_input: resolve received power first");
    Matrix x(params.n_t, params.coherence_T);
    const double sd = std::sqrt(params.power / params.n_t);
    for (double &v : x.data())
        v = sd * rng.normal();
    return x;
}

struct TelatarVarianceEstimate {
    Estimate conditional;   // E_X Var[i | X] / T, from paired replicas
    Estimate unconditional; // Var[i] / T
    Estimate mean;          // E[i] / T
};

/// Information-density variance under Telatar input. Each sample draws one X
/// and two independent (H, Z) realizations; ½(i₁ − i₂)² is unbiased for
/// Var[i | X], and its average estimates the input-conditional variance.
inline TelatarVarianceEstimate telatar_information_variance(const FadingModel &model, const ChannelParams &params_in,
                                                            const MonteCarloConfig &mc) {
    const ChannelParams params = to_transmit(params_in, model);
    const double T = params.coherence_T;
    SampleTable table = fill_samples(mc, StreamTag::PairedReplica, 3, [&](RngStream &rng, double *row) {
        const Matrix x = sample_telatar_input(params, rng);
        const auto r1 = simulate_output(x, model, params, rng);
        const auto r2 = simulate_output(x, model, params, rng);
        const double i1 = info_density(x, r1.y, r1.h, params);
        const double i2 = info_density(x, r2.y, r2.h, params);
        row[0] = 0.5 * (i1 - i2) * (i1 - i2);
        row[1] = i1;
        row[2] = i2;
    });
    JackknifeMoments jk(table);
    TelatarVarianceEstimate out;
    out.conditional = jk.estimate([T](const Moments &m) { return m.mean(0) / T; });
    out.unconditional = jk.estimate([T](const Moments &m) { return m.var(1) / T; });
    out.mean = jk.estimate([T](const Moments &m) { return m.mean(1) / T; });
    return out;
}

/// Average of v1_of_x over Telatar inputs, with its sampling standard error
/// (the fading functionals are held fixed).
inline Estimate mean_v1_telatar(const FadingFunctionals &f, const MonteCarloConfig &mc) {
    SampleTable table = fill_samples(mc, StreamTag::InputDraw, 1, [&](RngStream &rng, double *row) {
        row[0] = v1_of_x(sample_telatar_input(f.params, rng), f);
    });
    JackknifeMoments jk(table);
    return jk.estimate([](const Moments &m) { return m.mean(0); });
}

} // namespace mimobf

#endif
