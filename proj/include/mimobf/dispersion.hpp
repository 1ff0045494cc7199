// SPDX-License-Identifier: Apache-2.0
//
// mimobf: finite-blocklength limits of coherent MIMO block-fading channels
// ------------------------------------------------------------------------
//
// Capacity, dispersion and the fading functionals behind them. All internal
// quantities are in nats; Units only matters when reports are presented.

#ifndef MIMOBF_DISPERSION_HPP
#define MIMOBF_DISPERSION_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"
#include "fading.hpp"
#include "linalg.hpp"
#include "matrix.hpp"
#include "montecarlo.hpp"

namespace mimobf {

enum class Units { Nats, Bits };

inline std::string to_string(Units u) { return u == Units::Nats ? "nats" : "bits"; }

// Multipliers from nats to the requested unit for rates and for dispersions.
inline double rate_scale(Units u) { return u == Units::Nats ? 1.0 : 1.0 / std::numbers::ln2; }
inline double dispersion_scale(Units u) { return u == Units::Nats ? 1.0 : 1.0 / (std::numbers::ln2 * std::numbers::ln2); }

/// c(s) = s / (1 + (P/n_t) s). Params must be in transmit convention.
inline double c_sigma(double sig_sq, const ChannelParams &params) {
    require(sig_sq >= 0.0, "c_sigma: argument must be non-negative");
    require(params.convention == PowerConvention::Transmit, "c_sigma: resolve received power first");
    const double a = params.power / params.n_t;
    return sig_sq / (1.0 + a * sig_sq);
}

inline double capacity_awgn(double p) {
    require(p >= 0.0, "capacity_awgn: power must be non-negative");
    return 0.5 * std::log1p(p);
}

inline double dispersion_awgn(double p) {
    require(p >= 0.0, "dispersion_awgn: power must be non-negative");
    const double r = 1.0 / (1.0 + p);
    return 0.5 * (1.0 - r * r);
}

struct EtaMoments {
    Estimate eta1, eta2, eta3, eta4, eta5;
};

/// Everything the dispersion formulas need, estimated from one eigenvalue stream.
struct FadingFunctionals {
    ChannelParams params; // transmit convention
    Estimate capacity;    // E C_r, per channel use
    Estimate var_cr;      // Var C_r
    Estimate awgn_disp;   // Σ E V_AWGN(aΛ²)
    Estimate mean_csum;   // E Σ c(Λ²)
    EtaMoments eta;
    std::uint64_t samples = 0;
    bool exact = false; // true when no sampling was needed (P = 0)
};

namespace detail {

enum Col : std::size_t { kCr, kCsum, kC2sum, kCross, kVawgn, kD, kWidth };

inline void eigen_row(const std::vector<double> &s, double a, double *row) {
    double cr = 0, csum = 0, c2 = 0, vaw = 0, d = 0;
    for (double si : s) {
        const double den = 1.0 + a * si;
        const double c = si / den;
        cr += 0.5 * std::log1p(a * si);
        csum += c;
        c2 += c * c;
        vaw += 0.5 * (1.0 - 1.0 / (den * den));
        d += si / (den * den);
    }
    row[kCr] = cr;
    row[kCsum] = csum;
    row[kC2sum] = c2;
    row[kCross] = csum * csum - c2;
    row[kVawgn] = vaw;
    row[kD] = d;
}

inline double stat_eta4(const Moments &m, int n_t) {
    const double c2 = m.mean(kC2sum);
    const double cross = n_t > 1 ? m.mean(kCross) / (n_t - 1) : 0.0;
    return (c2 - cross) / (2.0 * n_t * (n_t + 2));
}

} // namespace detail

/// Monte Carlo estimate of all fading functionals from a single stream of
/// eigenvalue draws (common random numbers for every derived quantity).
inline FadingFunctionals fading_functionals(const ChannelParams &params_in, const FadingModel &model,
                                            const MonteCarloConfig &mc) {
    using namespace detail;
    const ChannelParams params = to_transmit(params_in, model);
    const double a = params.power / params.n_t;
    const int n_t = params.n_t;
    const double T = params.coherence_T;

    SampleTable table = fill_samples(mc, StreamTag::Eigenvalues, kWidth, [&](RngStream &rng, double *row) {
        eigen_row(sample_eigs(model, params, rng), a, row);
    });
    JackknifeMoments jk(table);

    FadingFunctionals f;
    f.params = params;
    f.samples = mc.samples;
    f.capacity = jk.estimate([](const Moments &m) { return m.mean(kCr); });
    f.var_cr = jk.estimate([](const Moments &m) { return m.var(kCr); });
    f.awgn_disp = jk.estimate([](const Moments &m) { return m.mean(kVawgn); });
    f.mean_csum = jk.estimate([](const Moments &m) { return m.mean(kCsum); });
    f.eta.eta1 = jk.estimate([](const Moments &m) { return 0.5 * m.mean(kC2sum); });
    f.eta.eta2 = jk.estimate([](const Moments &m) { return 0.5 * m.mean(kCsum) * m.mean(kCsum); });
    f.eta.eta3 = jk.estimate([](const Moments &m) { return 0.25 * m.var(kCsum); });
    f.eta.eta4 = jk.estimate([n_t](const Moments &m) { return stat_eta4(m, n_t); });
    f.eta.eta5 = jk.estimate([T](const Moments &m) { return m.cov(kCr, kCsum) + m.mean(kD) / T; });
    return f;
}

inline Estimate capacity(const ChannelParams &params, const FadingModel &model, const MonteCarloConfig &mc) {
    const ChannelParams p = to_transmit(params, model);
    if (p.power == 0.0)
        return {0.0, 0.0};
    return fading_functionals(p, model, mc).capacity;
}

inline EtaMoments eta_moments(const ChannelParams &params, const FadingModel &model, const MonteCarloConfig &mc) {
    return fading_functionals(params, model, mc).eta;
}

/// Capacity and dispersion per channel use with the three-term breakdown of
/// the dispersion: block-fading variance, AWGN dispersion, power term.
struct DispersionReport {
    ChannelParams params; // as requested
    double transmit_power = 0.0;
    std::string model;
    Estimate capacity;
    Estimate dispersion;
    Estimate fading_term;
    Estimate awgn_term;
    Estimate power_term;
    EtaMoments eta;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
    Units units = Units::Nats;

    /// Copy re-expressed in `u`. Reports are produced in nats.
    DispersionReport in_units(Units u) const {
        DispersionReport r = *this;
        if (u == units)
            return r;
        const double back_r = rate_scale(units), back_v = dispersion_scale(units);
        const double kr = rate_scale(u) / back_r, kv = dispersion_scale(u) / back_v;
        auto scale = [](Estimate &e, double k) {
            e.value *= k;
            e.std_error *= k;
        };
        scale(r.capacity, kr);
        for (Estimate *e : {&r.dispersion, &r.fading_term, &r.awgn_term, &r.power_term, &r.eta.eta1, &r.eta.eta2,
                            &r.eta.eta3, &r.eta.eta4, &r.eta.eta5})
            scale(*e, kv);
        r.units = u;
        return r;
    }
};

namespace detail {

// Power-term coefficient multiplying η₂: 1/n_t for i.i.d. inputs and
// v*/(n_t² T) for a rank-1 caid with normalized variance v*.
inline DispersionReport assemble_report(const ChannelParams &requested, const FadingModel &model,
                                        const MonteCarloConfig &mc, double eta2_coeff_num, bool use_vstar) {
    DispersionReport r;
    r.params = requested;
    r.model = model.name();
    r.samples = mc.samples;
    r.seed = mc.seed;
    const ChannelParams p = to_transmit(requested, model);
    r.transmit_power = p.power;
    if (p.power == 0.0)
        return r;

    const double a = p.power / p.n_t;
    const int n_t = p.n_t;
    const double T = p.coherence_T;
    const double coeff = use_vstar ? eta2_coeff_num / (double(n_t) * n_t * T) : 1.0 / n_t;

    SampleTable table = fill_samples(mc, StreamTag::Eigenvalues, kWidth, [&](RngStream &rng, double *row) {
        eigen_row(sample_eigs(model, p, rng), a, row);
    });
    JackknifeMoments jk(table);
    auto fading = [T](const Moments &m) { return T * m.var(kCr); };
    auto awgn = [](const Moments &m) { return m.mean(kVawgn); };
    auto power = [a, coeff](const Moments &m) {
        const double eta1 = 0.5 * m.mean(kC2sum);
        const double eta2 = 0.5 * m.mean(kCsum) * m.mean(kCsum);
        return a * a * (eta1 - eta2 * coeff);
    };
    r.capacity = jk.estimate([](const Moments &m) { return m.mean(kCr); });
    r.fading_term = jk.estimate(fading);
    r.awgn_term = jk.estimate(awgn);
    r.power_term = jk.estimate(power);
    r.dispersion = jk.estimate([&](const Moments &m) { return fading(m) + awgn(m) + power(m); });
    r.eta.eta1 = jk.estimate([](const Moments &m) { return 0.5 * m.mean(kC2sum); });
    r.eta.eta2 = jk.estimate([](const Moments &m) { return 0.5 * m.mean(kCsum) * m.mean(kCsum); });
    r.eta.eta3 = jk.estimate([](const Moments &m) { return 0.25 * m.var(kCsum); });
    r.eta.eta4 = jk.estimate([n_t](const Moments &m) { return stat_eta4(m, n_t); });
    r.eta.eta5 = jk.estimate([T](const Moments &m) { return m.cov(kCr, kCsum) + m.mean(kD) / T; });
    return r;
}

} // namespace detail

/// Dispersion under i.i.d. Gaussian (Telatar) input.
inline DispersionReport v_iid(const ChannelParams &params, const FadingModel &model, const MonteCarloConfig &mc) {
    return detail::assemble_report(params, model, mc, 0.0, false);
}

inline bool is_rank1(const ChannelParams &p, const FadingModel &model) {
    return p.n_r == 1 || p.n_t == 1 || model.kind == FadingModel::Kind::ScalarRademacher;
}

/// Dispersion of the best rank-1 caid with normalized input variance `vstar`.
inline DispersionReport v_rank1(const ChannelParams &params, const FadingModel &model, double vstar,
                                const MonteCarloConfig &mc) {
    params.validate();
    require(is_rank1(params, model), "v_rank1: fading must have rank at most 1 (n_r = 1 or n_t = 1)");
    const double lo = double(params.n_t) * params.coherence_T;
    const double hi = lo * std::min(params.n_t, params.coherence_T);
    require(vstar >= lo - 1e-9 && vstar <= hi + 1e-9, "v_rank1: vstar must lie in [n_t T, n_t T min(n_t, T)]");
    return detail::assemble_report(params, model, mc, vstar, true);
}

/// Conditional dispersion of one block given input x (n_t×T), per channel use.
inline double v1_of_x(const Matrix &x, const FadingFunctionals &f) {
    const ChannelParams &p = f.params;
    require(x.rows() == std::size_t(p.n_t) && x.cols() == std::size_t(p.coherence_T), "v1_of_x: x must be n_t x T");
    const double T = p.coherence_T;
    const double n_t = p.n_t;
    const double fro = x.frobenius_sq();
    const double u = (fro - T * p.power) / n_t;
    const double shape = gram_rows(x).frobenius_sq() - fro * fro / n_t;
    return T * f.var_cr.value + f.awgn_disp.value + f.eta.eta5.value * u + f.eta.eta3.value / T * u * u +
           f.eta.eta4.value / T * shape;
}

/// Conditional mean of the information density per channel use given x.
inline double d1_of_x(const Matrix &x, const FadingFunctionals &f) {
    const ChannelParams &p = f.params;
    require(x.rows() == std::size_t(p.n_t) && x.cols() == std::size_t(p.coherence_T), "d1_of_x: x must be n_t x T");
    const double T = p.coherence_T;
    return f.capacity.value + 0.5 * f.mean_csum.value * (x.frobenius_sq() - T * p.power) / (p.n_t * T);
}

struct NormalApprox {
    double channel_uses = 0.0;
    double log_m = 0.0;
    double rate = 0.0;
};

/// log M ≈ N c − sqrt(N v) Q⁻¹(eps) with N = n_blocks · T channel uses.
inline NormalApprox normal_approx_logM(std::uint64_t n_blocks, double eps, double c, double v,
                                       const ChannelParams &params) {
    require(n_blocks >= 1, "normal_approx_logM: need at least one block");
    require(v >= 0.0, "normal_approx_logM: dispersion must be non-negative");
    const double q = qfunc_inv(eps);
    const double n = double(n_blocks) * params.coherence_T;
    NormalApprox out;
    out.channel_uses = n;
    out.log_m = q == 0.0 || v == 0.0 ? n * c : n * c - std::sqrt(n * v) * q;
    out.rate = out.log_m / n;
    return out;
}

struct Blocklength {
    double channel_uses = 0.0;      // real-valued estimate
    double rounded_channel_uses = 0.0; // rounded up to whole coherence blocks
};

/// Channel uses needed to reach `target_fraction` of capacity. A fraction of
/// 1 gives +inf.
inline Blocklength min_blocklength(double target_fraction, double eps, double c, double v, int coherence_T = 1) {
    require(target_fraction >= 0.0 && target_fraction <= 1.0, "min_blocklength: target fraction must lie in [0,1]");
    require(c > 0.0, "min_blocklength: capacity must be positive");
    require(v >= 0.0, "min_blocklength: dispersion must be non-negative");
    require(coherence_T >= 1, "min_blocklength: coherence time must be >= 1");
    const double q = qfunc_inv(eps);
    if (target_fraction == 1.0) {
        const double inf = std::numeric_limits<double>::infinity();
        return {inf, inf};
    }
    const double k = q / (1.0 - target_fraction);
    const double n = k * k * v / (c * c);
    return {n, std::ceil(n / coherence_T) * coherence_T};
}

enum class AsymptoticRegime { FixReceiveGrowTransmit, FixTransmitGrowReceive };

struct AsymptoticLimits {
    double capacity = 0.0;
    double dispersion = 0.0;
};

/// Large-array limits of (C, V) per channel use, in nats. `fixed_n` is the
/// antenna count held fixed; `growing_n` only enters the transmit-power
/// capacity with many receive antennas.
inline AsymptoticLimits asymptotic_limits(AsymptoticRegime regime, PowerConvention convention, int fixed_n, double power,
                                          int growing_n = 0) {
    require(fixed_n >= 1, "asymptotic_limits: fixed antenna count must be >= 1");
    require(power > 0.0, "asymptotic_limits: power must be positive");
    const double m = fixed_n;
    const double P = power;
    if (convention == PowerConvention::Received) {
        const double x = P / m;
        if (regime == AsymptoticRegime::FixReceiveGrowTransmit)
            return {0.5 * m * std::log1p(x), P / (1.0 + x)};
        return {0.5 * m * std::log1p(x), P * (2.0 + x) / (2.0 * (1.0 + x) * (1.0 + x))};
    }
    if (regime == AsymptoticRegime::FixReceiveGrowTransmit)
        return {0.5 * m * std::log1p(P), m * P / (1.0 + P)};
    require(growing_n >= 1, "asymptotic_limits: transmit-power capacity needs the receive antenna count");
    return {0.5 * m * std::log1p(growing_n * P / m), 0.5 * m};
}

} // namespace mimobf

#endif
