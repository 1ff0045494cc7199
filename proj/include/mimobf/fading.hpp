// SPDX-License-Identifier: Apache-2.0
//
// mimobf: finite-blocklength limits of coherent MIMO block-fading channels
// ------------------------------------------------------------------------

#ifndef MIMOBF_FADING_HPP
#define MIMOBF_FADING_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "matrix.hpp"
#include "rng.hpp"

namespace mimobf {

enum class PowerConvention { Transmit, Received };

inline std::string to_string(PowerConvention c) { return c == PowerConvention::Transmit ? "transmit" : "received"; }

/// Static channel configuration. `power` is linear SNR, read either as the
/// transmit power or as the average received power depending on `convention`.
struct ChannelParams {
    int n_t = 1;
    int n_r = 1;
    int coherence_T = 1;
    double power = 1.0;
    PowerConvention convention = PowerConvention::Transmit;

    int n_min() const { return std::min(n_t, n_r); }

    void validate() const {
        require(n_t >= 1, "ChannelParams: n_t must be >= 1");
        require(n_r >= 1, "ChannelParams: n_r must be >= 1");
        require(coherence_T >= 1, "ChannelParams: coherence time must be >= 1");
        require(std::isfinite(power) && power >= 0.0, "ChannelParams: power must be finite and >= 0");
    }
};

/// Isotropic fading law of H.
struct FadingModel {
    enum class Kind { IIDGaussian, ScalarRademacher };
    Kind kind = Kind::IIDGaussian;
    double variance = 1.0; // per-entry variance, IIDGaussian only

    static FadingModel iid_gaussian(double var = 1.0) {
        require(std::isfinite(var) && var > 0.0, "FadingModel: Gaussian variance must be positive");
        return {Kind::IIDGaussian, var};
    }
    static FadingModel scalar_rademacher() { return {Kind::ScalarRademacher, 1.0}; }

    std::string name() const { return kind == Kind::IIDGaussian ? "iid-gaussian" : "rademacher"; }

    void check(const ChannelParams &p) const {
        if (kind == Kind::ScalarRademacher)
            require(p.n_t == 1 && p.n_r == 1, "ScalarRademacher fading requires n_t = n_r = 1");
        else
            require(std::isfinite(variance) && variance > 0.0, "FadingModel: Gaussian variance must be positive");
    }

    /// E‖H‖_F², in closed form for every supported law.
    double expected_frobenius_sq(const ChannelParams &p) const {
        check(p);
        if (kind == Kind::ScalarRademacher)
            return 1.0;
        return static_cast<double>(p.n_t) * p.n_r * variance;
    }
};

inline Matrix sample_H(const FadingModel &model, const ChannelParams &params, RngStream &rng) {
    model.check(params);
    Matrix h(params.n_r, params.n_t);
    if (model.kind == FadingModel::Kind::ScalarRademacher) {
        h(0, 0) = rng.sign();
        return h;
    }
    const double sd = std::sqrt(model.variance);
    for (double &x : h.data())
        x = sd * rng.normal();
    return h;
}

/// Eigenvalues of HHᵀ (descending, n_min of them) taken from the Gram matrix
/// of the smaller side of h.
inline std::vector<double> eigs_of_gram(const Matrix &h) {
    if (h.rows() == 1 || h.cols() == 1)
        return {h.frobenius_sq()};
    auto ev = h.rows() <= h.cols() ? sym_eigenvalues(gram_rows(h)) : sym_eigenvalues(gram_cols(h));
    for (double &v : ev)
        v = std::max(v, 0.0);
    return ev;
}

inline std::vector<double> sample_eigs(const FadingModel &model, const ChannelParams &params, RngStream &rng) {
    if (model.kind == FadingModel::Kind::ScalarRademacher) {
        model.check(params);
        rng.sign(); // keep the draw count aligned with sample_H
        return {1.0};
    }
    return eigs_of_gram(sample_H(model, params, rng));
}

/// Transmit power P that yields the requested received power, using
/// P_r = (P/n_t) E‖H‖_F².
inline double received_to_transmit(const ChannelParams &params, const FadingModel &model) {
    params.validate();
    require(params.convention == PowerConvention::Received, "received_to_transmit: params must use received convention");
    const double ef = model.expected_frobenius_sq(params);
    require(ef > 0.0, "received_to_transmit: fading model has zero energy");
    return params.power * params.n_t / ef;
}

/// Copy of params in transmit convention.
inline ChannelParams to_transmit(const ChannelParams &params, const FadingModel &model) {
    params.validate();
    model.check(params);
    if (params.convention == PowerConvention::Transmit)
        return params;
    ChannelParams out = params;
    out.power = received_to_transmit(params, model);
    out.convention = PowerConvention::Transmit;
    return out;
}

} // namespace mimobf

#endif
