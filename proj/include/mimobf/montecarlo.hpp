// SPDX-License-Identifier: Apache-2.0
//
// mimobf: finite-blocklength limits of coherent MIMO block-fading channels
// ------------------------------------------------------------------------
//
// Chunked, thread-count-invariant Monte Carlo. Every chunk draws from its own
// (seed, substream) pair and writes into a fixed slice of a sample table;
// all reductions run afterwards in sample order.

#ifndef MIMOBF_MONTECARLO_HPP
#define MIMOBF_MONTECARLO_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace mimobf {

struct MonteCarloConfig {
    std::uint64_t samples = 100000;
    std::uint64_t seed = 1;
    std::uint64_t chunk = 4096;
    unsigned threads = 0; // 0: MIMOBF_THREADS or hardware concurrency; never affects results

    void validate() const {
        require(samples >= 2, "MonteCarloConfig: need at least 2 samples");
        require(chunk >= 1, "MonteCarloConfig: chunk must be positive");
    }
};

inline unsigned default_thread_count() {
    if (const char *env = std::getenv("MIMOBF_THREADS")) {
        char *end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0)
            return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1u;
}

/// Point estimate with a Monte Carlo standard error (0 for exact values).
struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Row-major table: one row per sample, `width` per-sample quantities.
struct SampleTable {
    std::size_t width = 0;
    std::size_t rows = 0;
    std::vector<double> data;

    const double *row(std::size_t i) const { return data.data() + i * width; }
};

/// Run `fn(rng, row_ptr)` once per sample. Chunk c of `family` uses
/// RngStream(seed, substream(tag, family·2²⁴ + c)); chunks may run on any
/// thread in any order.
inline SampleTable fill_samples(const MonteCarloConfig &mc, StreamTag tag, std::size_t width,
                                const std::function<void(RngStream &, double *)> &fn, std::uint64_t family = 0) {
    mc.validate();
    require(family < (std::uint64_t{1} << 16), "fill_samples: stream family out of range");
    require((mc.samples + mc.chunk - 1) / mc.chunk <= (std::uint64_t{1} << 24), "fill_samples: too many chunks");
    SampleTable table;
    table.width = width;
    table.rows = static_cast<std::size_t>(mc.samples);
    table.data.assign(table.rows * width, 0.0);

    const std::uint64_t nchunks = (mc.samples + mc.chunk - 1) / mc.chunk;
    const unsigned threads =
        static_cast<unsigned>(std::min<std::uint64_t>(mc.threads ? mc.threads : default_thread_count(), nchunks));

    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&]() {
        for (;;) {
            const std::uint64_t c = next.fetch_add(1);
            if (c >= nchunks)
                return;
            try {
                RngStream rng(mc.seed, substream(tag, (family << 24) + c));
                const std::uint64_t begin = c * mc.chunk;
                const std::uint64_t end = std::min(mc.samples, begin + mc.chunk);
                for (std::uint64_t s = begin; s < end; ++s)
                    fn(rng, table.data.data() + s * width);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next.store(nchunks);
                return;
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back(worker);
        for (auto &t : pool)
            t.join();
    }
    if (failure)
        std::rethrow_exception(failure);
    return table;
}

/// First and second moments of a block of table rows, accumulated around a
/// fixed shift. Constant columns therefore give exactly zero (co)variance and
/// a mean equal to the constant.
class Moments {
  public:
    Moments() = default;
    Moments(std::size_t width, std::vector<double> shift)
        : width_(width), shift_(std::move(shift)), sum_(width, 0.0), cross_(width * width, 0.0) {}

    void add_row(const double *x) {
        ++n_;
        for (std::size_t i = 0; i < width_; ++i) {
            const double di = x[i] - shift_[i];
            sum_[i] += di;
            if (di == 0.0)
                continue;
            for (std::size_t j = 0; j <= i; ++j)
                cross_[i * width_ + j] += di * (x[j] - shift_[j]);
        }
    }

    Moments &operator+=(const Moments &o) {
        n_ += o.n_;
        for (std::size_t i = 0; i < sum_.size(); ++i)
            sum_[i] += o.sum_[i];
        for (std::size_t i = 0; i < cross_.size(); ++i)
            cross_[i] += o.cross_[i];
        return *this;
    }
    Moments &operator-=(const Moments &o) {
        n_ -= o.n_;
        for (std::size_t i = 0; i < sum_.size(); ++i)
            sum_[i] -= o.sum_[i];
        for (std::size_t i = 0; i < cross_.size(); ++i)
            cross_[i] -= o.cross_[i];
        return *this;
    }

    std::uint64_t count() const { return n_; }

    double mean(std::size_t i) const { return shift_[i] + sum_[i] / static_cast<double>(n_); }

    // Unbiased (n-1) covariance.
    double cov(std::size_t i, std::size_t j) const {
        if (j > i)
            std::swap(i, j);
        const double n = static_cast<double>(n_);
        return (cross_[i * width_ + j] - sum_[i] * sum_[j] / n) / (n - 1.0);
    }
    double var(std::size_t i) const { return std::max(0.0, cov(i, i)); }

  private:
    std::size_t width_ = 0;
    std::vector<double> shift_;
    std::uint64_t n_ = 0;
    std::vector<double> sum_;
    std::vector<double> cross_;
};

inline constexpr std::size_t kJackknifeGroups = 20;

/// Full-sample moments plus delete-one-group jackknife over contiguous groups.
class JackknifeMoments {
  public:
    explicit JackknifeMoments(const SampleTable &t) {
        require(t.rows >= 2, "JackknifeMoments: need at least 2 samples");
        std::vector<double> shift(t.row(0), t.row(0) + t.width);
        const std::size_t g = std::min<std::size_t>(kJackknifeGroups, t.rows);
        full_ = Moments(t.width, shift);
        groups_.assign(g, Moments(t.width, shift));
        for (std::size_t k = 0; k < g; ++k) {
            const std::size_t begin = t.rows * k / g, end = t.rows * (k + 1) / g;
            for (std::size_t r = begin; r < end; ++r)
                groups_[k].add_row(t.row(r));
            full_ += groups_[k];
        }
    }

    const Moments &full() const { return full_; }

    /// Evaluate a statistic on the full sample with its jackknife standard error.
    Estimate estimate(const std::function<double(const Moments &)> &stat) const {
        const double value = stat(full_);
        const std::size_t g = groups_.size();
        if (g < 2)
            return {value, 0.0};
        // Deviations are taken from the full-sample value first, so identical
        // leave-one-out values give exactly zero.
        std::vector<double> dev(g);
        double mean_dev = 0.0;
        for (std::size_t k = 0; k < g; ++k) {
            Moments m = full_;
            m -= groups_[k];
            dev[k] = (m.count() >= 2 ? stat(m) : value) - value;
            mean_dev += dev[k];
        }
        mean_dev /= static_cast<double>(g);
        double ss = 0.0;
        for (double d : dev)
            ss += (d - mean_dev) * (d - mean_dev);
        const double se = std::sqrt(ss * static_cast<double>(g - 1) / static_cast<double>(g));
        return {value, std::isfinite(se) ? se : 0.0};
    }

  private:
    Moments full_;
    std::vector<Moments> groups_;
};

} // namespace mimobf

#endif
