// SPDX-License-Identifier: Apache-2.0
//
// mimobf: finite-blocklength limits of coherent MIMO block-fading channels
// ------------------------------------------------------------------------

#ifndef MIMOBF_RNG_HPP
#define MIMOBF_RNG_HPP

#include <cstdint>
#include <random>

namespace mimobf {

/// Identifier written into every run manifest. Bump the suffix whenever the
/// seeding scheme or the variate transforms change.
inline constexpr const char *kRngIdentifier = "mt19937_64/seed_seq(seed,stream)/std::normal_distribution;v1";

/// Purpose tags keep independent uses of one user seed on disjoint substreams.
/// Substream id = (tag << 40) | chunk index.
enum class StreamTag : std::uint64_t {
    Eigenvalues = 1,
    Haar = 2,
    ChannelUse = 3,
    InputDraw = 4,
    PairedReplica = 5,
};

inline constexpr std::uint64_t substream(StreamTag tag, std::uint64_t index) {
    return (static_cast<std::uint64_t>(tag) << 40) | (index & ((std::uint64_t{1} << 40) - 1));
}

/// A seeded substream. Identical (seed, stream_id) pairs produce identical
/// draw sequences; nothing is shared between instances.
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32)};
        engine_.seed(seq);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    double normal() { return normal_(engine_); }
    double uniform() { return std::generate_canonical<double, 53>(engine_); }
    // +1 or -1 with equal probability.
    double sign() { return (engine_() >> 63) ? 1.0 : -1.0; }

    std::mt19937_64 &engine() { return engine_; }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace mimobf

#endif
