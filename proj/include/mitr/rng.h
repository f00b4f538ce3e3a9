// Copyright 2026 The mitr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>

namespace mitr {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
/// as easy as 1, 2, 3"). Pure function of (counter, key).
std::array<uint32_t, 4> philox4x32_10(std::array<uint32_t, 4> counter, std::array<uint32_t, 2> key);

/// Usage domains folded into the stream id so independent consumers never
/// share a sequence.
enum class RngDomain : uint8_t {
    Path = 1,
    Nlos = 2,
    Noise = 3,
    Test = 255,
};

/// Stream id for (pixel, sample, domain). Injective for pixel < 2^32 and
/// sample < 2^24.
constexpr uint64_t rng_stream(uint64_t pixel_index, uint64_t sample_index, RngDomain domain) {
    return (pixel_index << 32) | ((sample_index & 0xFFFFFFu) << 8) | static_cast<uint64_t>(domain);
}

/// Counter-based generator state. Each (seed, stream) pair names an
/// independent sequence; draws are indexed by a 64-bit counter so the
/// sequence never depends on thread scheduling.
class RngState {
  public:
    RngState() = default;
    RngState(uint64_t seed, uint64_t stream) : seed_(seed), stream_(stream) {}

    uint64_t seed() const { return seed_; }
    uint64_t stream() const { return stream_; }
    uint64_t counter() const { return counter_; }

    /// Next 64 random bits.
    uint64_t next_u64();

    /// Uniform in [0, 1) with 53 bits of resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1p-53; }

  private:
    uint64_t seed_ = 0;
    uint64_t stream_ = 0;
    uint64_t counter_ = 0;
    std::array<uint32_t, 4> block_{};
    int cached_ = 0;  // 64-bit words left in block_
};

/// Draw one float from `state`, advancing it.
inline double rng_next_float(RngState &state) { return state.next_double(); }

}  // namespace mitr
