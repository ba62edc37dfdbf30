#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace anchorsim {

/// Role of a random substream within one (scenario, replicate) cell.
enum class StreamRole : std::uint8_t {
    Population = 0,
    Baseline = 1,
    OutcomeIntercepts = 2,
    Outcome = 3,
    SelectionIntercepts = 4,
    Selection = 5,
    Sampling = 6,
    Tuning = 7,
    Oracle = 8,
};

/// Identifies one independent substream. Packing into 64 bits is injective for
/// scenario ordinals below 2^24 and replicate indices below 2^32.
struct StreamKey {
    std::uint64_t scenario = 0;
    std::uint64_t replicate = 0;
    StreamRole role = StreamRole::Population;

    std::uint64_t packed() const noexcept;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// xoshiro256++ engine; satisfies UniformRandomBitGenerator.
class Rng {
  public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) noexcept;

    /// Stream for `key` under `master_seed`. Distinct keys give distinct initial
    /// states because every step of the derivation is a bijection.
    static Rng stream(std::uint64_t master_seed, const StreamKey &key) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform() noexcept;
    bool bernoulli(double p) noexcept { return uniform() < p; }
    double normal() noexcept;
    double normal(double mean, double sd) noexcept { return mean + sd * normal(); }

    const std::array<std::uint64_t, 4> &state() const noexcept { return s_; }

  private:
    std::array<std::uint64_t, 4> s_{};
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

} // namespace anchorsim
