#include "anchorsim/random.hpp"

#include <cmath>
#include <numbers>

namespace anchorsim {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

// Finalizer of splitmix64 (bijective on 64-bit words).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

std::uint64_t StreamKey::packed() const noexcept {
    return ((scenario & 0xFFFFFFULL) << 40) | ((replicate & 0xFFFFFFFFULL) << 8) |
           static_cast<std::uint64_t>(role);
}

std::uint64_t splitmix64(std::uint64_t x) noexcept { return mix64(x + 0x9e3779b97f4a7c15ULL); }

Rng::Rng(std::uint64_t seed) noexcept {
    std::uint64_t x = seed;
    for (auto &word : s_) {
        x += 0x9e3779b97f4a7c15ULL;
        word = mix64(x);
    }
}

Rng Rng::stream(std::uint64_t master_seed, const StreamKey &key) noexcept {
    return Rng(mix64(splitmix64(master_seed) ^ key.packed()));
}

Rng::result_type Rng::operator()() noexcept {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

// Marsaglia polar method; portable across standard libraries unlike std::normal_distribution.
double Rng::normal() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_normal_ = v * factor;
    has_spare_ = true;
    return u * factor;
}

} // namespace anchorsim
