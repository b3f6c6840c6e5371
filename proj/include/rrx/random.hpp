#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string_view>

namespace rrx {

/// Philox4x32-10 counter-based block cipher (Salmon et al., Random123).
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter encrypt(Counter ctr, Key key) {
        constexpr std::uint32_t kM0 = 0xD2511F53u;
        constexpr std::uint32_t kM1 = 0xCD9E8D57u;
        constexpr std::uint32_t kW0 = 0x9E3779B9u;
        constexpr std::uint32_t kW1 = 0xBB67AE85u;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += kW0;
            key[1] += kW1;
        }
        return ctr;
    }
};

inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Fixed labeled hash used to derive experiment seeds: FNV-1a over the label, mixed with the seed.
inline constexpr std::uint64_t labeled_seed(std::uint64_t seed, std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return splitmix64(seed ^ splitmix64(h));
}

/// Deterministic random stream addressed by (seed, stream, lane).
///
/// Block b of the stream is Philox(key, counter = [b_lo, b_hi, stream_lo, stream_hi]) where the key is
/// the seed for lane 0 and a splitmix64 mix of (seed, lane) otherwise. Each block yields two 64-bit words.
/// Uniforms take the top 53 bits. Normals use Box-Muller on one block: u1 in (0,1], u2 in [0,1),
/// giving sqrt(-2 log u1) * (cos 2 pi u2, sin 2 pi u2), consumed cos first.
class RandomSource {
public:
    RandomSource(std::uint64_t seed, std::uint64_t stream, std::uint64_t lane = 0)
        : seed_(seed), stream_(stream), lane_(lane) {
        const std::uint64_t k = lane == 0 ? seed : splitmix64(seed ^ splitmix64(lane ^ 0x5bd1e995ull));
        key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }
    std::uint64_t lane() const { return lane_; }

    /// Independent sibling stream for the same (seed, stream).
    RandomSource substream(std::uint64_t lane) const { return {seed_, stream_, lane}; }

    std::uint64_t next_u64() {
        if (have_word_) {
            have_word_ = false;
            return word_;
        }
        const auto out = next_block();
        word_ = out[1];
        have_word_ = true;
        return out[0];
    }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_open_zero() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    double normal() {
        ++normals_drawn_;
        if (have_normal_) {
            have_normal_ = false;
            return spare_normal_;
        }
        const auto out = next_block();
        const double u1 = static_cast<double>((out[0] >> 11) + 1) * 0x1.0p-53;
        const double u2 = static_cast<double>(out[1] >> 11) * 0x1.0p-53;
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * std::numbers::pi * u2;
        spare_normal_ = rad * std::sin(ang);
        have_normal_ = true;
        return rad * std::cos(ang);
    }

    void fill_normal(std::span<double> out) {
        for (double& v : out) v = normal();
    }

    std::uint64_t normals_drawn() const { return normals_drawn_; }

private:
    std::array<std::uint64_t, 2> next_block() {
        const Philox4x32::Counter ctr = {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                                         static_cast<std::uint32_t>(stream_),
                                         static_cast<std::uint32_t>(stream_ >> 32)};
        ++block_;
        const auto r = Philox4x32::encrypt(ctr, key_);
        return {(static_cast<std::uint64_t>(r[1]) << 32) | r[0], (static_cast<std::uint64_t>(r[3]) << 32) | r[2]};
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t lane_;
    Philox4x32::Key key_{};
    std::uint64_t block_ = 0;
    std::uint64_t word_ = 0;
    bool have_word_ = false;
    double spare_normal_ = 0.0;
    bool have_normal_ = false;
    std::uint64_t normals_drawn_ = 0;
};

}  // namespace rrx
