#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace memprobe {

// 64-bit FNV-1a of a canonical text key, folded to 32 bits. Used to derive
// independent stream seeds from structured identifiers (e.g. one per grid
// cell), so extending a grid never perturbs existing runs.
inline std::uint32_t derive_seed(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return static_cast<std::uint32_t>(h ^ (h >> 32));
}

// MT19937 (Matsumoto & Nishimura, 1998), 32-bit variant.
// Implemented in-repo so that random streams are bit-identical on every
// platform and toolchain. Tests check agreement with std::mt19937.
class Prng {
public:
    explicit Prng(std::uint32_t seed = 5489u) { reseed(seed); }

    void reseed(std::uint32_t seed) {
        seed_ = seed;
        state_[0] = seed;
        for (std::uint32_t i = 1; i < kN; ++i)
            state_[i] = 1812433253u * (state_[i - 1] ^ (state_[i - 1] >> 30)) + i;
        index_ = kN;  // force a twist on the first draw
    }

    std::uint32_t seed() const { return seed_; }

    std::uint32_t next_u32() {
        if (index_ >= kN) twist();
        std::uint32_t y = state_[index_++];
        y ^= y >> 11;
        y ^= (y << 7) & 0x9d2c5680u;
        y ^= (y << 15) & 0xefc60000u;
        y ^= y >> 18;
        return y;
    }

    // Uniform double in [0,1) with 53 random bits (genrand_res53 construction).
    double next_unit() {
        const double a = static_cast<double>(next_u32() >> 5);   // 27 bits
        const double b = static_cast<double>(next_u32() >> 6);   // 26 bits
        return (a * 67108864.0 + b) * (1.0 / 9007199254740992.0);
    }

    // Uniform double in [a, b).
    double uniform(double a, double b) {
        if (!(a < b)) throw std::invalid_argument("Prng::uniform: requires a < b");
        double v = a + (b - a) * next_unit();
        // guard against rounding up to b when |a| dwarfs b-a
        return v < b ? v : std::nextafter(b, a);
    }

    // Uniform integer in [lo, hi], inclusive. Rejection sampled, no modulo bias.
    int uniform_int(int lo, int hi) {
        if (lo > hi) throw std::invalid_argument("Prng::uniform_int: requires lo <= hi");
        const std::uint32_t range =
            static_cast<std::uint32_t>(static_cast<std::int64_t>(hi) - lo) + 1u;
        std::uint32_t u = next_u32();
        if (range != 0) {  // range 0 means the full 32-bit span
            const std::uint32_t limit = UINT32_MAX - UINT32_MAX % range;
            while (u >= limit) u = next_u32();
            u %= range;
        }
        return static_cast<int>(static_cast<std::int64_t>(lo) + u);
    }

private:
    static constexpr std::uint32_t kN = 624;
    static constexpr std::uint32_t kM = 397;
    static constexpr std::uint32_t kMatrixA = 0x9908b0dfu;
    static constexpr std::uint32_t kUpperMask = 0x80000000u;
    static constexpr std::uint32_t kLowerMask = 0x7fffffffu;

    void twist() {
        for (std::uint32_t i = 0; i < kN; ++i) {
            const std::uint32_t y =
                (state_[i] & kUpperMask) | (state_[(i + 1) % kN] & kLowerMask);
            std::uint32_t next = state_[(i + kM) % kN] ^ (y >> 1);
            if (y & 1u) next ^= kMatrixA;
            state_[i] = next;
        }
        index_ = 0;
    }

    std::uint32_t state_[kN];
    std::uint32_t index_ = kN;
    std::uint32_t seed_ = 5489u;
};

}  // namespace memprobe
