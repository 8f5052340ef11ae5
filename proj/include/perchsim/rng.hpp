#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace perchsim {

/// Master or per-trial RNG seed. All 64-bit values are valid.
struct Seed {
    std::uint64_t value{0};

    friend bool operator==(const Seed&, const Seed&) = default;
};

/// SplitMix64 finalizer. Used as the documented mixing hash for seed
/// derivation; full-period, passes avalanche tests.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Derives the RNG seed for one trial from the master seed and the
/// (cell, trial) coordinates. Pure; distinct inputs give distinct outputs
/// with overwhelming probability, so cells can be added or removed without
/// disturbing each other's trials.
constexpr Seed derive_seed(Seed master, std::uint64_t cell_index,
                           std::uint64_t trial_index) noexcept {
    std::uint64_t s = mix64(master.value);
    s = mix64(s ^ mix64(cell_index ^ 0x5851F42D4C957F2Dull));
    s = mix64(s ^ mix64(trial_index ^ 0x14057B7EF767814Full));
    return Seed{s};
}

/// xoshiro256++ stream seeded via SplitMix64. Hand-rolled so trial
/// trajectories are bit-identical across platforms and standard libraries.
class TrialRng {
public:
    explicit TrialRng(Seed seed) noexcept {
        std::uint64_t x = seed.value;
        for (auto& word : state_) {
            x += 0x9E3779B97F4A7C15ull;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
            word = z ^ (z >> 31);
        }
    }

    std::uint64_t next_u64() noexcept {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller (spare value cached).
    double gaussian() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) {
            u1 = uniform01();
        }
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
    double spare_{0.0};
    bool has_spare_{false};
};

}  // namespace perchsim
