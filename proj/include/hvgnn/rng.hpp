#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace hvgnn {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}
} // namespace detail

/// Seeded pseudorandom stream. The uniform and gaussian draws are generated
/// from raw mt19937_64 words so sequences are identical across platforms
/// (std::normal_distribution et al. are implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), eng_(detail::splitmix64(seed)) {}

    std::uint64_t seed() const { return seed_; }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Unbiased integer in [0, n).
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) return 0;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return x % n;
    }

    /// Standard normal via Box-Muller.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        spare_ = mag * std::sin(2.0 * M_PI * u2);
        have_spare_ = true;
        return mag * std::cos(2.0 * M_PI * u2);
    }

    std::vector<double> gaussian_vector(int n) {
        std::vector<double> out(static_cast<std::size_t>(n));
        for (auto& x : out) x = gaussian();
        return out;
    }

    /// Derives an independent deterministic substream.
    Rng fork(std::uint64_t salt) const {
        return Rng(detail::splitmix64(seed_ ^ (salt * 0x9E3779B97F4A7C15ull + 0x165667B19E3779F9ull)));
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace hvgnn
