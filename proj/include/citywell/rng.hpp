#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace citywell {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Stable seed derivation so parallel units (folds, samples, communities) own
// independent streams indexed by position, not by draw order.
inline uint64_t mix_seed(uint64_t seed, uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x9E3779B97F4A7C15ull));
}

inline uint64_t mix_seed(uint64_t seed, std::string_view name) {
    uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return mix_seed(seed, h);
}

// mt19937_64 output is pinned by the standard; the distributions below are
// pinned here so results do not depend on the standard library's
// implementation-defined distribution algorithms.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // unbiased integer in [0, n)
    uint64_t uniform_index(uint64_t n) {
        if (n == 0) return 0;
        uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do {
            v = gen_();
        } while (v >= limit);
        return v % n;
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Box-Muller, one value per call; the spare is kept.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    // inverse-CDF Laplace
    double laplace(double scale) {
        double u = uniform() - 0.5;
        double s = u < 0 ? -1.0 : 1.0;
        return -scale * s * std::log(1.0 - 2.0 * std::abs(u));
    }

    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace citywell
