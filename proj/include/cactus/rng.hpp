#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

namespace cactus {

/// SplitMix64 step; used to derive independent child seeds from a root seed.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic child seed for a named consumer. All randomness in a run
/// flows from one root seed through calls like derive_seed(root, 2, fold).
inline uint64_t derive_seed(uint64_t root, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    uint64_t s = root;
    splitmix64(s);
    s ^= 0x5851f42d4c957f2dULL * (a + 1);
    splitmix64(s);
    s ^= 0x14057b7ef767814fULL * (b + 1);
    splitmix64(s);
    s ^= 0x2545f4914f6cdd1dULL * (c + 1);
    return splitmix64(s);
}

/// Seeded generator with hand-rolled samplers. std::normal_distribution and
/// friends are implementation-defined, so we keep the sampling algorithms in
/// the artifact itself: identical seeds give identical streams everywhere.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be > 0.
    uint64_t bounded(uint64_t n) {
        // Rejection-free multiply-shift; bias is < 2^-64 per draw and the
        // determinism is what matters here.
        return static_cast<uint64_t>((static_cast<unsigned __int128>(engine_()) * n) >> 64);
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller (no cached second value).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    /// Index drawn from the (unnormalised) weight vector by CDF walk.
    size_t discrete(std::span<const double> weights) {
        double total = std::accumulate(weights.begin(), weights.end(), 0.0);
        double x = uniform() * total;
        for (size_t i = 0; i + 1 < weights.size(); ++i) {
            x -= weights[i];
            if (x < 0.0) return i;
        }
        return weights.empty() ? 0 : weights.size() - 1;
    }

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(bounded(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

} // namespace cactus
