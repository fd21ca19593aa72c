#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace hoidet {

/// splitmix64 finalizer; used to derive independent per-item seeds so that
/// generation order and parallelism never change content.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Per-item seed from (dataset seed, item index, stream id).
inline std::uint64_t item_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t stream = 0) {
    return mix64(mix64(mix64(seed) ^ index) ^ (stream * 0xda942042e4dd58b5ULL));
}

/// Deterministic RNG. Uniform doubles are produced directly from the
/// engine's bits rather than through std distributions, whose algorithms
/// differ between standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Uniform in [0, 1).
    double uniform() { return (eng_() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be >= 1.
    int uniform_int(int n) {
        int v = static_cast<int>(uniform() * n);
        return v < n ? v : n - 1;
    }

    bool bernoulli(double p) { return uniform() < p; }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_int(static_cast<int>(i)));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace hoidet
