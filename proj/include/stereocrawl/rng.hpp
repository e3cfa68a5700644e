#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace stereocrawl {

/// Stable 64-bit hash of a byte string (FNV-1a followed by a splitmix64
/// finalizer). Unlike std::hash the value is identical across platforms and
/// runs, so it can key persisted or reproducible randomness.
std::uint64_t stable_hash(std::string_view bytes, std::uint64_t seed = 0);

/// splitmix64 combination of two words.
std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b);

/// Explicitly seeded generator threaded through every sampling decision.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The mapping to doubles and indices is done here rather than
/// with <random> distributions, whose algorithms are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Generator keyed by a seed and a path of integers (e.g. iteration,
    /// strategy, subject, execution). Independent of call order.
    static Rng keyed(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

    std::uint64_t next() { return engine_(); }

    /// Uniform double in [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform integer in [0, n). n must be positive.
    std::size_t index(std::size_t n);

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[index(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace stereocrawl
