#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace gossip_coverage {

/// Seeded generator with a fixed, documented draw procedure so that results
/// reproduce bit-exactly across standard libraries.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Bounded draws use rejection sampling on the raw 64-bit output
/// (the distribution classes of <random> are implementation-defined and are
/// deliberately not used).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t uniform_below(std::uint64_t bound) {
        // Values below `threshold` would bias the modulo; reject them.
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t x = engine_();
            if (x >= threshold)
                return x % bound;
        }
    }

    /// `count` distinct values from [0, population), sorted ascending.
    /// Floyd's algorithm: one bounded draw per selected value.
    std::vector<std::uint64_t> sample_distinct(std::uint64_t count, std::uint64_t population) {
        std::vector<std::uint64_t> chosen;
        if (count >= population) {
            chosen.resize(population);
            for (std::uint64_t k = 0; k < population; ++k)
                chosen[k] = k;
            return chosen;
        }
        chosen.reserve(count);
        for (std::uint64_t j = population - count; j < population; ++j) {
            const std::uint64_t t = uniform_below(j + 1);
            const auto pos = std::lower_bound(chosen.begin(), chosen.end(), t);
            if (pos != chosen.end() && *pos == t)
                chosen.insert(std::lower_bound(chosen.begin(), chosen.end(), j), j);
            else
                chosen.insert(pos, t);
        }
        return chosen;
    }

    /// Fisher-Yates shuffle driven by uniform_below.
    template <class T>
    void shuffle(std::span<T> items) {
        for (std::size_t k = items.size(); k > 1; --k) {
            const auto r = static_cast<std::size_t>(uniform_below(k));
            std::swap(items[k - 1], items[r]);
        }
    }

private:
    std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; used to derive independent stream seeds from one
/// trial seed.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

} // namespace gossip_coverage
