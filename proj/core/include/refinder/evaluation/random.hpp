#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace refinder {

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed of an independent substream, derived from a base seed and a counter
/// path such as (repetition, query, round). Order of the path matters.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) noexcept;

/// Seedable generator with portable output: the engine is std::mt19937_64
/// (fully specified by the standard) and every distribution is implemented
/// here rather than taken from <random>, whose algorithms vary by vendor.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform integer in [0, bound), bound > 0 (Lemire's rejection method).
    std::uint64_t below(std::uint64_t bound);
    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();
    /// Standard normal via Box-Muller.
    double normal();

    /// `count` distinct elements drawn uniformly from `population`, in draw order.
    /// Returns all of them (shuffled) when count >= population.size().
    template <typename T>
    std::vector<T> sample(std::vector<T> population, std::size_t count) {
        const std::size_t n = population.size();
        const std::size_t k = count < n ? count : n;
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(below(n - i));
            std::swap(population[i], population[j]);
        }
        population.resize(k);
        return population;
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace refinder
