#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "refinder/corpus_index.hpp"
#include "refinder/feedback/refine.hpp"
#include "refinder/feedback/state.hpp"
#include "refinder/ranking.hpp"

namespace refinder {

struct SimulationConfig {
    std::size_t rounds = 10;
    std::size_t marks_per_round = 10;
    std::size_t pool_depth = 100;
    std::size_t eval_k = 100;
    std::size_t repetitions = 10;
    double subsample_fraction = 0.75;
    std::uint64_t rng_seed = 0;

    /// Throws ParameterError when an invariant is violated.
    void validate() const;
};

/// Produces the refined ranking for the current feedback state.
using Refiner = std::function<Ranking(const FeedbackState&)>;

struct SessionTrajectory {
    std::vector<double> ndcg;          // rounds + 1 values; element 0 is the baseline
    std::vector<std::string> errors;   // one entry per round (empty when the refit succeeded)
    std::size_t failed_rounds = 0;
};

/// 1 for items carrying `label`, 0 otherwise.
std::vector<std::uint8_t> label_relevance(const CorpusIndex& index, const std::string& label);

/// NDCG@k of a ranking; k is capped at the ranking length.
double ranking_ndcg(const Ranking& ranking, std::span<const std::uint8_t> relevant, std::size_t total_relevant,
                    std::size_t k);

/// Simulated feedback loop for one query (a corpus item, excluded from the
/// ranking). Each round marks up to marks_per_round unmarked items drawn
/// uniformly from the current top pool_depth, according to `relevant`, refits
/// and re-ranks. A failed refit keeps the previous ranking.
SessionTrajectory simulate_feedback_session(const CorpusIndex& index, std::size_t query_pos,
                                            std::span<const std::uint8_t> relevant, const Ranking& baseline,
                                            const Refiner& refine, const SimulationConfig& cfg, std::uint64_t seed);

SessionTrajectory simulate_feedback_session(const CorpusIndex& index, std::size_t query_pos,
                                            std::span<const std::uint8_t> relevant, Method method,
                                            const FeedbackParams& params, const BackgroundStats* background,
                                            const SimulationConfig& cfg, std::uint64_t seed);

}  // namespace refinder
