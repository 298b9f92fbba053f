#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "refinder/corpus_index.hpp"

namespace refinder {

enum class ScoreOrder {
    ascending_distance,    // smaller score ranks first
    descending_relevance,  // larger score ranks first
};

struct RankedItem {
    std::uint32_t pos;  // position in the CorpusIndex
    double score;
};

/// A total order over (a subset of) corpus positions.
struct Ranking {
    ScoreOrder order = ScoreOrder::ascending_distance;
    std::vector<RankedItem> items;

    std::size_t size() const noexcept { return items.size(); }
};

/// Sorts items by score in the requested direction, breaking ties by the
/// index's lexicographic id rank.
void sort_ranking(Ranking& ranking, const CorpusIndex& index);

/// Ranks every corpus item (except `exclude`) by distance to `query`:
/// squared Euclidean without a metric, d_M with one.
Ranking rank_by_distance(const CorpusIndex& index, std::span<const float> query, const LearnedMetric* metric,
                         std::optional<std::size_t> exclude = std::nullopt);

}  // namespace refinder
