#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace refinder {

/// NDCG@k for binary relevance labels y_1..y_n:
///   (sum_{i<=k} y_i / log2(i+1)) / (sum_{i<=min(k,|R|)} 1 / log2(i+1)),
/// and 0 when total_relevant is 0. Throws ParameterError for k = 0 or k > n.
double ndcg_at_k(std::span<const std::uint8_t> relevance, std::size_t total_relevant, std::size_t k);

}  // namespace refinder
