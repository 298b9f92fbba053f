#include "refinder/evaluation/ndcg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "refinder/errors.hpp"

namespace refinder {

double ndcg_at_k(std::span<const std::uint8_t> relevance, std::size_t total_relevant, std::size_t k) {
    if (k == 0) throw ParameterError("NDCG cutoff k must be at least 1");
    if (k > relevance.size())
        throw ParameterError("NDCG cutoff k = " + std::to_string(k) + " exceeds ranking length " +
                             std::to_string(relevance.size()));
    if (total_relevant == 0) return 0.0;

    double dcg = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        if (relevance[i]) dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    double ideal = 0.0;
    const std::size_t m = std::min(k, total_relevant);
    for (std::size_t i = 0; i < m; ++i) ideal += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    return dcg / ideal;
}

}  // namespace refinder
