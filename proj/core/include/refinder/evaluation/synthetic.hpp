#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "refinder/corpus_index.hpp"

namespace refinder {

/// Seeded Gaussian-cluster corpus with a small relevant class.
///
/// Every item has a cluster-specific signal in the first `signal_dims`
/// dimensions and shared isotropic clutter in the remaining ones. Relevant
/// items form one cluster; distractors come from `distractor_clusters` other
/// clusters, some of them placed close to the relevant one.
struct SyntheticConfig {
    std::size_t count = 5000;
    std::size_t dim = 64;
    double relevant_fraction = 0.04;
    std::size_t signal_dims = 10;
    std::size_t distractor_clusters = 20;
    double centre_norm = 1.5;      // norm of distractor cluster centres in signal dims
    double signal_spread = 0.35;   // within-cluster std in signal dims
    double clutter = 0.4;          // std in clutter dims
    double confuser_offset = 1.5;  // distance of confusable clusters from the relevant centre
    std::size_t confusers = 4;
    std::uint64_t seed = 7;
    std::string label = "relevant";
};

struct SyntheticCorpus {
    std::vector<CorpusEntry> entries;
    std::vector<std::string> relevant_ids;
    std::string label;
};

SyntheticCorpus make_synthetic_corpus(const SyntheticConfig& config);

}  // namespace refinder
