#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "refinder/descriptor.hpp"

namespace refinder {

struct CorpusEntry {
    std::string image_id;
    std::vector<float> values;  // raw; normalized by build_index
    std::vector<std::string> labels;
    std::string image_uri;
};

/// Immutable store of L2-normalized descriptors with their metadata.
///
/// Rows are kept contiguous (N x D, row-major). Once built the index exposes
/// only const accessors, so a single instance may be shared between any
/// number of readers.
class CorpusIndex {
public:
    std::size_t size() const noexcept { return ids_.size(); }
    std::size_t dim() const noexcept { return dim_; }
    bool empty() const noexcept { return ids_.empty(); }

    const std::string& id(std::size_t pos) const { return ids_[pos]; }
    const std::string& uri(std::size_t pos) const { return uris_[pos]; }
    const std::vector<std::string>& labels(std::size_t pos) const { return labels_[pos]; }
    bool has_label(std::size_t pos, const std::string& label) const;

    std::span<const float> row(std::size_t pos) const {
        return {data_.data() + pos * dim_, dim_};
    }
    std::span<const float> data() const noexcept { return data_; }

    std::optional<std::size_t> find(const std::string& image_id) const;

    /// Position of this entry's id in lexicographic id order; used as the
    /// deterministic tie-breaker for equal distances or scores.
    std::uint32_t tie_rank(std::size_t pos) const { return tie_rank_[pos]; }

    /// New index holding the given positions (in the given order).
    CorpusIndex subset(std::span<const std::size_t> positions) const;

    friend CorpusIndex build_index(std::vector<CorpusEntry> entries);

private:
    CorpusIndex() = default;
    void finalize();

    std::size_t dim_ = 0;
    std::vector<std::string> ids_;
    std::vector<std::string> uris_;
    std::vector<std::vector<std::string>> labels_;
    std::vector<float> data_;
    std::vector<std::uint32_t> tie_rank_;
    std::unordered_map<std::string, std::size_t> lookup_;
};

/// Validates and normalizes entries. Throws IngestError on empty input or
/// duplicate ids, DimensionError on inconsistent dimensions and
/// NormalizationError on zero vectors.
CorpusIndex build_index(std::vector<CorpusEntry> entries);

struct Neighbor {
    std::string image_id;
    double distance;
};

/// Exact k nearest neighbours. Without a metric the distance is Euclidean;
/// with one it is d_M (squared form). Sorted ascending, ties by image id.
std::vector<Neighbor> knn_query(const CorpusIndex& index, std::span<const float> query, std::size_t k,
                                const LearnedMetric* metric = nullptr);
std::vector<Neighbor> knn_query(const CorpusIndex& index, const Descriptor& query, std::size_t k,
                                const LearnedMetric* metric = nullptr);

}  // namespace refinder
