#include "refinder/corpus_index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "refinder/errors.hpp"
#include "refinder/ranking.hpp"

namespace refinder {

bool CorpusIndex::has_label(std::size_t pos, const std::string& label) const {
    const auto& l = labels_[pos];
    return std::find(l.begin(), l.end(), label) != l.end();
}

std::optional<std::size_t> CorpusIndex::find(const std::string& image_id) const {
    auto it = lookup_.find(image_id);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

void CorpusIndex::finalize() {
    const std::size_t n = ids_.size();
    lookup_.clear();
    lookup_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) lookup_.emplace(ids_[i], i);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ids_[a] < ids_[b]; });
    tie_rank_.assign(n, 0);
    for (std::size_t r = 0; r < n; ++r) tie_rank_[order[r]] = static_cast<std::uint32_t>(r);
}

CorpusIndex CorpusIndex::subset(std::span<const std::size_t> positions) const {
    CorpusIndex out;
    out.dim_ = dim_;
    out.ids_.reserve(positions.size());
    out.uris_.reserve(positions.size());
    out.labels_.reserve(positions.size());
    out.data_.reserve(positions.size() * dim_);
    for (std::size_t p : positions) {
        if (p >= size()) throw ParameterError("subset position out of range");
        if (out.lookup_.count(ids_[p])) throw ParameterError("subset repeats position " + std::to_string(p));
        out.lookup_.emplace(ids_[p], out.ids_.size());
        out.ids_.push_back(ids_[p]);
        out.uris_.push_back(uris_[p]);
        out.labels_.push_back(labels_[p]);
        auto r = row(p);
        out.data_.insert(out.data_.end(), r.begin(), r.end());
    }
    out.finalize();
    return out;
}

CorpusIndex build_index(std::vector<CorpusEntry> entries) {
    if (entries.empty()) throw IngestError("cannot build an index from zero entries");
    CorpusIndex index;
    index.dim_ = entries.front().values.size();
    if (index.dim_ == 0) throw DimensionError("descriptors must have at least one dimension");

    index.ids_.reserve(entries.size());
    index.uris_.reserve(entries.size());
    index.labels_.reserve(entries.size());
    index.data_.reserve(entries.size() * index.dim_);
    for (auto& e : entries) {
        if (e.values.size() != index.dim_)
            throw DimensionError("entry '" + e.image_id + "' has dim " + std::to_string(e.values.size()) +
                                 ", expected " + std::to_string(index.dim_));
        if (!index.lookup_.emplace(e.image_id, index.ids_.size()).second)
            throw IngestError("duplicate image id '" + e.image_id + "'");
        Descriptor d = l2_normalize(std::span<const float>(e.values));
        index.data_.insert(index.data_.end(), d.values().begin(), d.values().end());
        index.ids_.push_back(std::move(e.image_id));
        index.uris_.push_back(std::move(e.image_uri));
        index.labels_.push_back(std::move(e.labels));
    }
    index.finalize();
    return index;
}

void sort_ranking(Ranking& ranking, const CorpusIndex& index) {
    auto& items = ranking.items;
    if (ranking.order == ScoreOrder::ascending_distance) {
        std::sort(items.begin(), items.end(), [&](const RankedItem& a, const RankedItem& b) {
            if (a.score != b.score) return a.score < b.score;
            return index.tie_rank(a.pos) < index.tie_rank(b.pos);
        });
    } else {
        std::sort(items.begin(), items.end(), [&](const RankedItem& a, const RankedItem& b) {
            if (a.score != b.score) return a.score > b.score;
            return index.tie_rank(a.pos) < index.tie_rank(b.pos);
        });
    }
}

Ranking rank_by_distance(const CorpusIndex& index, std::span<const float> query, const LearnedMetric* metric,
                         std::optional<std::size_t> exclude) {
    if (index.empty()) throw EmptyIndexError("query against an empty index");
    if (query.size() != index.dim())
        throw DimensionError("query has dim " + std::to_string(query.size()) + ", index has " +
                             std::to_string(index.dim()));
    if (metric && metric->dim() != index.dim()) throw DimensionError("metric dimension does not match index");

    Ranking ranking;
    ranking.order = ScoreOrder::ascending_distance;
    ranking.items.reserve(index.size());

    if (metric == nullptr) {
        for (std::size_t i = 0; i < index.size(); ++i) {
            if (exclude && *exclude == i) continue;
            ranking.items.push_back({static_cast<std::uint32_t>(i), squared_euclidean(index.row(i), query)});
        }
    } else if (metric->is_diagonal()) {
        for (std::size_t i = 0; i < index.size(); ++i) {
            if (exclude && *exclude == i) continue;
            ranking.items.push_back({static_cast<std::uint32_t>(i), mahalanobis_dist(index.row(i), query, *metric)});
        }
    } else {
        // Blocked evaluation of diag((X - q) M (X - q)^T).
        const auto d = static_cast<Eigen::Index>(index.dim());
        const Eigen::MatrixXd m = metric->matrix();
        const Eigen::RowVectorXd q =
            Eigen::Map<const Eigen::RowVectorXf>(query.data(), d).cast<double>();
        constexpr std::size_t kBlock = 1024;
        Eigen::MatrixXd diff;
        for (std::size_t start = 0; start < index.size(); start += kBlock) {
            const std::size_t count = std::min(kBlock, index.size() - start);
            Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> block(
                index.row(start).data(), static_cast<Eigen::Index>(count), d);
            diff = block.cast<double>().rowwise() - q;
            const Eigen::VectorXd dist = (diff * m).cwiseProduct(diff).rowwise().sum();
            for (std::size_t j = 0; j < count; ++j) {
                const std::size_t i = start + j;
                if (exclude && *exclude == i) continue;
                double v = dist[static_cast<Eigen::Index>(j)];
                if (v < 0.0) {
                    if (v < -1e-9) throw MetricError("negative Mahalanobis distance in ranking");
                    v = 0.0;
                }
                ranking.items.push_back({static_cast<std::uint32_t>(i), v});
            }
        }
    }
    sort_ranking(ranking, index);
    return ranking;
}

std::vector<Neighbor> knn_query(const CorpusIndex& index, std::span<const float> query, std::size_t k,
                                const LearnedMetric* metric) {
    if (k < 1) throw ParameterError("k must be at least 1");
    Ranking r = rank_by_distance(index, query, metric);
    const std::size_t n = std::min(k, r.size());
    std::vector<Neighbor> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& item = r.items[i];
        out.push_back({index.id(item.pos), metric ? item.score : std::sqrt(item.score)});
    }
    return out;
}

std::vector<Neighbor> knn_query(const CorpusIndex& index, const Descriptor& query, std::size_t k,
                                const LearnedMetric* metric) {
    return knn_query(index, query.values(), k, metric);
}

}  // namespace refinder
