#pragma once

#include <optional>
#include <span>

#include "refinder/descriptor.hpp"
#include "refinder/feedback/samples.hpp"
#include "refinder/feedback/scorer.hpp"

namespace refinder {

struct KdeContext {
    /// Bandwidth of a density with fewer than two exemplars (or a zero median).
    double fallback_bandwidth = 1.0;
    /// log of the surrogate negative density used when no negatives exist.
    /// Required when the negative set is empty.
    std::optional<double> negative_surrogate_log_density;
};

/// P(relevant | x) = p(x|R) / (p(x|R) + p(x|N)) from Gaussian kernel sums
/// exp(-d^2 / 2h^2) averaged over the exemplars of each class. Kernel
/// distances are measured in the transformed space of the metric, if any.
class KdeScorer final : public RelevanceScorer {
public:
    KdeScorer(SampleMatrix positives, SampleMatrix negatives, double pos_bandwidth, double neg_bandwidth,
              std::optional<double> neg_surrogate_log, std::optional<LearnedMetric> metric);

    double score(std::span<const float> x) const override;

    /// log p(x|R) for a point already in the (possibly transformed) kernel space.
    double log_positive_density(const Eigen::VectorXd& z) const;
    double log_negative_density(const Eigen::VectorXd& z) const;

    double positive_bandwidth() const noexcept { return pos_h_; }
    double negative_bandwidth() const noexcept { return neg_h_; }
    Eigen::VectorXd embed(std::span<const float> x) const;

private:
    SampleMatrix pos_;  // transformed exemplars
    SampleMatrix neg_;
    double pos_h_, neg_h_;
    std::optional<double> neg_surrogate_log_;
    std::optional<LearnedMetric> metric_;
};

/// Median pairwise Euclidean distance between the rows of `samples`;
/// nullopt for fewer than two rows.
std::optional<double> median_pairwise_distance(const SampleMatrix& samples);

/// Throws FeedbackError when `positives` is empty.
KdeScorer kde_fit(const SampleMatrix& positives, const SampleMatrix& negatives, const LearnedMetric* metric,
                  const KdeContext& context);

/// Kernel context for a query against a corpus: fallback bandwidth = median
/// distance from the query to the corpus items (excluding `exclude`), both
/// measured under `metric` when given.
double median_query_distance(const CorpusIndex& index, std::span<const float> query, const LearnedMetric* metric,
                             std::optional<std::size_t> exclude);

/// log of the corpus-wide mean of the positive kernel density: the uniform
/// stand-in for p(x|N) when no negatives have been marked.
double corpus_mean_log_density(const CorpusIndex& index, const KdeScorer& positives_only,
                               std::optional<std::size_t> exclude);

}  // namespace refinder
