#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "refinder/descriptor.hpp"
#include "refinder/feedback/samples.hpp"
#include "refinder/ranking.hpp"

namespace refinder {

/// Similar pairs (all pairs of positives) and dissimilar pairs (positive x
/// negative) as row-index pairs into the stacked matrix [positives; negatives].
struct PairSet {
    SampleMatrix points;
    std::vector<std::pair<std::size_t, std::size_t>> similar;
    std::vector<std::pair<std::size_t, std::size_t>> dissimilar;
};

PairSet make_pairs(const SampleMatrix& positives, const SampleMatrix& negatives);

struct DiagonalOptions {
    double step = 0.01;
    std::size_t iterations = 500;
};

/// sum_sim d_w / sum_dis d_w (the denominator is 1 when there are no dissimilar pairs).
double feature_weighting_objective(const PairSet& pairs, const Eigen::VectorXd& w);

/// Diagonal weights minimizing the similar/dissimilar distance ratio by
/// projected gradient descent from w = 1 (w >= 0, sum w = D after every step).
/// Returns the best iterate, so the objective never exceeds its initial value.
LearnedMetric feature_weighting_fit(const SampleMatrix& positives, const SampleMatrix& negatives,
                                    const DiagonalOptions& options = {});

/// sum_dis sqrt(d_w): the separation that diagonal MMC constrains to be >= 1.
double mmc_separation(const PairSet& pairs, const Eigen::VectorXd& w);
double mmc_similar_sum(const PairSet& pairs, const Eigen::VectorXd& w);

/// Diagonal MMC: minimize sum_sim d_w subject to sum_dis sqrt(d_w) >= 1.
/// Throws FeedbackError without dissimilar pairs or when every dissimilar pair
/// coincides.
LearnedMetric mmc_diag_fit(const SampleMatrix& positives, const SampleMatrix& negatives,
                           const DiagonalOptions& options = {});

struct ItmlOptions {
    /// Slack trade-off; infinity enforces the constraints exactly.
    double gamma = std::numeric_limits<double>::infinity();
    std::size_t max_sweeps = 1000;
    double tolerance = 1e-3;
    double upper_fraction = 0.5;
    double lower_percentile = 95.0;
};

struct ItmlThresholds {
    double upper = 0.0;  // similar pairs: d_M <= upper
    double lower = 0.0;  // dissimilar pairs: d_M >= lower
    bool adjusted = false;  // upper was reduced to 0.9 * lower
};

struct ItmlResult {
    LearnedMetric metric;
    ItmlThresholds thresholds;
    std::size_t sweeps = 0;
    double max_violation = 0.0;
    bool converged = true;
};

/// Per-query thresholds on squared distances. upper = fraction * d^2(query,
/// first negative in `baseline`), falling back to the median squared query
/// distance when no ranked item is negative; lower = percentile of d^2(query, x)
/// over the ranked items.
ItmlThresholds itml_thresholds(const CorpusIndex& index, std::span<const float> query, const Ranking& baseline,
                               std::span<const std::size_t> negatives, const ItmlOptions& options = {});

/// Bregman projections from the prior M0 = I. Row 0 of `pairs.points` is
/// typically the query.
ItmlResult itml_solve(const PairSet& pairs, const ItmlThresholds& thresholds, const ItmlOptions& options = {});

/// Full ITML fit: the query joins the positives, thresholds come from the
/// baseline ranking. Empty feedback returns the identity.
ItmlResult itml_fit(const CorpusIndex& index, std::span<const float> query, std::span<const std::size_t> positives,
                    std::span<const std::size_t> negatives, const Ranking& baseline,
                    const ItmlOptions& options = {});

}  // namespace refinder
