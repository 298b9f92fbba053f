#include "refinder/feedback/kde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "refinder/errors.hpp"

namespace refinder {

namespace {

double median(std::vector<double>& v) {
    const std::size_t n = v.size();
    const std::size_t mid = n / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double hi = v[mid];
    if (n % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

// log((1/n) sum_i exp(-||z - s_i||^2 / (2 h^2)))
double log_mean_kernel(const SampleMatrix& samples, const Eigen::VectorXd& z, double h) {
    const Eigen::Index n = samples.rows();
    const double inv = 1.0 / (2.0 * h * h);
    double peak = -std::numeric_limits<double>::infinity();
    std::vector<double> logs(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const double l = -(samples.row(i).transpose() - z).squaredNorm() * inv;
        logs[static_cast<std::size_t>(i)] = l;
        peak = std::max(peak, l);
    }
    double acc = 0.0;
    for (double l : logs) acc += std::exp(l - peak);
    return peak + std::log(acc) - std::log(static_cast<double>(n));
}

SampleMatrix embed_rows(const SampleMatrix& rows, const std::optional<LearnedMetric>& metric) {
    if (!metric || rows.rows() == 0) return rows;
    if (metric->is_diagonal()) return rows * metric->weights().cwiseSqrt().asDiagonal();
    return rows * metric->factor().transpose();
}

}  // namespace

std::optional<double> median_pairwise_distance(const SampleMatrix& samples) {
    const Eigen::Index n = samples.rows();
    if (n < 2) return std::nullopt;
    std::vector<double> d;
    d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) d.push_back((samples.row(i) - samples.row(j)).norm());
    return median(d);
}

KdeScorer::KdeScorer(SampleMatrix positives, SampleMatrix negatives, double pos_bandwidth, double neg_bandwidth,
                     std::optional<double> neg_surrogate_log, std::optional<LearnedMetric> metric)
    : pos_(std::move(positives)),
      neg_(std::move(negatives)),
      pos_h_(pos_bandwidth),
      neg_h_(neg_bandwidth),
      neg_surrogate_log_(neg_surrogate_log),
      metric_(std::move(metric)) {}

Eigen::VectorXd KdeScorer::embed(std::span<const float> x) const {
    if (metric_) return metric_->transform(x);
    return to_vector(x);
}

double KdeScorer::log_positive_density(const Eigen::VectorXd& z) const { return log_mean_kernel(pos_, z, pos_h_); }

double KdeScorer::log_negative_density(const Eigen::VectorXd& z) const {
    if (neg_.rows() == 0) {
        if (!neg_surrogate_log_) throw FeedbackError("KDE without negatives needs a surrogate density");
        return *neg_surrogate_log_;
    }
    return log_mean_kernel(neg_, z, neg_h_);
}

double KdeScorer::score(std::span<const float> x) const {
    if (static_cast<Eigen::Index>(x.size()) != pos_.cols()) throw DimensionError("KDE input dimension mismatch");
    const Eigen::VectorXd z = embed(x);
    const double lr = log_positive_density(z);
    const double ln = log_negative_density(z);
    // pR / (pR + pN) = 1 / (1 + exp(ln - lr))
    const double diff = ln - lr;
    if (diff > 0) {
        const double e = std::exp(-diff);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(diff));
}

KdeScorer kde_fit(const SampleMatrix& positives, const SampleMatrix& negatives, const LearnedMetric* metric,
                  const KdeContext& context) {
    if (positives.rows() == 0) throw FeedbackError("KDE needs at least one relevant example");
    if (negatives.rows() > 0 && negatives.cols() != positives.cols())
        throw DimensionError("positive and negative exemplars differ in dimension");
    if (metric && static_cast<Eigen::Index>(metric->dim()) != positives.cols())
        throw DimensionError("KDE metric dimension mismatch");
    if (!(context.fallback_bandwidth > 0.0)) throw ParameterError("KDE fallback bandwidth must be positive");

    std::optional<LearnedMetric> m;
    if (metric) m = *metric;
    SampleMatrix pos = embed_rows(positives, m);
    SampleMatrix neg = embed_rows(negatives, m);

    auto bandwidth = [&](const SampleMatrix& s) {
        auto h = median_pairwise_distance(s);
        return (h && *h > 0.0) ? *h : context.fallback_bandwidth;
    };
    const double hp = bandwidth(pos);
    const double hn = bandwidth(neg);
    if (neg.rows() == 0 && !context.negative_surrogate_log_density)
        throw FeedbackError("KDE without negatives needs a surrogate density");
    return KdeScorer(std::move(pos), std::move(neg), hp, hn, context.negative_surrogate_log_density, std::move(m));
}

double median_query_distance(const CorpusIndex& index, std::span<const float> query, const LearnedMetric* metric,
                             std::optional<std::size_t> exclude) {
    std::vector<double> d;
    d.reserve(index.size());
    for (std::size_t i = 0; i < index.size(); ++i) {
        if (exclude && *exclude == i) continue;
        d.push_back(metric ? std::sqrt(mahalanobis_dist(index.row(i), query, *metric))
                           : euclidean_dist(index.row(i), query));
    }
    if (d.empty()) throw EmptyIndexError("no corpus items to measure the query against");
    return median(d);
}

double corpus_mean_log_density(const CorpusIndex& index, const KdeScorer& positives_only,
                               std::optional<std::size_t> exclude) {
    std::vector<double> logs;
    logs.reserve(index.size());
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < index.size(); ++i) {
        if (exclude && *exclude == i) continue;
        const double l = positives_only.log_positive_density(positives_only.embed(index.row(i)));
        logs.push_back(l);
        peak = std::max(peak, l);
    }
    if (logs.empty()) throw EmptyIndexError("no corpus items for the surrogate density");
    double acc = 0.0;
    for (double l : logs) acc += std::exp(l - peak);
    return peak + std::log(acc) - std::log(static_cast<double>(logs.size()));
}

}  // namespace refinder
