#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "refinder/corpus_index.hpp"

namespace refinder {

/// Corpus-wide mean and covariance with a factorization of the shrunk
/// covariance (Sigma + lambda I), used as the negative model of Exemplar-LDA.
class BackgroundStats {
public:
    static constexpr double kDefaultShrinkageScale = 0.01;

    /// Moments over every row of `index`; lambda = scale * trace(Sigma) / D.
    static BackgroundStats compute(const CorpusIndex& index, double shrinkage_scale = kDefaultShrinkageScale);

    /// Explicit moments and absolute shrinkage lambda. Throws MetricError for a
    /// non-symmetric covariance and ConditioningError if Sigma + lambda I is not
    /// positive definite.
    static BackgroundStats from_moments(Eigen::VectorXd mean, Eigen::MatrixXd covariance, double shrinkage);

    const Eigen::VectorXd& mean() const noexcept { return mean_; }
    const Eigen::MatrixXd& covariance() const noexcept { return cov_; }
    double shrinkage() const noexcept { return lambda_; }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(mean_.size()); }

    /// (Sigma + lambda I)^-1 rhs.
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

private:
    BackgroundStats() = default;

    Eigen::VectorXd mean_;
    Eigen::MatrixXd cov_;
    double lambda_ = 0.0;
    Eigen::LLT<Eigen::MatrixXd> llt_;
};

}  // namespace refinder
