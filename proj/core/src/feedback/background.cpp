#include "refinder/feedback/background.hpp"

#include <algorithm>

#include "refinder/errors.hpp"

namespace refinder {

BackgroundStats BackgroundStats::compute(const CorpusIndex& index, double shrinkage_scale) {
    if (index.empty()) throw EmptyIndexError("background statistics of an empty index");
    if (!(shrinkage_scale >= 0.0)) throw ParameterError("shrinkage scale must be non-negative");
    const auto n = static_cast<Eigen::Index>(index.size());
    const auto d = static_cast<Eigen::Index>(index.dim());
    Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> x(index.data().data(), n, d);
    const Eigen::MatrixXd xd = x.cast<double>();
    Eigen::VectorXd mean = xd.colwise().mean().transpose();
    const Eigen::MatrixXd centered = xd.rowwise() - mean.transpose();
    const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
    Eigen::MatrixXd cov = (centered.transpose() * centered) / denom;
    const double lambda = shrinkage_scale * cov.trace() / static_cast<double>(d);
    return from_moments(std::move(mean), std::move(cov), lambda);
}

BackgroundStats BackgroundStats::from_moments(Eigen::VectorXd mean, Eigen::MatrixXd covariance, double shrinkage) {
    if (covariance.rows() != mean.size() || covariance.cols() != mean.size())
        throw DimensionError("background covariance does not match mean dimension");
    if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-9)
        throw MetricError("background covariance is not symmetric");
    BackgroundStats bg;
    bg.mean_ = std::move(mean);
    bg.cov_ = std::move(covariance);
    bg.lambda_ = shrinkage;
    Eigen::MatrixXd reg = bg.cov_;
    reg.diagonal().array() += shrinkage;
    bg.llt_.compute(reg);
    if (bg.llt_.info() != Eigen::Success) throw ConditioningError("regularized background covariance is singular");
    const double min_pivot = bg.llt_.matrixLLT().diagonal().cwiseAbs().minCoeff();
    const double max_pivot = bg.llt_.matrixLLT().diagonal().cwiseAbs().maxCoeff();
    if (!(min_pivot > 1e-12 * std::max(1.0, max_pivot)))
        throw ConditioningError("regularized background covariance is numerically singular");
    return bg;
}

Eigen::VectorXd BackgroundStats::solve(const Eigen::VectorXd& rhs) const {
    if (rhs.size() != mean_.size()) throw DimensionError("background solve dimension mismatch");
    return llt_.solve(rhs);
}

}  // namespace refinder
