#include "refinder/descriptor.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "refinder/errors.hpp"

namespace refinder {

namespace {

template <typename T>
void normalize_impl(std::span<const T> v, std::vector<float>& out) {
    double sq = 0.0;
    for (T x : v) {
        if (!std::isfinite(static_cast<double>(x))) throw NormalizationError("descriptor contains non-finite values");
        sq += static_cast<double>(x) * static_cast<double>(x);
    }
    if (!(sq > 0.0)) throw NormalizationError("cannot normalize a zero vector");
    const double inv = 1.0 / std::sqrt(sq);
    out.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(static_cast<double>(v[i]) * inv);
}

void check_dims(std::size_t a, std::size_t b) {
    if (a != b) throw DimensionError("dimension mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
}

}  // namespace

Descriptor l2_normalize(std::span<const double> v) {
    std::vector<float> out;
    normalize_impl(v, out);
    return Descriptor(std::move(out));
}

Descriptor l2_normalize(std::span<const float> v) {
    std::vector<float> out;
    normalize_impl(v, out);
    return Descriptor(std::move(out));
}

double squared_euclidean(std::span<const float> a, std::span<const float> b) {
    check_dims(a.size(), b.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        acc += d * d;
    }
    return acc;
}

double euclidean_dist(std::span<const float> a, std::span<const float> b) {
    return std::sqrt(squared_euclidean(a, b));
}

double euclidean_dist(const Descriptor& a, const Descriptor& b) {
    return euclidean_dist(a.values(), b.values());
}

LearnedMetric LearnedMetric::identity(std::size_t dim) {
    return diagonal(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(dim)));
}

LearnedMetric LearnedMetric::diagonal(Eigen::VectorXd weights) {
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
        if (!std::isfinite(weights[i]) || weights[i] < 0.0)
            throw MetricError("diagonal metric weight " + std::to_string(i) + " is negative or non-finite");
    }
    LearnedMetric m;
    m.dim_ = static_cast<std::size_t>(weights.size());
    m.diagonal_ = true;
    m.weights_ = std::move(weights);
    return m;
}

LearnedMetric LearnedMetric::full(Eigen::MatrixXd matrix) {
    if (matrix.rows() != matrix.cols()) throw MetricError("metric matrix is not square");
    if (!matrix.allFinite()) throw MetricError("metric matrix contains non-finite values");
    const double asym = (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymmetryTolerance) throw MetricError("metric matrix is not symmetric");
    Eigen::MatrixXd sym = 0.5 * (matrix + matrix.transpose());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    if (eig.info() != Eigen::Success) throw MetricError("eigendecomposition of metric failed");
    if (eig.eigenvalues().minCoeff() < kEigenTolerance)
        throw MetricError("metric matrix is not positive semi-definite (min eigenvalue " +
                          std::to_string(eig.eigenvalues().minCoeff()) + ")");

    LearnedMetric m;
    m.dim_ = static_cast<std::size_t>(sym.rows());
    m.diagonal_ = false;
    m.factor_ = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
    m.matrix_ = std::move(sym);
    return m;
}

Eigen::MatrixXd LearnedMetric::matrix() const {
    if (diagonal_) return weights_.asDiagonal();
    return matrix_;
}

Eigen::MatrixXd LearnedMetric::factor() const {
    if (diagonal_) return weights_.cwiseSqrt().asDiagonal();
    return factor_;
}

double LearnedMetric::quadratic_form(std::span<const float> a, std::span<const float> b) const {
    check_dims(a.size(), b.size());
    check_dims(a.size(), dim_);
    const auto n = static_cast<Eigen::Index>(dim_);
    Eigen::VectorXd diff(n);
    for (Eigen::Index i = 0; i < n; ++i)
        diff[i] = static_cast<double>(a[static_cast<std::size_t>(i)]) - static_cast<double>(b[static_cast<std::size_t>(i)]);
    if (diagonal_) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) acc += weights_[i] * (diff[i] * diff[i]);
        return acc;
    }
    return diff.dot(matrix_ * diff);
}

Eigen::VectorXd LearnedMetric::transform(std::span<const float> x) const {
    check_dims(x.size(), dim_);
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXf>(x.data(), static_cast<Eigen::Index>(x.size())).cast<double>();
    if (diagonal_) return weights_.cwiseSqrt().cwiseProduct(v);
    return factor_ * v;
}

double mahalanobis_dist(std::span<const float> a, std::span<const float> b, const LearnedMetric& m) {
    const double d = m.quadratic_form(a, b);
    if (d < 0.0) {
        if (d < -1e-9) throw MetricError("negative Mahalanobis distance " + std::to_string(d));
        return 0.0;
    }
    return d;
}

double mahalanobis_dist(const Descriptor& a, const Descriptor& b, const LearnedMetric& m) {
    return mahalanobis_dist(a.values(), b.values(), m);
}

}  // namespace refinder
