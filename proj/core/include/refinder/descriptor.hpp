#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace refinder {

/// A global image vector with unit L2 norm.
///
/// Values are stored as 32-bit floats; every distance computed from them is
/// accumulated in double precision.
class Descriptor {
public:
    Descriptor() = default;

    std::size_t dim() const noexcept { return values_.size(); }
    std::span<const float> values() const noexcept { return values_; }
    float operator[](std::size_t i) const { return values_[i]; }

    bool operator==(const Descriptor&) const = default;

    friend Descriptor l2_normalize(std::span<const double> v);
    friend Descriptor l2_normalize(std::span<const float> v);

private:
    explicit Descriptor(std::vector<float> v) : values_(std::move(v)) {}
    std::vector<float> values_;
};

/// Returns v / ||v||. Throws NormalizationError for zero or non-finite input.
Descriptor l2_normalize(std::span<const double> v);
Descriptor l2_normalize(std::span<const float> v);

double euclidean_dist(std::span<const float> a, std::span<const float> b);
double euclidean_dist(const Descriptor& a, const Descriptor& b);

/// Squared Euclidean distance accumulated in double.
double squared_euclidean(std::span<const float> a, std::span<const float> b);

/// A positive semi-definite matrix M defining d_M(a, b) = (a-b)^T M (a-b).
///
/// Either a full symmetric matrix or the compact diagonal form. Construction
/// validates symmetry (|M - M^T|_inf <= 1e-9), positive semi-definiteness
/// (smallest eigenvalue >= -1e-8) and non-negativity of diagonal weights, and
/// throws MetricError otherwise.
class LearnedMetric {
public:
    static constexpr double kSymmetryTolerance = 1e-9;
    static constexpr double kEigenTolerance = -1e-8;

    static LearnedMetric identity(std::size_t dim);
    static LearnedMetric diagonal(Eigen::VectorXd weights);
    static LearnedMetric full(Eigen::MatrixXd matrix);

    std::size_t dim() const noexcept { return dim_; }
    bool is_diagonal() const noexcept { return diagonal_; }

    /// Diagonal weights; only meaningful when is_diagonal().
    const Eigen::VectorXd& weights() const noexcept { return weights_; }

    /// Dense D x D matrix (materialized for the diagonal form).
    Eigen::MatrixXd matrix() const;

    /// Matrix L with M = L^T L, so that d_M(a, b) = ||L a - L b||^2.
    Eigen::MatrixXd factor() const;

    /// Raw quadratic form (a-b)^T M (a-b) without clamping.
    double quadratic_form(std::span<const float> a, std::span<const float> b) const;

    /// L x in double precision.
    Eigen::VectorXd transform(std::span<const float> x) const;

private:
    LearnedMetric() = default;

    std::size_t dim_ = 0;
    bool diagonal_ = true;
    Eigen::VectorXd weights_;
    Eigen::MatrixXd matrix_;
    Eigen::MatrixXd factor_;
};

/// d_M(a, b). Values in [-1e-9, 0) clamp to zero; anything below raises MetricError.
double mahalanobis_dist(std::span<const float> a, std::span<const float> b, const LearnedMetric& m);
double mahalanobis_dist(const Descriptor& a, const Descriptor& b, const LearnedMetric& m);

}  // namespace refinder
