#pragma once

#include <span>
#include <string_view>

#include <Eigen/Core>

namespace refinder {

/// Scores corpus items by relevance; higher means more relevant.
///
/// A fitted scorer is immutable and may be shared between threads.
class RelevanceScorer {
public:
    virtual ~RelevanceScorer() = default;
    virtual double score(std::span<const float> x) const = 0;
};

/// score(x) = <w, x> + bias. Used by the SVM variants and Exemplar-LDA.
class LinearScorer final : public RelevanceScorer {
public:
    LinearScorer(Eigen::VectorXd weights, double bias) : w_(std::move(weights)), bias_(bias) {}

    double score(std::span<const float> x) const override;
    double score(const Eigen::VectorXd& x) const { return w_.dot(x) + bias_; }

    const Eigen::VectorXd& weights() const noexcept { return w_; }
    double bias() const noexcept { return bias_; }

private:
    Eigen::VectorXd w_;
    double bias_;
};

}  // namespace refinder
