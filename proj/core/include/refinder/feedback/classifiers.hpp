#pragma once

#include <cstddef>

#include "refinder/feedback/background.hpp"
#include "refinder/feedback/samples.hpp"
#include "refinder/feedback/scorer.hpp"

namespace refinder {

struct SvmOptions {
    double c = 1.0;
    double nu = 0.5;
    std::size_t max_iterations = 100000;
    double tolerance = 1e-9;
};

/// Linear soft-margin SVM (hinge loss, dual coordinate descent, bias as an
/// extra constant feature). Score = decision value.
LinearScorer svm_two_class_fit(const SampleMatrix& positives, const SampleMatrix& negatives,
                               const SvmOptions& options = {});

/// Linear nu one-class SVM solved by SMO. Score = <w, x> - rho.
LinearScorer svm_one_class_fit(const SampleMatrix& positives, const SvmOptions& options = {});

/// Two-class SVM when negatives exist, one-class otherwise. Throws
/// FeedbackError when `positives` is empty.
LinearScorer svm_fit(const SampleMatrix& positives, const SampleMatrix& negatives, const SvmOptions& options = {});

/// w = (Sigma_bg + lambda I)^-1 (mu_pos - mu_bg); score(x) = <w, x>.
LinearScorer exemplar_lda_fit(const SampleMatrix& positives, const BackgroundStats& background);

}  // namespace refinder
