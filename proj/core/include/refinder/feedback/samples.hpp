#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Core>

#include "refinder/corpus_index.hpp"

namespace refinder {

/// Feedback exemplars, one sample per row, in double precision.
using SampleMatrix = Eigen::MatrixXd;

SampleMatrix gather_rows(const CorpusIndex& index, std::span<const std::size_t> positions);

/// Rows of `samples` followed by `extra` as a final row.
SampleMatrix with_row(const SampleMatrix& samples, std::span<const float> extra);

Eigen::VectorXd to_vector(std::span<const float> x);

}  // namespace refinder
