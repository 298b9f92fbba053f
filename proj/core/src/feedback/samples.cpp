#include "refinder/feedback/samples.hpp"

#include "refinder/errors.hpp"
#include "refinder/feedback/scorer.hpp"

namespace refinder {

Eigen::VectorXd to_vector(std::span<const float> x) {
    return Eigen::Map<const Eigen::VectorXf>(x.data(), static_cast<Eigen::Index>(x.size())).cast<double>();
}

SampleMatrix gather_rows(const CorpusIndex& index, std::span<const std::size_t> positions) {
    SampleMatrix out(static_cast<Eigen::Index>(positions.size()), static_cast<Eigen::Index>(index.dim()));
    for (std::size_t r = 0; r < positions.size(); ++r)
        out.row(static_cast<Eigen::Index>(r)) = to_vector(index.row(positions[r])).transpose();
    return out;
}

SampleMatrix with_row(const SampleMatrix& samples, std::span<const float> extra) {
    const auto d = static_cast<Eigen::Index>(extra.size());
    if (samples.rows() > 0 && samples.cols() != d) throw DimensionError("sample dimension mismatch");
    SampleMatrix out(samples.rows() + 1, d);
    if (samples.rows() > 0) out.topRows(samples.rows()) = samples;
    out.row(samples.rows()) = to_vector(extra).transpose();
    return out;
}

double LinearScorer::score(std::span<const float> x) const {
    if (static_cast<Eigen::Index>(x.size()) != w_.size()) throw DimensionError("scorer dimension mismatch");
    double acc = bias_;
    for (std::size_t i = 0; i < x.size(); ++i) acc += w_[static_cast<Eigen::Index>(i)] * static_cast<double>(x[i]);
    return acc;
}

}  // namespace refinder
