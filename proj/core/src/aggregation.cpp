#include "refinder/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "refinder/errors.hpp"

namespace refinder {

FeatureMap::FeatureMap(std::size_t height, std::size_t width, std::size_t channels, std::vector<float> data)
    : h_(height), w_(width), c_(channels), data_(std::move(data)) {
    if (h_ == 0 || w_ == 0 || c_ == 0) throw ParameterError("feature map extents must be at least 1x1x1");
    if (data_.size() != h_ * w_ * c_)
        throw ParameterError("feature map holds " + std::to_string(data_.size()) + " values, expected " +
                             std::to_string(h_ * w_ * c_));
    for (float v : data_)
        if (!std::isfinite(v)) throw ParameterError("feature map contains non-finite activations");
}

std::size_t pmp_count(std::size_t positions, double ratio) {
    if (!(ratio > 0.0 && ratio <= 1.0)) throw ParameterError("PMP ratio must lie in (0, 1]");
    const auto k = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(positions)));
    return std::clamp<std::size_t>(k, 1, positions);
}

std::vector<Region> rmac_regions(std::size_t height, std::size_t width, std::size_t num_scales) {
    if (height == 0 || width == 0) throw ParameterError("R-MAC needs a map of at least 1x1");
    if (num_scales == 0) throw ParameterError("R-MAC needs at least one scale");

    // Offsets along one axis of length `extent` for regions of size `side`:
    // n - 1 = ceil((extent - side) / (0.6 side)) keeps neighbours >= 40% overlapping.
    auto offsets = [](std::size_t extent, std::size_t side) {
        std::vector<std::size_t> out;
        if (extent <= side) {
            out.push_back(0);
            return out;
        }
        const std::size_t slack = extent - side;
        // Never more gaps than pixels of slack, so offsets stay distinct.
        const std::size_t gaps = std::min(slack, (5 * slack + 3 * side - 1) / (3 * side));
        for (std::size_t i = 0; i <= gaps; ++i) out.push_back(i * slack / gaps);
        return out;
    };

    const std::size_t shorter = std::min(height, width);
    std::vector<Region> regions;
    std::size_t previous_side = 0;
    for (std::size_t l = 1; l <= num_scales; ++l) {
        const std::size_t side = std::max<std::size_t>(1, (2 * shorter) / (l + 1));
        // Small maps can give two scales the same side; their grids would coincide.
        if (side == previous_side) continue;
        previous_side = side;
        for (std::size_t y : offsets(height, side))
            for (std::size_t x : offsets(width, side)) regions.push_back({y, x, side});
    }
    return regions;
}

namespace raw {

std::vector<double> average(const FeatureMap& fm) {
    std::vector<double> out(fm.channels(), 0.0);
    for (std::size_t p = 0; p < fm.positions(); ++p) {
        auto f = fm.position(p);
        for (std::size_t c = 0; c < fm.channels(); ++c) out[c] += f[c];
    }
    const auto n = static_cast<double>(fm.positions());
    for (double& v : out) v /= n;
    return out;
}

std::vector<double> max(const FeatureMap& fm) {
    std::vector<double> out(fm.position(0).begin(), fm.position(0).end());
    for (std::size_t p = 1; p < fm.positions(); ++p) {
        auto f = fm.position(p);
        for (std::size_t c = 0; c < fm.channels(); ++c) out[c] = std::max<double>(out[c], f[c]);
    }
    return out;
}

std::vector<double> pmp(const FeatureMap& fm, double ratio) {
    const std::size_t k = pmp_count(fm.positions(), ratio);
    std::vector<double> out(fm.channels());
    std::vector<float> column(fm.positions());
    for (std::size_t c = 0; c < fm.channels(); ++c) {
        for (std::size_t p = 0; p < fm.positions(); ++p) column[p] = fm.position(p)[c];
        std::nth_element(column.begin(), column.begin() + static_cast<std::ptrdiff_t>(k - 1), column.end(),
                         std::greater<>());
        std::sort(column.begin(), column.begin() + static_cast<std::ptrdiff_t>(k), std::greater<>());
        double sum = 0.0;
        for (std::size_t i = 0; i < k; ++i) sum += column[i];
        out[c] = sum / static_cast<double>(k);
    }
    return out;
}

std::vector<double> gem(const FeatureMap& fm, double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw ParameterError("GeM exponent must be finite and >= 1");
    const auto n = static_cast<double>(fm.positions());
    std::vector<double> out(fm.channels(), 0.0);
    if (p == 1.0) {
        for (std::size_t q = 0; q < fm.positions(); ++q) {
            auto f = fm.position(q);
            for (std::size_t c = 0; c < fm.channels(); ++c) out[c] += std::max(0.0f, f[c]);
        }
        for (double& v : out) v /= n;
        return out;
    }
    // Scale each channel by its maximum so large p cannot overflow.
    const std::vector<double> peak = max(fm);
    for (std::size_t c = 0; c < fm.channels(); ++c) {
        const double m = peak[c];
        if (m <= 0.0) continue;
        double acc = 0.0;
        for (std::size_t q = 0; q < fm.positions(); ++q) {
            const double x = std::max(0.0f, fm.position(q)[c]);
            acc += std::pow(x / m, p);
        }
        out[c] = m * std::pow(acc / n, 1.0 / p);
    }
    return out;
}

std::vector<double> adacow(const FeatureMap& fm) {
    const std::size_t C = fm.channels();
    const std::size_t P = fm.positions();
    for (float v : fm.data())
        if (v < 0.0f) throw ParameterError("adacow pooling expects non-negative activations");

    // Spatial weights: square root of the per-position activation sum, normalized to sum 1.
    std::vector<double> spatial(P, 0.0);
    double spatial_total = 0.0;
    for (std::size_t p = 0; p < P; ++p) {
        double s = 0.0;
        for (float v : fm.position(p)) s += v;
        spatial[p] = std::sqrt(s);
        spatial_total += spatial[p];
    }
    if (!(spatial_total > 0.0)) throw NormalizationError("adacow pooling of an all-zero feature map");
    for (double& s : spatial) s /= spatial_total;

    // Channel weights: log(sum_c n'_c / n'_c), n'_c = nonzero positions + 1.
    std::vector<double> channel(C, 1.0);
    if (C > 1) {
        std::vector<double> counts(C, 1.0);
        for (std::size_t p = 0; p < P; ++p) {
            auto f = fm.position(p);
            for (std::size_t c = 0; c < C; ++c)
                if (f[c] != 0.0f) counts[c] += 1.0;
        }
        double total = 0.0;
        for (double n : counts) total += n;
        for (std::size_t c = 0; c < C; ++c) channel[c] = std::log(total / counts[c]);
    }

    std::vector<double> out(C, 0.0);
    for (std::size_t p = 0; p < P; ++p) {
        auto f = fm.position(p);
        for (std::size_t c = 0; c < C; ++c) out[c] += spatial[p] * f[c];
    }
    for (std::size_t c = 0; c < C; ++c) out[c] *= channel[c];
    return out;
}

std::vector<double> rmac(const FeatureMap& fm, std::size_t num_scales) {
    const std::size_t C = fm.channels();
    std::vector<double> sum(C, 0.0);
    std::vector<double> region_max(C);
    for (const Region& r : rmac_regions(fm.height(), fm.width(), num_scales)) {
        std::fill(region_max.begin(), region_max.end(), -std::numeric_limits<double>::infinity());
        const std::size_t y1 = std::min(fm.height(), r.y0 + r.side);
        const std::size_t x1 = std::min(fm.width(), r.x0 + r.side);
        for (std::size_t y = r.y0; y < y1; ++y)
            for (std::size_t x = r.x0; x < x1; ++x)
                for (std::size_t c = 0; c < C; ++c) region_max[c] = std::max<double>(region_max[c], fm.at(y, x, c));
        double sq = 0.0;
        for (double v : region_max) sq += v * v;
        if (!(sq > 0.0)) continue;  // an all-zero region has no direction
        const double inv = 1.0 / std::sqrt(sq);
        for (std::size_t c = 0; c < C; ++c) sum[c] += region_max[c] * inv;
    }
    return sum;
}

}  // namespace raw

Descriptor avg_pool(const FeatureMap& fm) { return l2_normalize(raw::average(fm)); }
Descriptor max_pool(const FeatureMap& fm) { return l2_normalize(raw::max(fm)); }
Descriptor pmp_pool(const FeatureMap& fm, double ratio) { return l2_normalize(raw::pmp(fm, ratio)); }
Descriptor gem_pool(const FeatureMap& fm, double p) { return l2_normalize(raw::gem(fm, p)); }
Descriptor adacow_pool(const FeatureMap& fm) { return l2_normalize(raw::adacow(fm)); }
Descriptor rmac_pool(const FeatureMap& fm, std::size_t num_scales) { return l2_normalize(raw::rmac(fm, num_scales)); }

Descriptor pool(const FeatureMap& fm, const PoolingOptions& options) {
    switch (options.method) {
        case PoolingMethod::average: return avg_pool(fm);
        case PoolingMethod::max: return max_pool(fm);
        case PoolingMethod::pmp: return pmp_pool(fm, options.pmp_ratio);
        case PoolingMethod::gem: return gem_pool(fm, options.gem_p);
        case PoolingMethod::adacow: return adacow_pool(fm);
        case PoolingMethod::rmac: return rmac_pool(fm, options.rmac_scales);
    }
    throw ParameterError("unknown pooling method");
}

Descriptor multiscale_merge(std::span<const Descriptor> descs) {
    if (descs.empty()) throw ParameterError("multi-scale merge needs at least one descriptor");
    const std::size_t d = descs.front().dim();
    std::vector<double> mean(d, 0.0);
    for (const Descriptor& desc : descs) {
        if (desc.dim() != d) throw DimensionError("multi-scale descriptors differ in dimension");
        for (std::size_t i = 0; i < d; ++i) mean[i] += desc[i];
    }
    for (double& v : mean) v /= static_cast<double>(descs.size());
    return l2_normalize(mean);
}

}  // namespace refinder
