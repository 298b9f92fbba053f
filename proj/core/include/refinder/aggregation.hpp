#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "refinder/descriptor.hpp"

namespace refinder {

/// H x W x C grid of local activations, stored row-major in (y, x, c) order.
class FeatureMap {
public:
    /// Throws ParameterError on zero extents, size mismatch or non-finite values.
    FeatureMap(std::size_t height, std::size_t width, std::size_t channels, std::vector<float> data);

    std::size_t height() const noexcept { return h_; }
    std::size_t width() const noexcept { return w_; }
    std::size_t channels() const noexcept { return c_; }
    std::size_t positions() const noexcept { return h_ * w_; }

    float at(std::size_t y, std::size_t x, std::size_t c) const { return data_[(y * w_ + x) * c_ + c]; }
    /// Activations of all channels at spatial position p = y * W + x.
    std::span<const float> position(std::size_t p) const { return {data_.data() + p * c_, c_}; }
    std::span<const float> data() const noexcept { return data_; }

private:
    std::size_t h_, w_, c_;
    std::vector<float> data_;
};

enum class PoolingMethod { average, pmp, gem, adacow, rmac, max };

struct PoolingOptions {
    PoolingMethod method = PoolingMethod::pmp;
    double pmp_ratio = 0.1;
    double gem_p = 2.0;
    std::size_t rmac_scales = 3;
};

/// Square pooling region [y0, y0 + side) x [x0, x0 + side).
struct Region {
    std::size_t y0, x0, side;
    bool operator==(const Region&) const = default;
};

// Un-normalized pooled vectors, one value per channel.
namespace raw {
std::vector<double> average(const FeatureMap& fm);
std::vector<double> max(const FeatureMap& fm);
std::vector<double> pmp(const FeatureMap& fm, double ratio);
std::vector<double> gem(const FeatureMap& fm, double p);
std::vector<double> adacow(const FeatureMap& fm);
std::vector<double> rmac(const FeatureMap& fm, std::size_t num_scales);
}  // namespace raw

/// Number of activations averaged per channel by PMP: max(1, ceil(ratio * H * W)).
std::size_t pmp_count(std::size_t positions, double ratio);

/// R-MAC region grid. At scale l (1-based) the side is floor(2 min(H, W) / (l + 1));
/// along each axis the regions are spaced evenly with at least 40% overlap.
std::vector<Region> rmac_regions(std::size_t height, std::size_t width, std::size_t num_scales);

Descriptor avg_pool(const FeatureMap& fm);
Descriptor max_pool(const FeatureMap& fm);
Descriptor pmp_pool(const FeatureMap& fm, double ratio = 0.1);
Descriptor gem_pool(const FeatureMap& fm, double p = 2.0);
Descriptor adacow_pool(const FeatureMap& fm);
Descriptor rmac_pool(const FeatureMap& fm, std::size_t num_scales = 3);

Descriptor pool(const FeatureMap& fm, const PoolingOptions& options);

/// Component-wise mean of unit descriptors, re-normalized.
Descriptor multiscale_merge(std::span<const Descriptor> descs);

}  // namespace refinder
