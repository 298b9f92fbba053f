#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "refinder/aggregation.hpp"

namespace refinder {

// Binary containers. All integers are u32 little-endian, all values IEEE-754
// float32 little-endian.
//
//   DESC0001 | count | dim | count * dim floats, row-major
//   FMAP0001 | count | count * (H | W | C | H * W * C floats in (y, x, c) order)

inline constexpr std::string_view kDescriptorMagic = "DESC0001";
inline constexpr std::string_view kFeatureMapMagic = "FMAP0001";

struct DescriptorBlock {
    std::size_t count = 0;
    std::size_t dim = 0;
    std::vector<float> values;  // count * dim

    std::span<const float> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
};

/// Throws IngestError (with the byte offset) on a bad magic, truncation or trailing bytes.
DescriptorBlock parse_descriptors(std::string_view bytes, const std::string& source = "<memory>");
DescriptorBlock read_descriptors(const std::filesystem::path& path);
std::string encode_descriptors(const DescriptorBlock& block);
void write_descriptors(const std::filesystem::path& path, const DescriptorBlock& block);

std::vector<FeatureMap> parse_feature_maps(std::string_view bytes, const std::string& source = "<memory>");
std::vector<FeatureMap> read_feature_maps(const std::filesystem::path& path);
std::string encode_feature_maps(std::span<const FeatureMap> maps);
void write_feature_maps(const std::filesystem::path& path, std::span<const FeatureMap> maps);

/// Whole file as bytes; IngestError if it cannot be opened.
std::string read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::string_view bytes);

}  // namespace refinder
