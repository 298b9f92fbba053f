#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "refinder/corpus_index.hpp"

namespace refinder {

/// One line of a metadata file: {"id": ..., "image_uri": ..., "labels": [...]}.
struct MetadataRecord {
    std::string id;
    std::string image_uri;
    std::vector<std::string> labels;
};

/// Line-delimited JSON records; blank lines are skipped. IngestError names the line.
std::vector<MetadataRecord> parse_metadata(std::istream& in, const std::string& source = "<stream>");
std::vector<MetadataRecord> read_metadata(const std::filesystem::path& path);
void write_metadata(const std::filesystem::path& path, std::span<const MetadataRecord> records);

struct DatasetManifest {
    std::string name;
    std::filesystem::path descriptor_file;
    std::filesystem::path metadata_file;
    std::optional<std::size_t> dim;    // checked against the container when present
    std::optional<std::size_t> count;

    /// Relative paths are resolved against `base_dir`.
    static DatasetManifest from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
    nlohmann::json to_json() const;
};

DatasetManifest read_manifest(const std::filesystem::path& path);

/// Reads both files and pairs descriptors with metadata records by position.
/// Throws IngestError on a count or dimension mismatch.
std::vector<CorpusEntry> load_entries(const DatasetManifest& manifest);

}  // namespace refinder
