#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <vector>

#include "refinder/corpus_index.hpp"
#include "refinder/feedback/background.hpp"
#include "refinder/io/metadata.hpp"

namespace refinder {

struct Dataset {
    std::string handle;  // "<name>-<16 hex digits of the content hash>"
    std::string name;
    std::uint64_t content_hash = 0;
    CorpusIndex index;
    std::shared_ptr<const BackgroundStats> background;  // null when the covariance could not be factorized
    std::string background_error;
};

/// Ingested datasets, immutable once registered and shared read-only.
class DatasetRegistry {
public:
    explicit DatasetRegistry(double shrinkage_scale = BackgroundStats::kDefaultShrinkageScale)
        : shrinkage_scale_(shrinkage_scale) {}

    /// Loads the manifest's files. Identical name and file contents yield the
    /// already registered dataset.
    std::shared_ptr<const Dataset> ingest(const DatasetManifest& manifest);

    /// Registers in-memory entries; the hash covers ids, labels, URIs and values.
    std::shared_ptr<const Dataset> add(const std::string& name, std::vector<CorpusEntry> entries);

    /// Lookup by handle, or by name when exactly one dataset carries it. NotFoundError otherwise.
    std::shared_ptr<const Dataset> get(const std::string& handle_or_name) const;
    std::vector<std::shared_ptr<const Dataset>> list() const;

private:
    std::shared_ptr<const Dataset> insert(const std::string& name, std::uint64_t hash,
                                          std::vector<CorpusEntry> entries);

    double shrinkage_scale_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, std::shared_ptr<const Dataset>> datasets_;
};

/// 64-bit FNV-1a, continued from `h`.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) noexcept;

}  // namespace refinder
