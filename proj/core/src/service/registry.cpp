#include "refinder/service/registry.hpp"

#include <bit>
#include <cstdio>
#include <mutex>

#include "refinder/errors.hpp"
#include "refinder/io/containers.hpp"

namespace refinder {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h) noexcept {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

std::uint64_t hash_field(std::uint64_t h, std::string_view s) {
    // Length prefix keeps field boundaries unambiguous.
    const std::string len = std::to_string(s.size()) + ":";
    return fnv1a(s, fnv1a(len, h));
}

std::string make_handle(const std::string& name, std::uint64_t hash) {
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(hash));
    return name + "-" + hex;
}

}  // namespace

std::shared_ptr<const Dataset> DatasetRegistry::ingest(const DatasetManifest& manifest) {
    std::uint64_t h = hash_field(0xcbf29ce484222325ULL, manifest.name);
    h = hash_field(h, read_file_bytes(manifest.descriptor_file));
    h = hash_field(h, read_file_bytes(manifest.metadata_file));
    {
        std::shared_lock lock(mutex_);
        auto it = datasets_.find(make_handle(manifest.name, h));
        if (it != datasets_.end()) return it->second;
    }
    return insert(manifest.name, h, load_entries(manifest));
}

std::shared_ptr<const Dataset> DatasetRegistry::add(const std::string& name, std::vector<CorpusEntry> entries) {
    std::uint64_t h = hash_field(0xcbf29ce484222325ULL, name);
    for (const auto& e : entries) {
        h = hash_field(h, e.image_id);
        h = hash_field(h, e.image_uri);
        for (const auto& l : e.labels) h = hash_field(h, l);
        h = hash_field(h, "|");
        for (float v : e.values) {
            const auto bits = std::bit_cast<std::uint32_t>(v);
            const char b[4] = {static_cast<char>(bits), static_cast<char>(bits >> 8), static_cast<char>(bits >> 16),
                               static_cast<char>(bits >> 24)};
            h = fnv1a(std::string_view(b, 4), h);
        }
    }
    {
        std::shared_lock lock(mutex_);
        auto it = datasets_.find(make_handle(name, h));
        if (it != datasets_.end()) return it->second;
    }
    return insert(name, h, std::move(entries));
}

std::shared_ptr<const Dataset> DatasetRegistry::insert(const std::string& name, std::uint64_t hash,
                                                       std::vector<CorpusEntry> entries) {
    if (name.empty()) throw ValidationError("dataset name must not be empty");
    auto ds = std::make_shared<Dataset>(Dataset{make_handle(name, hash), name, hash, build_index(std::move(entries)),
                                                nullptr, {}});
    try {
        ds->background = std::make_shared<const BackgroundStats>(BackgroundStats::compute(ds->index, shrinkage_scale_));
    } catch (const ConditioningError& e) {
        ds->background_error = e.what();
    }
    std::unique_lock lock(mutex_);
    auto [it, inserted] = datasets_.emplace(ds->handle, ds);
    return it->second;
}

std::shared_ptr<const Dataset> DatasetRegistry::get(const std::string& key) const {
    std::shared_lock lock(mutex_);
    if (auto it = datasets_.find(key); it != datasets_.end()) return it->second;
    std::shared_ptr<const Dataset> match;
    for (const auto& [handle, ds] : datasets_) {
        if (ds->name != key) continue;
        if (match) throw NotFoundError("dataset name '" + key + "' is ambiguous; use its handle");
        match = ds;
    }
    if (!match) throw NotFoundError("unknown dataset '" + key + "'");
    return match;
}

std::vector<std::shared_ptr<const Dataset>> DatasetRegistry::list() const {
    std::shared_lock lock(mutex_);
    std::vector<std::shared_ptr<const Dataset>> out;
    for (const auto& [handle, ds] : datasets_) out.push_back(ds);
    return out;
}

}  // namespace refinder
