#include "refinder/io/metadata.hpp"

#include <fstream>
#include <istream>

#include "refinder/errors.hpp"
#include "refinder/io/containers.hpp"

namespace refinder {

std::vector<MetadataRecord> parse_metadata(std::istream& in, const std::string& source) {
    std::vector<MetadataRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const std::string where = source + " line " + std::to_string(lineno);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw IngestError(where + ": invalid JSON (" + e.what() + ")");
        }
        if (!j.is_object() || !j.contains("id") || !j["id"].is_string())
            throw IngestError(where + ": record needs a string \"id\"");
        MetadataRecord rec;
        rec.id = j["id"].get<std::string>();
        if (rec.id.empty()) throw IngestError(where + ": empty id");
        if (j.contains("image_uri")) {
            if (!j["image_uri"].is_string()) throw IngestError(where + ": \"image_uri\" must be a string");
            rec.image_uri = j["image_uri"].get<std::string>();
        }
        if (j.contains("labels")) {
            if (!j["labels"].is_array()) throw IngestError(where + ": \"labels\" must be an array");
            for (const auto& l : j["labels"]) {
                if (!l.is_string()) throw IngestError(where + ": labels must be strings");
                rec.labels.push_back(l.get<std::string>());
            }
        }
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<MetadataRecord> read_metadata(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open '" + path.string() + "'");
    return parse_metadata(in, path.string());
}

void write_metadata(const std::filesystem::path& path, std::span<const MetadataRecord> records) {
    std::string text;
    for (const auto& r : records) {
        nlohmann::json j = {{"id", r.id}, {"image_uri", r.image_uri}, {"labels", r.labels}};
        text += j.dump();
        text += '\n';
    }
    write_file_bytes(path, text);
}

DatasetManifest DatasetManifest::from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
    auto field = [&](const char* key) -> std::string {
        if (!doc.is_object() || !doc.contains(key) || !doc[key].is_string())
            throw ValidationError(std::string("manifest needs a string \"") + key + "\"");
        return doc[key].get<std::string>();
    };
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
    };
    DatasetManifest m;
    m.name = field("name");
    if (m.name.empty()) throw ValidationError("manifest name must not be empty");
    m.descriptor_file = resolve(field("descriptor_file"));
    m.metadata_file = resolve(field("metadata_file"));
    for (const char* key : {"dim", "count"}) {
        if (!doc.contains(key)) continue;
        if (!doc[key].is_number_unsigned()) throw ValidationError(std::string("manifest \"") + key + "\" must be a count");
        (std::string(key) == "dim" ? m.dim : m.count) = doc[key].get<std::size_t>();
    }
    return m;
}

nlohmann::json DatasetManifest::to_json() const {
    nlohmann::json j = {{"name", name},
                        {"descriptor_file", descriptor_file.string()},
                        {"metadata_file", metadata_file.string()}};
    if (dim) j["dim"] = *dim;
    if (count) j["count"] = *count;
    return j;
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file_bytes(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("manifest '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return DatasetManifest::from_json(doc, path.parent_path());
}

std::vector<CorpusEntry> load_entries(const DatasetManifest& manifest) {
    const DescriptorBlock block = read_descriptors(manifest.descriptor_file);
    const std::vector<MetadataRecord> records = read_metadata(manifest.metadata_file);
    if (records.size() != block.count)
        throw IngestError("metadata has " + std::to_string(records.size()) + " records for " +
                          std::to_string(block.count) + " descriptors");
    if (manifest.count && *manifest.count != block.count)
        throw IngestError("manifest declares " + std::to_string(*manifest.count) + " items, container holds " +
                          std::to_string(block.count));
    if (manifest.dim && *manifest.dim != block.dim)
        throw IngestError("manifest declares dim " + std::to_string(*manifest.dim) + ", container holds " +
                          std::to_string(block.dim));

    std::vector<CorpusEntry> entries;
    entries.reserve(block.count);
    for (std::size_t i = 0; i < block.count; ++i) {
        auto row = block.row(i);
        entries.push_back({records[i].id, std::vector<float>(row.begin(), row.end()), records[i].labels,
                           records[i].image_uri});
    }
    return entries;
}

}  // namespace refinder
