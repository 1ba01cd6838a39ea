#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace cuedecomp {

struct ManifestEntry {
    std::string sample_id;
    std::string image;               // resolved path
    std::optional<std::string> mask; // resolved path
    std::optional<std::string> label;
    bool label_numeric = false; // serialize the label back as a JSON number
    std::string variant;
    nlohmann::ordered_json extra = nlohmann::ordered_json::object(); // any other fields, kept verbatim
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    std::string variant_tag; // common variant of all entries, empty if mixed

    const ManifestEntry* find(const std::string& sample_id) const;
};

// JSON lines. Relative paths resolve against the manifest's directory.
DatasetManifest read_manifest(const std::string& path);
DatasetManifest parse_manifest(const std::string& text, const std::string& base_dir, const std::string& name);

// Paths are written relative to the manifest's directory when they live below it.
void write_manifest(const DatasetManifest& m, const std::string& path);
std::string manifest_line(const ManifestEntry& e, const std::string& base_dir);

void check_unique_ids(const DatasetManifest& m);
void set_label(ManifestEntry& e, const nlohmann::json& value);

} // namespace cuedecomp
