#include "imagecore/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "common/error.hpp"

namespace cuedecomp {

namespace fs = std::filesystem;
using nlohmann::json;

const ManifestEntry* DatasetManifest::find(const std::string& sample_id) const
{
    for (const auto& e : entries)
        if (e.sample_id == sample_id) return &e;
    return nullptr;
}

void set_label(ManifestEntry& e, const json& value)
{
    if (value.is_null()) {
        e.label.reset();
    } else if (value.is_number_integer() || value.is_number_unsigned()) {
        e.label = std::to_string(value.get<long long>());
        e.label_numeric = true;
    } else if (value.is_string()) {
        e.label = value.get<std::string>();
        e.label_numeric = false;
    } else {
        fail(Errc::schema_error, "label must be an integer or a string");
    }
}

namespace {

std::string resolve(const std::string& p, const std::string& base)
{
    fs::path fp(p);
    if (fp.is_absolute() || base.empty()) return fp.lexically_normal().string();
    return (fs::path(base) / fp).lexically_normal().string();
}

std::string relativize(const std::string& p, const std::string& base)
{
    fs::path b = fs::absolute(base.empty() ? fs::path(".") : fs::path(base)).lexically_normal();
    fs::path rel = fs::absolute(p).lexically_normal().lexically_relative(b);
    if (rel.empty()) return p;
    return rel.generic_string();
}

} // namespace

void check_unique_ids(const DatasetManifest& m)
{
    std::set<std::string> seen;
    for (const auto& e : m.entries)
        if (!seen.insert(e.sample_id).second) fail(Errc::schema_error, "duplicate sample_id '" + e.sample_id + "'");
}

DatasetManifest parse_manifest(const std::string& text, const std::string& base_dir, const std::string& name)
{
    DatasetManifest m;
    std::istringstream in(text);
    std::string line;
    std::set<std::string> seen;
    bool mixed = false;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
        auto at = [&](const std::string& msg) { return name + ":" + std::to_string(lineno) + ": " + msg; };
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::ordered_json j;
        try {
            j = nlohmann::ordered_json::parse(line);
        } catch (const nlohmann::json::exception& ex) {
            fail(Errc::schema_error, at(std::string("invalid JSON: ") + ex.what()));
        }
        if (!j.is_object()) fail(Errc::schema_error, at("record must be a JSON object"));
        ManifestEntry e;
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string& k = it.key();
            const auto& v = it.value();
            if (k == "sample_id" || k == "image" || k == "variant" || k == "mask") {
                if (k == "mask" && v.is_null()) continue;
                if (!v.is_string()) fail(Errc::schema_error, at("field '" + k + "' must be a string"));
                if (k == "sample_id") e.sample_id = v.get<std::string>();
                if (k == "image") e.image = resolve(v.get<std::string>(), base_dir);
                if (k == "variant") e.variant = v.get<std::string>();
                if (k == "mask") e.mask = resolve(v.get<std::string>(), base_dir);
            } else if (k == "label") {
                try {
                    set_label(e, v);
                } catch (const Error& err) {
                    fail(Errc::schema_error, at(err.what()));
                }
            } else {
                e.extra[k] = v;
            }
        }
        if (e.sample_id.empty()) fail(Errc::schema_error, at("missing sample_id"));
        if (e.image.empty()) fail(Errc::schema_error, at("missing image"));
        if (!seen.insert(e.sample_id).second) fail(Errc::schema_error, at("duplicate sample_id '" + e.sample_id + "'"));
        if (m.entries.empty())
            m.variant_tag = e.variant;
        else if (e.variant != m.variant_tag)
            mixed = true;
        m.entries.push_back(std::move(e));
    }
    if (mixed) m.variant_tag.clear();
    return m;
}

DatasetManifest read_manifest(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::io_error, "cannot open manifest " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_manifest(ss.str(), fs::path(path).parent_path().string(), path);
}

std::string manifest_line(const ManifestEntry& e, const std::string& base_dir)
{
    nlohmann::ordered_json j;
    j["sample_id"] = e.sample_id;
    j["image"] = relativize(e.image, base_dir);
    if (e.mask) j["mask"] = relativize(*e.mask, base_dir);
    if (e.label) {
        if (e.label_numeric)
            j["label"] = std::stoll(*e.label);
        else
            j["label"] = *e.label;
    }
    j["variant"] = e.variant;
    for (auto it = e.extra.begin(); it != e.extra.end(); ++it) j[it.key()] = it.value();
    return j.dump();
}

void write_manifest(const DatasetManifest& m, const std::string& path)
{
    check_unique_ids(m);
    std::string base = fs::path(path).parent_path().string();
    std::error_code ec;
    if (!base.empty()) fs::create_directories(base, ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::io_error, "cannot write manifest " + path);
    for (const auto& e : m.entries) out << manifest_line(e, base) << '\n';
    if (!out) fail(Errc::io_error, "write failed: " + path);
}

} // namespace cuedecomp
