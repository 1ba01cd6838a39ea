// Batch driver over the C API: transform, conflict, corrupt, metrics.

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cuedecomp/cuedecomp.h"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void check(cd_status s, const std::string& what)
{
    if (s != CD_OK) throw Failure(what + ": " + cd_status_name(s) + ": " + cd_last_error());
}

std::string take(char* s)
{
    std::string out = s ? s : "";
    cd_string_free(s);
    return out;
}

struct ImageFree {
    void operator()(cd_image* p) const { cd_image_free(p); }
};
struct MaskFree {
    void operator()(cd_mask* p) const { cd_mask_free(p); }
};
struct ManifestFree {
    void operator()(cd_manifest* p) const { cd_manifest_free(p); }
};
struct TableFree {
    void operator()(cd_table* p) const { cd_table_free(p); }
};
using ImagePtr = std::unique_ptr<cd_image, ImageFree>;
using MaskPtr = std::unique_ptr<cd_mask, MaskFree>;
using ManifestPtr = std::unique_ptr<cd_manifest, ManifestFree>;
using TablePtr = std::unique_ptr<cd_table, TableFree>;

ImagePtr load_image(const std::string& path)
{
    cd_image* p = nullptr;
    check(cd_image_load(path.c_str(), &p), "loading " + path);
    return ImagePtr(p);
}

MaskPtr load_mask(const std::string& path)
{
    cd_mask* p = nullptr;
    check(cd_mask_load(path.c_str(), &p), "loading mask " + path);
    return MaskPtr(p);
}

ManifestPtr read_manifest(const std::string& path)
{
    cd_manifest* p = nullptr;
    check(cd_manifest_read(path.c_str(), &p), "reading manifest " + path);
    return ManifestPtr(p);
}

std::vector<json> manifest_entries(const cd_manifest* m)
{
    size_t n = 0;
    check(cd_manifest_size(m, &n), "manifest");
    std::vector<json> out;
    for (size_t i = 0; i < n; ++i) {
        char* s = nullptr;
        check(cd_manifest_entry(m, i, &s), "manifest entry");
        out.push_back(json::parse(take(s)));
    }
    return out;
}

void write_manifest(const std::vector<json>& entries, const std::string& path)
{
    cd_manifest* p = nullptr;
    check(cd_manifest_new(&p), "manifest");
    ManifestPtr m(p);
    for (const auto& e : entries) check(cd_manifest_append(m.get(), e.dump().c_str()), "manifest entry");
    check(cd_manifest_write(m.get(), path.c_str()), "writing " + path);
}

void write_text(const fs::path& path, const std::string& text)
{
    fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".part";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Failure("cannot write " + path.string());
        out << text;
        if (!out) throw Failure("write failed: " + path.string());
    }
    fs::rename(tmp, path);
}

std::string read_text(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Failure("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// File stem for a sample id; anything outside [A-Za-z0-9._-] becomes '_'.
std::string file_stem(const std::string& id)
{
    std::string s = id;
    for (char& c : s)
        if (!(std::isalnum((unsigned char)c) || c == '.' || c == '_' || c == '-')) c = '_';
    if (s.empty() || s == "." || s == "..") s = "_" + s;
    return s;
}

std::vector<std::string> stems(const std::vector<json>& entries, const char* id_field = "sample_id")
{
    std::vector<std::string> out;
    std::map<std::string, std::string> seen;
    for (const auto& e : entries) {
        const std::string id = e[id_field].get<std::string>();
        std::string s = file_stem(id);
        auto [it, fresh] = seen.emplace(s, id);
        if (!fresh) throw Failure("sample ids '" + it->second + "' and '" + id + "' map to the same file name");
        out.push_back(s);
    }
    return out;
}

// ---- config ----

json default_config()
{
    char* s = nullptr;
    check(cd_default_config(&s), "default config");
    return json::parse(take(s));
}

// Keys of a user config must exist in the defaults; model_groups is free-form.
void check_keys(const json& user, const json& ref, const std::string& path)
{
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string k = it.key();
        const std::string p = path.empty() ? k : path + "." + k;
        if (path.empty() && k == "command") continue;
        if (!ref.contains(k)) throw Failure("config: unknown key '" + p + "'");
        if (k == "model_groups") continue;
        if (it.value().is_object() && ref[k].is_object()) check_keys(it.value(), ref[k], p);
    }
}

json resolve_config(const std::string& config_path)
{
    json cfg = default_config();
    if (!config_path.empty()) {
        json user;
        try {
            user = json::parse(read_text(config_path));
        } catch (const json::parse_error& e) {
            throw Failure("config " + config_path + ": " + e.what());
        }
        if (!user.is_object()) throw Failure("config " + config_path + ": not a JSON object");
        check_keys(user, cfg, "");
        user.erase("command");
        cfg.merge_patch(user);
    }
    return cfg;
}

int worker_count(int flag)
{
    if (flag > 0) return flag;
    if (const char* env = std::getenv("CUEDECOMP_WORKERS")) {
        try {
            int n = std::stoi(env);
            if (n > 0) return n;
        } catch (...) {
        }
        std::cerr << "cuedecomp: ignoring CUEDECOMP_WORKERS='" << env << "'\n";
    }
    return int(std::max(1u, std::thread::hardware_concurrency()));
}

// Runs job(i) for i in [0, n) on `workers` threads; returns one error string per failed item.
std::vector<std::optional<std::string>> parallel_map(std::size_t n, int workers,
                                                     const std::function<void(std::size_t)>& job)
{
    std::vector<std::optional<std::string>> errors(n);
    std::atomic<std::size_t> next{0};
    auto run = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                job(i);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    const int t = int(std::min<std::size_t>(std::size_t(std::max(1, workers)), std::max<std::size_t>(n, 1)));
    std::vector<std::thread> pool;
    for (int k = 1; k < t; ++k) pool.emplace_back(run);
    run();
    for (auto& th : pool) th.join();
    return errors;
}

int report(const std::vector<std::optional<std::string>>& errors, const std::vector<std::string>& ids)
{
    int failed = 0;
    for (std::size_t i = 0; i < errors.size(); ++i)
        if (errors[i]) {
            ++failed;
            std::cerr << "cuedecomp: " << ids[i] << ": " << *errors[i] << "\n";
        }
    if (failed) std::cerr << "cuedecomp: " << failed << " of " << errors.size() << " item(s) failed\n";
    return failed ? 1 : 0;
}

struct Common {
    std::string in;
    std::string out;
    std::optional<std::uint64_t> seed;
    int workers = 0;
    std::string config;
};

void add_common(CLI::App* app, Common& c, bool needs_in)
{
    auto* opt = app->add_option("--in", c.in, "input manifest (JSON lines)");
    if (needs_in) opt->required();
    app->add_option("--out", c.out, "output directory")->required();
    app->add_option("--seed", c.seed, "master seed (default from config)");
    app->add_option("--workers", c.workers, "worker threads (default $CUEDECOMP_WORKERS or all cores)");
    app->add_option("--config", c.config, "JSON config overriding the shipped defaults");
}

std::uint64_t seed_of(json& cfg, const Common& c)
{
    if (c.seed) cfg["seed"] = *c.seed;
    return cfg["seed"].get<std::uint64_t>();
}

// ---- preprocessing ----

struct Geometry {
    int mode = 0, rw = 0, rh = 0, cw = 0, ch = 0;
    bool identity() const { return mode == 0 && cw == 0 && ch == 0; }
};

bool parse_size(const std::string& s, int& w, int& h)
{
    const auto x = s.find('x');
    if (x == std::string::npos) return false;
    try {
        w = std::stoi(s.substr(0, x));
        h = std::stoi(s.substr(x + 1));
    } catch (...) {
        return false;
    }
    return w > 0 && h > 0;
}

struct GeometryFlags {
    std::string resize, crop;
    int shorter = 0;
};

void add_geometry(CLI::App* app, GeometryFlags& g)
{
    app->add_option("--resize", g.resize, "bilinear resize to WxH before processing");
    app->add_option("--shorter-side", g.shorter, "resize so the shorter side has this length");
    app->add_option("--crop", g.crop, "centre crop WxH after resizing");
}

Geometry geometry(json& cfg, const GeometryFlags& f)
{
    json& p = cfg["preprocess"];
    int w = 0, h = 0;
    if (!f.resize.empty()) {
        if (!parse_size(f.resize, w, h)) throw Failure("--resize expects WxH");
        p["resize"] = "fixed";
        p["width"] = w;
        p["height"] = h;
    }
    if (f.shorter > 0) {
        if (!f.resize.empty()) throw Failure("--resize and --shorter-side are exclusive");
        p["resize"] = "shorter_side";
        p["shorter"] = f.shorter;
    }
    if (!f.crop.empty()) {
        if (!parse_size(f.crop, w, h)) throw Failure("--crop expects WxH");
        p["crop_width"] = w;
        p["crop_height"] = h;
    }
    Geometry g;
    const std::string mode = p["resize"].get<std::string>();
    if (mode == "fixed") {
        g.mode = 1;
        g.rw = p["width"].get<int>();
        g.rh = p["height"].get<int>();
    } else if (mode == "shorter_side") {
        g.mode = 2;
        g.rw = p["shorter"].get<int>();
    } else if (mode != "none") {
        throw Failure("preprocess.resize must be none, fixed or shorter_side");
    }
    g.cw = p["crop_width"].get<int>();
    g.ch = p["crop_height"].get<int>();
    return g;
}

ImagePtr prepare(ImagePtr img, const Geometry& g)
{
    if (g.identity()) return img;
    cd_image* p = nullptr;
    check(cd_image_resize_center_crop(img.get(), g.mode, g.rw, g.rh, g.cw, g.ch, &p), "resize/crop");
    return ImagePtr(p);
}

MaskPtr prepare(MaskPtr m, const Geometry& g)
{
    if (g.identity() || !m) return m;
    cd_mask* p = nullptr;
    check(cd_mask_resize_center_crop(m.get(), g.mode, g.rw, g.rh, g.cw, g.ch, &p), "resize/crop mask");
    return MaskPtr(p);
}

void save(const cd_image* img, const fs::path& path)
{
    check(cd_image_save(img, path.string().c_str()), "saving " + path.string());
}

void save(const cd_mask* m, const fs::path& path)
{
    check(cd_mask_save(m, path.string().c_str()), "saving " + path.string());
}

void write_resolved(const fs::path& out, json cfg, const json& command)
{
    cfg["command"] = command;
    write_text(out / "config.json", cfg.dump(2) + "\n");
}

// ---- transform ----

struct TransformArgs {
    Common c;
    GeometryFlags g;
    std::string method;
    std::string eed_in;
    std::string preset;
    std::optional<int> steps, kernel_size, sites, patches, half_diag;
    std::optional<double> kappa, tau, sigma, intensity_range;
};

const std::map<std::string, std::string> method_variant = {
    {"eed", "eed"},         {"voronoi", "voronoi"}, {"patch", "patch"},
    {"diamond", "diamond"}, {"tex-eed", "tex_eed"}, {"tex-eed-patch", "tex_eed_patch"},
};

cd_eed_params eed_params(const json& e)
{
    cd_eed_params p;
    cd_eed_params_default(&p);
    p.kappa = e["kappa"].get<double>();
    p.presmooth_kernel_size = e["presmooth_kernel_size"].get<int>();
    p.presmooth_sigma = e["presmooth_sigma"].get<double>();
    p.steps = e["steps"].get<int>();
    p.tau = e["tau"].get<double>();
    p.intensity_range = e["intensity_range"].get<double>();
    return p;
}

int cmd_transform(TransformArgs& a)
{
    json cfg = resolve_config(a.c.config);
    const std::uint64_t seed = seed_of(cfg, a.c);
    const std::string variant = method_variant.at(a.method);
    if (!a.preset.empty()) {
        if (!cfg["eed_presets"].contains(a.preset)) throw Failure("unknown EED preset '" + a.preset + "'");
        for (auto& [k, v] : cfg["eed_presets"][a.preset].items()) cfg["eed"][k] = v;
    }
    json& e = cfg["eed"];
    if (a.steps) e["steps"] = *a.steps;
    if (a.kappa) e["kappa"] = *a.kappa;
    if (a.tau) e["tau"] = *a.tau;
    if (a.sigma) e["presmooth_sigma"] = *a.sigma;
    if (a.kernel_size) e["presmooth_kernel_size"] = *a.kernel_size;
    if (a.intensity_range) e["intensity_range"] = *a.intensity_range;
    if (a.sites) cfg["voronoi"]["sites"] = *a.sites;
    if (a.patches) {
        cfg["patch"]["patches_per_side"] = *a.patches;
        cfg["tex_eed_patch"]["patches_per_side"] = *a.patches;
    }
    if (a.half_diag) cfg["diamond"]["half_diag"] = *a.half_diag;
    const Geometry geo = geometry(cfg, a.g);
    const cd_eed_params ep = eed_params(cfg["eed"]);
    const int sites = cfg["voronoi"]["sites"].get<int>();
    const int patches = cfg["patch"]["patches_per_side"].get<int>();
    const int tex_patches = cfg["tex_eed_patch"]["patches_per_side"].get<int>();
    const int half_diag = cfg["diamond"]["half_diag"].get<int>();

    ManifestPtr in = read_manifest(a.c.in);
    const auto entries = manifest_entries(in.get());
    const auto names = stems(entries);
    std::map<std::string, std::string> eed_images;
    if (!a.eed_in.empty()) {
        if (a.method != "tex-eed" && a.method != "tex-eed-patch") throw Failure("--eed-in only applies to tex-eed methods");
        ManifestPtr em = read_manifest(a.eed_in);
        for (const auto& x : manifest_entries(em.get()))
            eed_images[x["sample_id"].get<std::string>()] = x["image"].get<std::string>();
    }

    const fs::path out(a.c.out);
    fs::create_directories(out);
    std::vector<json> result(entries.size());
    std::vector<std::string> ids;
    for (const auto& x : entries) ids.push_back(x["sample_id"].get<std::string>());

    const int workers = worker_count(a.c.workers);
    auto errors = parallel_map(entries.size(), workers, [&](std::size_t i) {
        const json& src = entries[i];
        const std::string& id = ids[i];
        const std::string key = id + "/" + variant;
        ImagePtr img = prepare(load_image(src["image"].get<std::string>()), geo);
        MaskPtr mask;
        if (src.contains("mask")) mask = prepare(load_mask(src["mask"].get<std::string>()), geo);

        cd_image* res = nullptr;
        cd_mask* mres = nullptr;
        char* prov = nullptr;
        if (a.method == "eed") {
            check(cd_eed(img.get(), &ep, &res), "eed");
        } else if (a.method == "voronoi") {
            check(cd_voronoi_shuffle(img.get(), mask.get(), sites, seed, key.c_str(), &res, mask ? &mres : nullptr, &prov),
                  "voronoi");
        } else if (a.method == "patch") {
            check(cd_patch_shuffle(img.get(), mask.get(), patches, seed, key.c_str(), &res, mask ? &mres : nullptr, &prov),
                  "patch");
        } else if (a.method == "diamond") {
            check(cd_diamond_shuffle(img.get(), mask.get(), half_diag, seed, key.c_str(), &res, mask ? &mres : nullptr,
                                     &prov),
                  "diamond");
        } else {
            ImagePtr eed_img;
            if (!a.eed_in.empty()) {
                auto it = eed_images.find(id);
                if (it == eed_images.end()) throw Failure("no EED image for this sample in " + a.eed_in);
                eed_img = load_image(it->second);
            } else {
                cd_image* p = nullptr;
                check(cd_eed(img.get(), &ep, &p), "eed");
                eed_img.reset(p);
            }
            if (a.method == "tex-eed")
                check(cd_tex_eed(img.get(), eed_img.get(), &res), "tex-eed");
            else
                check(cd_tex_eed_patched(img.get(), eed_img.get(), tex_patches, seed, key.c_str(), &res, &prov),
                      "tex-eed-patch");
        }
        ImagePtr result_img(res);
        MaskPtr result_mask(mres);
        std::string provenance = take(prov);

        json entry = src;
        const fs::path image_path = out / "images" / (names[i] + ".png");
        save(result_img.get(), image_path);
        entry["image"] = fs::absolute(image_path).lexically_normal().string();
        if (result_mask) {
            const fs::path mask_path = out / "masks" / (names[i] + ".png");
            save(result_mask.get(), mask_path);
            entry["mask"] = fs::absolute(mask_path).lexically_normal().string();
        } else if (mask && !geo.identity()) {
            const fs::path mask_path = out / "masks" / (names[i] + ".png");
            save(mask.get(), mask_path);
            entry["mask"] = fs::absolute(mask_path).lexically_normal().string();
        }
        entry["variant"] = variant;
        if (!provenance.empty()) {
            json p = json::parse(provenance);
            json doc;
            doc["sample_id"] = id;
            doc["method"] = a.method;
            doc["seed"] = seed;
            doc["stream_key"] = key;
            for (auto& [k, v] : p.items()) doc[k] = v;
            const std::string rel = "provenance/" + names[i] + ".json";
            write_text(out / rel, doc.dump() + "\n");
            entry["provenance"] = rel;
        }
        result[i] = std::move(entry);
    });

    std::vector<json> ok;
    for (std::size_t i = 0; i < result.size(); ++i)
        if (!errors[i]) ok.push_back(result[i]);
    write_manifest(ok, (out / "manifest.jsonl").string());
    json command = {{"name", "transform"}, {"method", a.method}, {"in", a.c.in}};
    if (!a.eed_in.empty()) command["eed_in"] = a.eed_in;
    write_resolved(out, cfg, command);
    std::cerr << "cuedecomp: transform " << a.method << ": " << ok.size() << "/" << entries.size() << " sample(s), "
              << workers << " worker(s)\n";
    return report(errors, ids);
}

// ---- conflict ----

struct ConflictArgs {
    Common c;
    std::string shape, texture, pairing, mode;
    std::optional<double> gamma_s, gamma_t;
    bool derangement = false;
};

std::vector<json> read_pairing_override(const std::string& path, const std::map<std::string, json>& shapes,
                                        const std::map<std::string, json>& textures)
{
    std::vector<json> out;
    std::istringstream in(read_text(path));
    std::string line;
    for (int no = 1; std::getline(in, line); ++no) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string at = path + ":" + std::to_string(no) + ": ";
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw Failure(at + "invalid JSON: " + e.what());
        }
        if (!j.contains("shape_id") || !j.contains("texture_id")) throw Failure(at + "needs shape_id and texture_id");
        const std::string s = j["shape_id"].get<std::string>(), t = j["texture_id"].get<std::string>();
        if (!shapes.count(s)) throw Failure(at + "unknown shape sample '" + s + "'");
        if (!textures.count(t)) throw Failure(at + "unknown texture sample '" + t + "'");
        auto label = [](const json& e) -> json {
            if (!e.contains("label")) return nullptr;
            return e["label"].is_string() ? e["label"] : json(e["label"].dump());
        };
        json p = {{"shape_id", s},
                  {"texture_id", t},
                  {"shape_class", j.contains("shape_class") ? j["shape_class"] : label(shapes.at(s))},
                  {"texture_class", j.contains("texture_class") ? j["texture_class"] : label(textures.at(t))}};
        out.push_back(p);
    }
    return out;
}

int cmd_conflict(ConflictArgs& a)
{
    json cfg = resolve_config(a.c.config);
    const std::uint64_t seed = seed_of(cfg, a.c);
    json& cc = cfg["conflict"];
    if (!a.mode.empty()) cc["mode"] = a.mode;
    if (a.gamma_s) cc["gamma_s"] = *a.gamma_s;
    if (a.gamma_t) cc["gamma_t"] = *a.gamma_t;
    if (a.derangement) cc["derangement"] = true;
    const std::string mode = cc["mode"].get<std::string>();
    const double gs = cc["gamma_s"].get<double>(), gt = cc["gamma_t"].get<double>();

    ManifestPtr sm = read_manifest(a.shape), tm = read_manifest(a.texture);
    std::map<std::string, json> shapes, textures;
    for (auto& e : manifest_entries(sm.get())) shapes[e["sample_id"].get<std::string>()] = e;
    for (auto& e : manifest_entries(tm.get())) textures[e["sample_id"].get<std::string>()] = e;

    std::vector<json> pairs;
    if (!a.pairing.empty()) {
        pairs = read_pairing_override(a.pairing, shapes, textures);
    } else {
        char* s = nullptr;
        check(cd_build_pairing(sm.get(), tm.get(), seed, "conflict/pairing", cc["derangement"].get<bool>() ? 1 : 0, &s),
              "pairing");
        for (auto& p : json::parse(take(s))) pairs.push_back(p);
    }
    std::vector<std::string> ids;
    std::vector<json> id_rows;
    for (const auto& p : pairs) {
        ids.push_back(p["shape_id"].get<std::string>() + "+" + p["texture_id"].get<std::string>());
        id_rows.push_back({{"sample_id", ids.back()}});
    }
    const auto names = stems(id_rows);

    const fs::path out(a.c.out);
    fs::create_directories(out);
    std::vector<json> result(pairs.size());
    const int workers = worker_count(a.c.workers);
    auto errors = parallel_map(pairs.size(), workers, [&](std::size_t i) {
        const json& p = pairs[i];
        ImagePtr s = load_image(shapes.at(p["shape_id"].get<std::string>())["image"].get<std::string>());
        ImagePtr t = load_image(textures.at(p["texture_id"].get<std::string>())["image"].get<std::string>());
        cd_image* r = nullptr;
        check(cd_compose(s.get(), t.get(), mode.c_str(), gs, gt, &r), "compose");
        ImagePtr res(r);
        const fs::path image_path = out / "images" / (names[i] + ".png");
        save(res.get(), image_path);
        json e;
        e["sample_id"] = ids[i];
        e["image"] = fs::absolute(image_path).lexically_normal().string();
        if (!p["shape_class"].is_null()) e["label"] = p["shape_class"];
        e["variant"] = "conflict";
        e["shape_id"] = p["shape_id"];
        e["texture_id"] = p["texture_id"];
        e["shape_class"] = p["shape_class"];
        e["texture_class"] = p["texture_class"];
        result[i] = std::move(e);
    });
    std::vector<json> ok;
    for (std::size_t i = 0; i < result.size(); ++i)
        if (!errors[i]) ok.push_back(result[i]);
    write_manifest(ok, (out / "manifest.jsonl").string());
    json command = {{"name", "conflict"}, {"shape", a.shape}, {"texture", a.texture}};
    if (!a.pairing.empty()) command["pairing"] = a.pairing;
    write_resolved(out, cfg, command);
    std::cerr << "cuedecomp: conflict: " << ok.size() << "/" << pairs.size() << " composite(s), " << workers
              << " worker(s)\n";
    return report(errors, ids);
}

// ---- corrupt ----

struct CorruptArgs {
    Common c;
    GeometryFlags g;
    std::string kind, noise_mode;
    std::vector<double> grid;
};

int cmd_corrupt(CorruptArgs& a)
{
    json cfg = resolve_config(a.c.config);
    const std::uint64_t seed = seed_of(cfg, a.c);
    json& cc = cfg["corrupt"];
    if (!cc["grids"].contains(a.kind)) throw Failure("unknown corruption kind '" + a.kind + "'");
    if (!a.grid.empty()) cc["grids"][a.kind] = a.grid;
    if (!a.noise_mode.empty()) cc["noise_mode"] = a.noise_mode;
    const auto grid = cc["grids"][a.kind].get<std::vector<double>>();
    if (grid.empty()) throw Failure("empty intensity grid");
    const std::string noise_mode = cc["noise_mode"].get<std::string>();
    const Geometry geo = geometry(cfg, a.g);

    ManifestPtr in = read_manifest(a.c.in);
    const auto entries = manifest_entries(in.get());
    const auto names = stems(entries);
    std::vector<std::string> tags, dirs;
    std::set<std::string> seen;
    for (double v : grid) {
        char* t = nullptr;
        check(cd_corruption_tag(a.kind.c_str(), v, &t), "grid");
        tags.push_back(take(t));
        if (!seen.insert(tags.back()).second) throw Failure("duplicate grid point " + tags.back());
        dirs.push_back(file_stem(a.kind + "_" + tags.back().substr(tags.back().rfind(':') + 1)));
    }

    const fs::path out(a.c.out);
    fs::create_directories(out);
    const std::size_t n = entries.size(), m = grid.size();
    std::vector<json> result(n * m);
    std::vector<std::string> ids;
    for (std::size_t g = 0; g < m; ++g)
        for (const auto& e : entries) ids.push_back(e["sample_id"].get<std::string>() + " @ " + tags[g]);
    const int workers = worker_count(a.c.workers);
    auto errors = parallel_map(n * m, workers, [&](std::size_t k) {
        const std::size_t g = k / n, i = k % n;
        const json& src = entries[i];
        const std::string id = src["sample_id"].get<std::string>();
        ImagePtr img = prepare(load_image(src["image"].get<std::string>()), geo);
        cd_image* r = nullptr;
        check(cd_corrupt(img.get(), a.kind.c_str(), grid[g], noise_mode.c_str(), seed, id.c_str(), &r), "corrupt");
        ImagePtr res(r);
        json e = src;
        const fs::path image_path = out / dirs[g] / "images" / (names[i] + ".png");
        save(res.get(), image_path);
        e["image"] = fs::absolute(image_path).lexically_normal().string();
        if (src.contains("mask") && !geo.identity()) {
            MaskPtr mask = prepare(load_mask(src["mask"].get<std::string>()), geo);
            const fs::path mask_path = out / dirs[g] / "masks" / (names[i] + ".png");
            save(mask.get(), mask_path);
            e["mask"] = fs::absolute(mask_path).lexically_normal().string();
        }
        e["variant"] = tags[g];
        result[k] = std::move(e);
    });
    for (std::size_t g = 0; g < m; ++g) {
        std::vector<json> ok;
        for (std::size_t i = 0; i < n; ++i)
            if (!errors[g * n + i]) ok.push_back(result[g * n + i]);
        write_manifest(ok, (out / dirs[g] / "manifest.jsonl").string());
    }
    json index = json::array();
    for (std::size_t g = 0; g < m; ++g)
        index.push_back({{"intensity", grid[g]}, {"variant", tags[g]}, {"manifest", dirs[g] + "/manifest.jsonl"}});
    write_text(out / "sweep.json", index.dump(2) + "\n");
    write_resolved(out, cfg, {{"name", "corrupt"}, {"kind", a.kind}, {"in", a.c.in}});
    std::cerr << "cuedecomp: corrupt " << a.kind << ": " << n << " sample(s) x " << m << " intensities, " << workers
              << " worker(s)\n";
    return report(errors, ids);
}

// ---- metrics ----

struct MetricsArgs {
    Common c;
    std::vector<std::string> logs;
    std::string qualities, robustness;
    std::vector<std::string> exclude_models, exclude_groups, spearman;
    bool no_exclude = false;
};

int cmd_metrics(MetricsArgs& a)
{
    json cfg = resolve_config(a.c.config);
    if (a.c.seed) cfg["seed"] = *a.c.seed;
    json& mc = cfg["metrics"];
    if (a.no_exclude) {
        mc["exclude_models"] = json::array();
        mc["exclude_groups"] = json::array();
    }
    for (const auto& m : a.exclude_models) mc["exclude_models"].push_back(m);
    for (const auto& g : a.exclude_groups) mc["exclude_groups"].push_back(g);
    if (!a.robustness.empty()) mc["robustness"] = a.robustness;
    if (a.logs.empty() == a.qualities.empty()) throw Failure("give either --logs or --qualities");
    if (a.spearman.size() % 2) throw Failure("--spearman takes column pairs");

    const std::string mcfg = mc.dump();
    cd_table* t = nullptr;
    if (!a.qualities.empty()) {
        check(cd_table_from_qualities(a.qualities.c_str(), mcfg.c_str(), &t), "metrics");
    } else {
        std::vector<const char*> paths;
        for (const auto& p : a.logs) paths.push_back(p.c_str());
        check(cd_table_from_logs(paths.data(), paths.size(), mcfg.c_str(), &t), "metrics");
    }
    TablePtr table(t);
    char* s = nullptr;
    const fs::path out(a.c.out);
    check(cd_table_csv(table.get(), &s), "table");
    write_text(out / "table.csv", take(s));
    check(cd_table_markdown(table.get(), &s), "table");
    write_text(out / "table.md", take(s));
    check(cd_table_metadata(table.get(), &s), "table");
    const json meta = json::parse(take(s));
    write_text(out / "table.meta.json", meta.dump(2) + "\n");
    for (const auto& w : meta["warnings"]) std::cerr << "cuedecomp: warning: " << w.get<std::string>() << "\n";

    if (!a.spearman.empty()) {
        json rho = json::array();
        for (std::size_t i = 0; i < a.spearman.size(); i += 2) {
            double r = 0;
            int defined = 0;
            check(cd_table_spearman(table.get(), a.spearman[i].c_str(), a.spearman[i + 1].c_str(), &r, &defined),
                  "spearman");
            json row = {{"a", a.spearman[i]}, {"b", a.spearman[i + 1]}};
            row["rho"] = defined ? json(r) : json(nullptr);
            rho.push_back(row);
            std::printf("spearman(%s, %s) = %s\n", a.spearman[i].c_str(), a.spearman[i + 1].c_str(),
                        defined ? std::to_string(r).c_str() : "undefined");
        }
        write_text(out / "spearman.json", rho.dump(2) + "\n");
    }
    json command = {{"name", "metrics"}};
    if (!a.logs.empty()) command["logs"] = a.logs;
    if (!a.qualities.empty()) command["qualities"] = a.qualities;
    if (!a.spearman.empty()) command["spearman"] = a.spearman;
    write_resolved(out, cfg, command);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Shape/texture cue decomposition, cue conflict, corruption sweeps and bias metrics"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(cd_version()));

    TransformArgs ta;
    auto* tr = app.add_subcommand("transform", "apply eed, voronoi, patch, diamond, tex-eed or tex-eed-patch");
    add_common(tr, ta.c, true);
    add_geometry(tr, ta.g);
    tr->add_option("--method", ta.method, "transformation")
        ->required()
        ->check(CLI::IsMember({"eed", "voronoi", "patch", "diamond", "tex-eed", "tex-eed-patch"}));
    tr->add_option("--preset", ta.preset, "EED step preset: classification or segmentation");
    tr->add_option("--steps", ta.steps, "EED iterations");
    tr->add_option("--kappa", ta.kappa, "EED contrast parameter");
    tr->add_option("--tau", ta.tau, "EED time step");
    tr->add_option("--sigma", ta.sigma, "EED presmoothing standard deviation");
    tr->add_option("--kernel-size", ta.kernel_size, "EED presmoothing taps (odd)");
    tr->add_option("--intensity-range", ta.intensity_range, "gray scale on which kappa is read");
    tr->add_option("--sites", ta.sites, "Voronoi sites");
    tr->add_option("--patches", ta.patches, "patches per side (patch, tex-eed-patch)");
    tr->add_option("--half-diag", ta.half_diag, "diamond half diagonal in pixels");
    tr->add_option("--eed-in", ta.eed_in, "manifest of precomputed EED images (tex-eed methods)");

    ConflictArgs ca;
    auto* co = app.add_subcommand("conflict", "compose shape and texture images of different classes");
    add_common(co, ca.c, false);
    co->add_option("--shape", ca.shape, "shape-cue manifest")->required();
    co->add_option("--texture", ca.texture, "texture-cue manifest")->required();
    co->add_option("--mode", ca.mode, "blend or sum")->check(CLI::IsMember({"blend", "sum"}));
    co->add_option("--gamma-s", ca.gamma_s, "shape weight");
    co->add_option("--gamma-t", ca.gamma_t, "texture weight");
    co->add_flag("--derangement", ca.derangement, "use every texture sample at most once");
    co->add_option("--pairing", ca.pairing, "JSON lines of {shape_id, texture_id}, used verbatim");

    CorruptArgs ka;
    auto* cr = app.add_subcommand("corrupt", "corruption sweep over an intensity grid");
    add_common(cr, ka.c, true);
    add_geometry(cr, ka.g);
    cr->add_option("--kind", ka.kind, "contrast, highpass, lowpass, noise or phase")->required();
    cr->add_option("--grid", ka.grid, "intensities (default from config)")->delimiter(',');
    cr->add_option("--noise-mode", ka.noise_mode, "uniform or gaussian")->check(CLI::IsMember({"uniform", "gaussian"}));

    MetricsArgs ma;
    auto* me = app.add_subcommand("metrics", "metric table from prediction logs or quality triples");
    add_common(me, ma.c, false);
    me->add_option("--logs", ma.logs, "prediction logs (.jsonl or .csv)");
    me->add_option("--qualities", ma.qualities, "CSV of model_id, q_o, q_s, q_t [, group, cue_conflict, rel_rob_*]");
    me->add_option("--exclude-model", ma.exclude_models, "leave a model out of the normalization");
    me->add_option("--exclude-group", ma.exclude_groups, "leave a group out of the normalization");
    me->add_flag("--no-default-exclusions", ma.no_exclude, "drop the configured exclusions first");
    me->add_option("--robustness", ma.robustness, "ratio or absolute")->check(CLI::IsMember({"ratio", "absolute"}));
    me->add_option("--spearman", ma.spearman, "rank correlation between two columns (repeatable)")
        ->expected(2)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

    auto* df = app.add_subcommand("defaults", "print the built-in default config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2; // --help is not an error
    }
    try {
        if (*tr) return cmd_transform(ta);
        if (*co) return cmd_conflict(ca);
        if (*cr) return cmd_corrupt(ka);
        if (*me) return cmd_metrics(ma);
        if (*df) {
            std::cout << default_config().dump(2) << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "cuedecomp: error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
