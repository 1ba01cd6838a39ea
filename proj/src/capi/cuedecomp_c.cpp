#include "cuedecomp/cuedecomp.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <new>
#include <string>

#include <json.hpp>

#include "common/error.hpp"
#include "conflict/conflict.hpp"
#include "corrupt/corrupt.hpp"
#include "eed/eed.hpp"
#include "imagecore/image.hpp"
#include "imagecore/image_io.hpp"
#include "imagecore/manifest.hpp"
#include "imagecore/resize.hpp"
#include "metrics/table.hpp"
#include "shuffle/shuffle.hpp"

using namespace cuedecomp;
namespace fs = std::filesystem;

struct cd_image {
    Image img;
};
struct cd_mask {
    LabelMask mask;
};
struct cd_manifest {
    DatasetManifest m;
};
struct cd_table {
    MetricTable t;
};

namespace {

thread_local std::string last_error;

cd_status to_status(Errc c)
{
    switch (c) {
    case Errc::invalid_argument: return CD_INVALID_ARGUMENT;
    case Errc::io_error: return CD_IO_ERROR;
    case Errc::decode_error: return CD_DECODE_ERROR;
    case Errc::unsupported_bit_depth: return CD_UNSUPPORTED_BIT_DEPTH;
    case Errc::unsupported_format: return CD_UNSUPPORTED_FORMAT;
    case Errc::dimension_mismatch: return CD_DIMENSION_MISMATCH;
    case Errc::out_of_range: return CD_OUT_OF_RANGE;
    case Errc::undefined: return CD_UNDEFINED;
    case Errc::schema_error: return CD_SCHEMA_ERROR;
    case Errc::not_found: return CD_NOT_FOUND;
    }
    return CD_INTERNAL;
}

template <class F>
cd_status guard(F&& f) noexcept
{
    try {
        f();
        return CD_OK;
    } catch (const Error& e) {
        last_error = e.what();
        return to_status(e.code());
    } catch (const nlohmann::json::exception& e) {
        last_error = e.what();
        return CD_SCHEMA_ERROR;
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return CD_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return CD_INTERNAL;
    } catch (...) {
        last_error = "unknown error";
        return CD_INTERNAL;
    }
}

void need(const void* p, const char* what)
{
    if (!p) fail(Errc::invalid_argument, std::string(what) + " is NULL");
}

char* dup(const std::string& s)
{
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

template <class T, class V>
T* wrap(V&& v)
{
    return new T{std::forward<V>(v)};
}

std::string key_of(const char* key)
{
    return key ? std::string(key) : std::string();
}

ResizeSpec resize_spec(int mode, int rw, int rh)
{
    switch (mode) {
    case 0: return ResizeSpec::none();
    case 1: return ResizeSpec::fixed(rw, rh);
    case 2: return ResizeSpec::shorter_side(rw);
    }
    fail(Errc::invalid_argument, "resize mode must be 0, 1 or 2");
}

std::optional<CropSpec> crop_spec(int w, int h)
{
    if (w == 0 && h == 0) return std::nullopt;
    return CropSpec{w, h};
}

nlohmann::ordered_json entry_to_json(const ManifestEntry& e)
{
    nlohmann::ordered_json j;
    j["sample_id"] = e.sample_id;
    j["image"] = fs::absolute(e.image).lexically_normal().string();
    if (e.mask) j["mask"] = fs::absolute(*e.mask).lexically_normal().string();
    if (e.label) {
        if (e.label_numeric)
            j["label"] = std::stoll(*e.label);
        else
            j["label"] = *e.label;
    }
    j["variant"] = e.variant;
    for (auto it = e.extra.begin(); it != e.extra.end(); ++it) j[it.key()] = it.value();
    return j;
}

TableConfig table_config(const char* json)
{
    if (!json || !*json) return {};
    return table_config_from_json(nlohmann::json::parse(json));
}

void shuffle_outputs(const Image& img, const cd_mask* mask, const PixelMap& map, nlohmann::ordered_json prov,
                     cd_image** out, cd_mask** mask_out, char** provenance_json)
{
    Image res = apply_map(img, map);
    std::optional<LabelMask> m;
    if (mask && mask_out) m = apply_map(mask->mask, map);
    std::string p = provenance_json ? prov.dump() : std::string();
    *out = wrap<cd_image>(std::move(res));
    if (mask_out) *mask_out = m ? wrap<cd_mask>(std::move(*m)) : nullptr;
    if (provenance_json) *provenance_json = dup(p);
}

void check_mask(const Image& img, const cd_mask* mask)
{
    if (mask)
        require(mask->mask.width == img.width && mask->mask.height == img.height, Errc::dimension_mismatch,
                "mask is " + std::to_string(mask->mask.width) + "x" + std::to_string(mask->mask.height) +
                    ", image is " + std::to_string(img.width) + "x" + std::to_string(img.height));
}

} // namespace

extern "C" {

const char* cd_version(void)
{
    return "0.1.0";
}

const char* cd_last_error(void)
{
    return last_error.c_str();
}

const char* cd_status_name(cd_status s)
{
    switch (s) {
    case CD_OK: return "ok";
    case CD_INVALID_ARGUMENT: return "invalid_argument";
    case CD_IO_ERROR: return "io_error";
    case CD_DECODE_ERROR: return "decode_error";
    case CD_UNSUPPORTED_BIT_DEPTH: return "unsupported_bit_depth";
    case CD_UNSUPPORTED_FORMAT: return "unsupported_format";
    case CD_DIMENSION_MISMATCH: return "dimension_mismatch";
    case CD_OUT_OF_RANGE: return "out_of_range";
    case CD_UNDEFINED: return "undefined";
    case CD_SCHEMA_ERROR: return "schema_error";
    case CD_NOT_FOUND: return "not_found";
    case CD_INTERNAL: return "internal";
    }
    return "unknown";
}

void cd_string_free(char* s)
{
    std::free(s);
}

cd_status cd_default_config(char** json_out)
{
    return guard([&] {
        need(json_out, "json_out");
        static const char text[] =
#include "defaults_json.inc"
            ;
        *json_out = dup(text);
    });
}

cd_status cd_image_new(int width, int height, int channels, const double* data, cd_image** out)
{
    return guard([&] {
        need(out, "out");
        Image img(width, height, channels);
        if (data) std::copy(data, data + img.data.size(), img.data.begin());
        validate(img);
        *out = wrap<cd_image>(std::move(img));
    });
}

cd_status cd_image_load(const char* path, cd_image** out)
{
    return guard([&] {
        need(path, "path");
        need(out, "out");
        *out = wrap<cd_image>(load_image(path));
    });
}

cd_status cd_image_save(const cd_image* img, const char* path)
{
    return guard([&] {
        need(img, "img");
        need(path, "path");
        save_image(img->img, path);
    });
}

void cd_image_free(cd_image* img)
{
    delete img;
}

cd_status cd_image_info(const cd_image* img, int* width, int* height, int* channels)
{
    return guard([&] {
        need(img, "img");
        if (width) *width = img->img.width;
        if (height) *height = img->img.height;
        if (channels) *channels = img->img.channels;
    });
}

const double* cd_image_data(const cd_image* img)
{
    return img ? img->img.data.data() : nullptr;
}

cd_status cd_mask_new(int width, int height, const int32_t* labels, cd_mask** out)
{
    return guard([&] {
        need(out, "out");
        LabelMask m(width, height);
        if (labels) std::copy(labels, labels + m.labels.size(), m.labels.begin());
        *out = wrap<cd_mask>(std::move(m));
    });
}

cd_status cd_mask_load(const char* path, cd_mask** out)
{
    return guard([&] {
        need(path, "path");
        need(out, "out");
        *out = wrap<cd_mask>(load_mask(path));
    });
}

cd_status cd_mask_save(const cd_mask* mask, const char* path)
{
    return guard([&] {
        need(mask, "mask");
        need(path, "path");
        save_mask(mask->mask, path);
    });
}

void cd_mask_free(cd_mask* mask)
{
    delete mask;
}

cd_status cd_mask_info(const cd_mask* mask, int* width, int* height)
{
    return guard([&] {
        need(mask, "mask");
        if (width) *width = mask->mask.width;
        if (height) *height = mask->mask.height;
    });
}

const int32_t* cd_mask_data(const cd_mask* mask)
{
    return mask ? mask->mask.labels.data() : nullptr;
}

cd_status cd_image_resize_center_crop(const cd_image* img, int resize_mode, int rw, int rh, int crop_w, int crop_h,
                                      cd_image** out)
{
    return guard([&] {
        need(img, "img");
        need(out, "out");
        *out = wrap<cd_image>(resize_center_crop(img->img, resize_spec(resize_mode, rw, rh), crop_spec(crop_w, crop_h)));
    });
}

cd_status cd_mask_resize_center_crop(const cd_mask* mask, int resize_mode, int rw, int rh, int crop_w, int crop_h,
                                     cd_mask** out)
{
    return guard([&] {
        need(mask, "mask");
        need(out, "out");
        *out = wrap<cd_mask>(
            resize_center_crop(mask->mask, resize_spec(resize_mode, rw, rh), crop_spec(crop_w, crop_h)));
    });
}

void cd_eed_params_default(cd_eed_params* p)
{
    if (!p) return;
    const EedParams d;
    *p = {d.kappa, d.presmooth_kernel_size, d.presmooth_sigma, d.steps, d.tau, d.intensity_range};
}

cd_status cd_eed(const cd_image* img, const cd_eed_params* p, cd_image** out)
{
    return guard([&] {
        need(img, "img");
        need(out, "out");
        EedParams params;
        if (p) params = {p->kappa, p->presmooth_kernel_size, p->presmooth_sigma, p->steps, p->tau, p->intensity_range};
        *out = wrap<cd_image>(run_eed(img->img, params));
    });
}

cd_status cd_voronoi_shuffle(const cd_image* img, const cd_mask* mask, int sites, uint64_t seed, const char* key,
                             cd_image** out, cd_mask** mask_out, char** provenance_json)
{
    return guard([&] {
        need(img, "img");
        need(out, "out");
        validate(img->img);
        check_mask(img->img, mask);
        RngStream rng(seed, key_of(key));
        const VoronoiDiagram d = build_voronoi(img->img.width, img->img.height, sites, rng);
        shuffle_outputs(img->img, mask, voronoi_map(d), voronoi_provenance(d), out, mask_out, provenance_json);
    });
}

cd_status cd_patch_shuffle(const cd_image* img, const cd_mask* mask, int patches_per_side, uint64_t seed,
                           const char* key, cd_image** out, cd_mask** mask_out, char** provenance_json)
{
    return guard([&] {
        need(img, "img");
        need(out, "out");
        validate(img->img);
        check_mask(img->img, mask);
        require(patches_per_side >= 1, Errc::invalid_argument, "patches_per_side must be >= 1");
        RngStream rng(seed, key_of(key));
        const auto perm = random_permutation(patches_per_side * patches_per_side, rng);
        auto prov = permutation_provenance(perm);
        prov["patches_per_side"] = patches_per_side;
        shuffle_outputs(img->img, mask, patch_map(img->img.width, img->img.height, patches_per_side, perm), prov, out,
                        mask_out, provenance_json);
    });
}

cd_status cd_diamond_shuffle(const cd_image* img, const cd_mask* mask, int half_diag, uint64_t seed, const char* key,
                             cd_image** out, cd_mask** mask_out, char** provenance_json)
{
    return guard([&] {
        need(img, "img");
        need(out, "out");
        validate(img->img);
        check_mask(img->img, mask);
        const DiamondGrid g = diamond_grid(img->img.width, img->img.height, half_diag);
        RngStream rng(seed, key_of(key));
        const auto perm = random_permutation(int(g.anchors.size()), rng);
        nlohmann::ordered_json prov;
        prov["half_diag_requested"] = half_diag;
        prov["half_diag"] = g.half_diag;
        prov["cells"] = g.anchors.size();
        prov["permutation"] = perm;
        shuffle_outputs(img->img, mask, diamond_map(g, perm), prov, out, mask_out, provenance_json);
    });
}

cd_status cd_tex_eed(const cd_image* original, const cd_image* eed_img, cd_image** out)
{
    return guard([&] {
        need(original, "original");
        need(eed_img, "eed_img");
        need(out, "out");
        *out = wrap<cd_image>(tex_eed(original->img, eed_img->img));
    });
}

cd_status cd_tex_eed_patched(const cd_image* original, const cd_image* eed_img, int patches_per_side, uint64_t seed,
                             const char* key, cd_image** out, char** provenance_json)
{
    return guard([&] {
        need(original, "original");
        need(eed_img, "eed_img");
        need(out, "out");
        const Image diff = tex_eed(original->img, eed_img->img);
        require(patches_per_side >= 1, Errc::invalid_argument, "patches_per_side must be >= 1");
        RngStream rng(seed, key_of(key));
        const auto perm = random_permutation(patches_per_side * patches_per_side, rng);
        Image res = patch_shuffle(diff, patches_per_side, perm);
        auto prov = permutation_provenance(perm);
        prov["patches_per_side"] = patches_per_side;
        std::string p = provenance_json ? prov.dump() : std::string();
        *out = wrap<cd_image>(std::move(res));
        if (provenance_json) *provenance_json = dup(p);
    });
}

cd_status cd_compose(const cd_image* shape_img, const cd_image* texture_img, const char* mode, double gamma_s,
                     double gamma_t, cd_image** out)
{
    return guard([&] {
        need(shape_img, "shape_img");
        need(texture_img, "texture_img");
        need(out, "out");
        ConflictSpec spec{mode ? parse_compose_mode(mode) : ComposeMode::blend, gamma_s, gamma_t};
        *out = wrap<cd_image>(compose(shape_img->img, texture_img->img, spec));
    });
}

cd_status cd_build_pairing(const cd_manifest* shapes, const cd_manifest* textures, uint64_t seed, const char* key,
                           int derangement, char** pairs_json)
{
    return guard([&] {
        need(shapes, "shapes");
        need(textures, "textures");
        need(pairs_json, "pairs_json");
        RngStream rng(seed, key_of(key));
        const auto pairs = build_pairing(shapes->m, textures->m, rng, derangement != 0);
        nlohmann::ordered_json j = nlohmann::ordered_json::array();
        for (const auto& p : pairs)
            j.push_back({{"shape_id", p.shape_id},
                         {"texture_id", p.texture_id},
                         {"shape_class", p.shape_class},
                         {"texture_class", p.texture_class}});
        *pairs_json = dup(j.dump());
    });
}

cd_status cd_corrupt(const cd_image* img, const char* kind, double intensity, const char* noise_mode, uint64_t seed,
                     const char* key, cd_image** out)
{
    return guard([&] {
        need(img, "img");
        need(kind, "kind");
        need(out, "out");
        const CorruptionKind k = parse_corruption_kind(kind);
        CorruptionOptions opt;
        if (noise_mode) opt.noise_mode = parse_noise_mode(noise_mode);
        check_intensity(k, intensity);
        RngStream rng = corruption_stream(seed, key_of(key), k, intensity);
        *out = wrap<cd_image>(corrupt(img->img, k, intensity, rng, opt));
    });
}

cd_status cd_corruption_tag(const char* kind, double intensity, char** tag_out)
{
    return guard([&] {
        need(kind, "kind");
        need(tag_out, "tag_out");
        const CorruptionKind k = parse_corruption_kind(kind);
        check_intensity(k, intensity);
        *tag_out = dup(variant_tag(k, intensity));
    });
}

cd_status cd_manifest_new(cd_manifest** out)
{
    return guard([&] {
        need(out, "out");
        *out = new cd_manifest{};
    });
}

cd_status cd_manifest_read(const char* path, cd_manifest** out)
{
    return guard([&] {
        need(path, "path");
        need(out, "out");
        *out = wrap<cd_manifest>(read_manifest(path));
    });
}

cd_status cd_manifest_write(const cd_manifest* m, const char* path)
{
    return guard([&] {
        need(m, "m");
        need(path, "path");
        write_manifest(m->m, path);
    });
}

void cd_manifest_free(cd_manifest* m)
{
    delete m;
}

cd_status cd_manifest_size(const cd_manifest* m, size_t* n)
{
    return guard([&] {
        need(m, "m");
        need(n, "n");
        *n = m->m.entries.size();
    });
}

cd_status cd_manifest_entry(const cd_manifest* m, size_t index, char** entry_json)
{
    return guard([&] {
        need(m, "m");
        need(entry_json, "entry_json");
        require(index < m->m.entries.size(), Errc::out_of_range, "manifest index out of range");
        *entry_json = dup(entry_to_json(m->m.entries[index]).dump());
    });
}

cd_status cd_manifest_append(cd_manifest* m, const char* json)
{
    return guard([&] {
        need(m, "m");
        need(json, "entry_json");
        std::string line(json);
        require(line.find('\n') == std::string::npos, Errc::schema_error, "entry must be a single JSON line");
        DatasetManifest one = parse_manifest(line, "", "<entry>");
        require(one.entries.size() == 1, Errc::schema_error, "expected one manifest entry");
        require(!m->m.find(one.entries[0].sample_id), Errc::schema_error,
                "duplicate sample_id '" + one.entries[0].sample_id + "'");
        if (m->m.entries.empty())
            m->m.variant_tag = one.entries[0].variant;
        else if (m->m.variant_tag != one.entries[0].variant)
            m->m.variant_tag.clear();
        m->m.entries.push_back(std::move(one.entries[0]));
    });
}

cd_status cd_table_from_logs(const char* const* log_paths, size_t n, const char* config_json, cd_table** out)
{
    return guard([&] {
        need(out, "out");
        require(n == 0 || log_paths, Errc::invalid_argument, "log_paths is NULL");
        require(n > 0, Errc::invalid_argument, "no prediction logs");
        PredictionLog log;
        for (size_t i = 0; i < n; ++i) {
            need(log_paths[i], "log path");
            log.append(read_prediction_log(log_paths[i]));
        }
        *out = wrap<cd_table>(build_table(log, table_config(config_json)));
    });
}

cd_status cd_table_from_qualities(const char* csv_path, const char* config_json, cd_table** out)
{
    return guard([&] {
        need(csv_path, "csv_path");
        need(out, "out");
        *out = wrap<cd_table>(table_from_qualities(read_quality_table(csv_path), table_config(config_json)));
    });
}

void cd_table_free(cd_table* t)
{
    delete t;
}

cd_status cd_table_csv(const cd_table* t, char** out)
{
    return guard([&] {
        need(t, "t");
        need(out, "out");
        *out = dup(table_csv(t->t));
    });
}

cd_status cd_table_markdown(const cd_table* t, char** out)
{
    return guard([&] {
        need(t, "t");
        need(out, "out");
        *out = dup(table_markdown(t->t));
    });
}

cd_status cd_table_metadata(const cd_table* t, char** json_out)
{
    return guard([&] {
        need(t, "t");
        need(json_out, "json_out");
        *json_out = dup(t->t.metadata.dump(2));
    });
}

cd_status cd_table_spearman(const cd_table* t, const char* column_a, const char* column_b, double* rho, int* defined)
{
    return guard([&] {
        need(t, "t");
        need(column_a, "column_a");
        need(column_b, "column_b");
        need(rho, "rho");
        const auto r = table_spearman(t->t, column_a, column_b);
        *rho = r.value_or(0.0);
        if (defined) *defined = r.has_value();
    });
}

cd_status cd_spearman(const double* x, const double* y, size_t n, double* rho, int* defined)
{
    return guard([&] {
        need(x, "x");
        need(y, "y");
        need(rho, "rho");
        const auto r = spearman(std::vector<double>(x, x + n), std::vector<double>(y, y + n));
        *rho = r.value_or(0.0);
        if (defined) *defined = r.has_value();
    });
}

} // extern "C"
