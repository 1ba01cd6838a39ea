/* cuedecomp C API.
 *
 * Every function returns a cd_status. On failure the message is available
 * from cd_last_error() on the calling thread until the next failing call.
 * Objects are opaque handles released with their *_free function; strings
 * returned through char** are released with cd_string_free.
 *
 * Images are interleaved row-major doubles in [0,1] with 1 or 3 channels.
 * Functions taking (seed, key) draw from the counter-based stream derived
 * from that pair, so results do not depend on call order or thread.
 */
#ifndef CUEDECOMP_H
#define CUEDECOMP_H

#include <stddef.h>
#include <stdint.h>

#if defined(CUEDECOMP_BUILDING)
#define CUEDECOMP_API __attribute__((visibility("default")))
#else
#define CUEDECOMP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cd_status {
    CD_OK = 0,
    CD_INVALID_ARGUMENT = 1,
    CD_IO_ERROR = 2,
    CD_DECODE_ERROR = 3,
    CD_UNSUPPORTED_BIT_DEPTH = 4,
    CD_UNSUPPORTED_FORMAT = 5,
    CD_DIMENSION_MISMATCH = 6,
    CD_OUT_OF_RANGE = 7,
    CD_UNDEFINED = 8,
    CD_SCHEMA_ERROR = 9,
    CD_NOT_FOUND = 10,
    CD_INTERNAL = 99
} cd_status;

typedef struct cd_image cd_image;
typedef struct cd_mask cd_mask;
typedef struct cd_manifest cd_manifest;
typedef struct cd_table cd_table;

CUEDECOMP_API const char* cd_version(void);
CUEDECOMP_API const char* cd_last_error(void);
CUEDECOMP_API const char* cd_status_name(cd_status status);
CUEDECOMP_API void cd_string_free(char* s);

/* Default parameters of every command as a JSON document. */
CUEDECOMP_API cd_status cd_default_config(char** json_out);

/* ---- images and masks ---- */

CUEDECOMP_API cd_status cd_image_new(int width, int height, int channels, const double* data, cd_image** out);
CUEDECOMP_API cd_status cd_image_load(const char* path, cd_image** out);
/* PNG unless the extension is .pgm/.ppm; values are rounded half up to 8 bits. */
CUEDECOMP_API cd_status cd_image_save(const cd_image* img, const char* path);
CUEDECOMP_API void cd_image_free(cd_image* img);
CUEDECOMP_API cd_status cd_image_info(const cd_image* img, int* width, int* height, int* channels);
/* Borrowed pointer, valid while the handle lives. */
CUEDECOMP_API const double* cd_image_data(const cd_image* img);

CUEDECOMP_API cd_status cd_mask_new(int width, int height, const int32_t* labels, cd_mask** out);
CUEDECOMP_API cd_status cd_mask_load(const char* path, cd_mask** out);
CUEDECOMP_API cd_status cd_mask_save(const cd_mask* mask, const char* path);
CUEDECOMP_API void cd_mask_free(cd_mask* mask);
CUEDECOMP_API cd_status cd_mask_info(const cd_mask* mask, int* width, int* height);
CUEDECOMP_API const int32_t* cd_mask_data(const cd_mask* mask);

/* Bilinear resize then centred crop. resize_mode: 0 none, 1 fixed (rw x rh),
 * 2 shorter side (rw). crop_w/crop_h of 0 keep the resized image whole.
 * The mask variant uses nearest-neighbour sampling. */
CUEDECOMP_API cd_status cd_image_resize_center_crop(const cd_image* img, int resize_mode, int rw, int rh, int crop_w,
                                                    int crop_h, cd_image** out);
CUEDECOMP_API cd_status cd_mask_resize_center_crop(const cd_mask* mask, int resize_mode, int rw, int rh, int crop_w,
                                                   int crop_h, cd_mask** out);

/* ---- shape cue ---- */

typedef struct cd_eed_params {
    double kappa;
    int presmooth_kernel_size;
    double presmooth_sigma;
    int steps;
    double tau;
    double intensity_range; /* scale on which kappa is expressed */
} cd_eed_params;

CUEDECOMP_API void cd_eed_params_default(cd_eed_params* p);
CUEDECOMP_API cd_status cd_eed(const cd_image* img, const cd_eed_params* p, cd_image** out);

/* ---- texture cue and shuffles ----
 * mask and mask_out may be NULL. provenance_json (may be NULL) receives the
 * sites/shifts or the permutation used. */

CUEDECOMP_API cd_status cd_voronoi_shuffle(const cd_image* img, const cd_mask* mask, int sites, uint64_t seed,
                                           const char* key, cd_image** out, cd_mask** mask_out,
                                           char** provenance_json);
CUEDECOMP_API cd_status cd_patch_shuffle(const cd_image* img, const cd_mask* mask, int patches_per_side,
                                         uint64_t seed, const char* key, cd_image** out, cd_mask** mask_out,
                                         char** provenance_json);
/* half_diag is snapped to the admissible lattice; the value used is in the provenance. */
CUEDECOMP_API cd_status cd_diamond_shuffle(const cd_image* img, const cd_mask* mask, int half_diag, uint64_t seed,
                                           const char* key, cd_image** out, cd_mask** mask_out,
                                           char** provenance_json);
CUEDECOMP_API cd_status cd_tex_eed(const cd_image* original, const cd_image* eed_img, cd_image** out);
CUEDECOMP_API cd_status cd_tex_eed_patched(const cd_image* original, const cd_image* eed_img, int patches_per_side,
                                           uint64_t seed, const char* key, cd_image** out, char** provenance_json);

/* ---- cue conflict ---- */

/* mode: "blend" or "sum" */
CUEDECOMP_API cd_status cd_compose(const cd_image* shape_img, const cd_image* texture_img, const char* mode,
                                   double gamma_s, double gamma_t, cd_image** out);
/* JSON array of {shape_id, texture_id, shape_class, texture_class}. */
CUEDECOMP_API cd_status cd_build_pairing(const cd_manifest* shapes, const cd_manifest* textures, uint64_t seed,
                                         const char* key, int derangement, char** pairs_json);

/* ---- corruptions ----
 * kind: contrast | highpass | lowpass | noise | phase; noise_mode: "uniform"
 * (default when NULL) or "gaussian". The stream is (seed, key/kind:intensity). */

CUEDECOMP_API cd_status cd_corrupt(const cd_image* img, const char* kind, double intensity, const char* noise_mode,
                                   uint64_t seed, const char* key, cd_image** out);
/* Variant tag corrupt:<kind>:<intensity>. Rejects intensities outside the kind's range. */
CUEDECOMP_API cd_status cd_corruption_tag(const char* kind, double intensity, char** tag_out);

/* ---- manifests ----
 * Entries travel as JSON objects {sample_id, image, mask?, label?, variant, ...}
 * with absolute paths. */

CUEDECOMP_API cd_status cd_manifest_new(cd_manifest** out);
CUEDECOMP_API cd_status cd_manifest_read(const char* path, cd_manifest** out);
CUEDECOMP_API cd_status cd_manifest_write(const cd_manifest* m, const char* path);
CUEDECOMP_API void cd_manifest_free(cd_manifest* m);
CUEDECOMP_API cd_status cd_manifest_size(const cd_manifest* m, size_t* n);
CUEDECOMP_API cd_status cd_manifest_entry(const cd_manifest* m, size_t index, char** entry_json);
CUEDECOMP_API cd_status cd_manifest_append(cd_manifest* m, const char* entry_json);

/* ---- metrics ----
 * config_json (may be NULL) holds table options: original_variant,
 * shape_variant, texture_variant, conflict_variant, exclude_models,
 * exclude_groups, model_groups, robustness ("ratio" | "absolute"). */

CUEDECOMP_API cd_status cd_table_from_logs(const char* const* log_paths, size_t n, const char* config_json,
                                           cd_table** out);
CUEDECOMP_API cd_status cd_table_from_qualities(const char* csv_path, const char* config_json, cd_table** out);
CUEDECOMP_API void cd_table_free(cd_table* t);
CUEDECOMP_API cd_status cd_table_csv(const cd_table* t, char** out);
CUEDECOMP_API cd_status cd_table_markdown(const cd_table* t, char** out);
CUEDECOMP_API cd_status cd_table_metadata(const cd_table* t, char** json_out);
/* defined is set to 0 when the correlation is undefined (constant column). */
CUEDECOMP_API cd_status cd_table_spearman(const cd_table* t, const char* column_a, const char* column_b, double* rho,
                                          int* defined);

CUEDECOMP_API cd_status cd_spearman(const double* x, const double* y, size_t n, double* rho, int* defined);

#ifdef __cplusplus
}
#endif

#endif
