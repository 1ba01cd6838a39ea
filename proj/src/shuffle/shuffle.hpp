#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "imagecore/image.hpp"
#include "imagecore/rng.hpp"

namespace cuedecomp {

struct Site {
    int x = 0;
    int y = 0;
    bool operator==(const Site&) const = default;
};

struct Shift {
    int dx = 0;
    int dy = 0;
    bool operator==(const Shift&) const = default;
};

struct VoronoiDiagram {
    int width = 0;
    int height = 0;
    std::vector<Site> sites;
    std::vector<std::int32_t> assignment; // per pixel, row-major
    std::vector<Shift> shifts;            // per site
};

// Source pixel index for every output pixel. All shuffles are gathers through one of these,
// so images and masks move identically.
struct PixelMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint32_t> source;
};

Image apply_map(const Image& img, const PixelMap& map);
LabelMask apply_map(const LabelMask& mask, const PixelMap& map);

// Distinct pixels, uniform without replacement (Floyd's algorithm).
std::vector<Site> sample_sites(int width, int height, int n, RngStream& rng);
// Nearest site per pixel by exact integer distance; ties go to the lower index.
std::vector<std::int32_t> assign_cells(int width, int height, const std::vector<Site>& sites);
// Per cell, a uniform integer shift keeping the cell's bounding box in the image (dx drawn before dy).
std::vector<Shift> sample_shifts(const VoronoiDiagram& diagram, RngStream& rng);

VoronoiDiagram build_voronoi(int width, int height, int n, RngStream& rng);
PixelMap voronoi_map(const VoronoiDiagram& diagram);

struct VoronoiResult {
    Image image;
    std::optional<LabelMask> mask;
    VoronoiDiagram diagram;
};

VoronoiResult voronoi_shuffle(const Image& img, const std::optional<LabelMask>& mask, int n, RngStream& rng);

// Uniform permutation of 0..n-1 (Fisher-Yates).
std::vector<int> random_permutation(int n, RngStream& rng);
void check_permutation(const std::vector<int>& perm, int n);

// Output patch k holds the content of input patch perm[k]; patches are row-major.
PixelMap patch_map(int width, int height, int patches_per_side, const std::vector<int>& perm);
Image patch_shuffle(const Image& img, int patches_per_side, RngStream& rng);
Image patch_shuffle(const Image& img, int patches_per_side, const std::vector<int>& perm);

// Diamond cells of the 45-degree lattice on the torus. The lattice period 2h
// must divide both dimensions; the requested half-diagonal is snapped to the
// admissible h whose cell count is closest to the requested one (ties: larger h).
struct DiamondGrid {
    int width = 0;
    int height = 0;
    int half_diag = 0;
    std::vector<Site> anchors;      // one per cell, sorted by (y, x)
    std::vector<std::int32_t> cell; // per pixel
};

int snap_half_diagonal(int width, int height, int requested);
DiamondGrid diamond_grid(int width, int height, int half_diag_requested);
PixelMap diamond_map(const DiamondGrid& grid, const std::vector<int>& perm);
Image diamond_shuffle(const Image& img, int half_diag, RngStream& rng);
Image diamond_shuffle(const Image& img, int half_diag, const std::vector<int>& perm);

// clamp(original - eed + 0.5)
Image tex_eed(const Image& original, const Image& eed_img);
Image tex_eed_patched(const Image& original, const Image& eed_img, int patches_per_side, RngStream& rng);

nlohmann::ordered_json voronoi_provenance(const VoronoiDiagram& diagram);
nlohmann::ordered_json permutation_provenance(const std::vector<int>& perm);

} // namespace cuedecomp
