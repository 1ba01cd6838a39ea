#include "shuffle/shuffle.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_set>

#include "common/error.hpp"

namespace cuedecomp {

namespace {

void check_map(const PixelMap& map, int w, int h)
{
    require(map.width == w && map.height == h, Errc::dimension_mismatch,
            "pixel map is " + std::to_string(map.width) + "x" + std::to_string(map.height) + ", raster is " +
                std::to_string(w) + "x" + std::to_string(h));
}

int floor_div(int a, int b)
{
    int q = a / b;
    return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
}

int wrap(long v, int n)
{
    long r = v % n;
    return int(r < 0 ? r + n : r);
}

} // namespace

Image apply_map(const Image& img, const PixelMap& map)
{
    check_map(map, img.width, img.height);
    Image out(img.width, img.height, img.channels);
    const std::size_t c = std::size_t(img.channels);
    for (std::size_t i = 0; i < map.source.size(); ++i)
        std::copy_n(img.data.begin() + std::ptrdiff_t(map.source[i] * c), c, out.data.begin() + std::ptrdiff_t(i * c));
    return out;
}

LabelMask apply_map(const LabelMask& mask, const PixelMap& map)
{
    check_map(map, mask.width, mask.height);
    LabelMask out(mask.width, mask.height);
    out.ignore_index = mask.ignore_index;
    for (std::size_t i = 0; i < map.source.size(); ++i) out.labels[i] = mask.labels[map.source[i]];
    return out;
}

std::vector<Site> sample_sites(int width, int height, int n, RngStream& rng)
{
    require(width > 0 && height > 0, Errc::invalid_argument, "empty raster");
    const std::int64_t total = std::int64_t(width) * height;
    require(n >= 1, Errc::invalid_argument, "site count must be >= 1");
    require(n <= total, Errc::invalid_argument,
            "site count " + std::to_string(n) + " exceeds pixel count " + std::to_string(total));
    std::unordered_set<std::int64_t> taken;
    std::vector<Site> sites;
    sites.reserve(std::size_t(n));
    for (std::int64_t j = total - n; j < total; ++j) {
        std::int64_t t = rng.range(0, j);
        if (!taken.insert(t).second) {
            t = j;
            taken.insert(t);
        }
        sites.push_back({int(t % width), int(t / width)});
    }
    return sites;
}

std::vector<std::int32_t> assign_cells(int width, int height, const std::vector<Site>& sites)
{
    require(!sites.empty(), Errc::invalid_argument, "empty site list");
    require(width > 0 && height > 0, Errc::invalid_argument, "empty raster");
    std::vector<std::int32_t> cell(std::size_t(width) * height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            std::int64_t best = std::numeric_limits<std::int64_t>::max();
            std::int32_t arg = 0;
            for (std::size_t k = 0; k < sites.size(); ++k) {
                const std::int64_t dx = x - sites[k].x, dy = y - sites[k].y;
                const std::int64_t d = dx * dx + dy * dy;
                if (d < best) {
                    best = d;
                    arg = std::int32_t(k);
                }
            }
            cell[std::size_t(y) * width + x] = arg;
        }
    }
    return cell;
}

std::vector<Shift> sample_shifts(const VoronoiDiagram& d, RngStream& rng)
{
    const std::size_t n = d.sites.size();
    require(d.assignment.size() == std::size_t(d.width) * d.height, Errc::invalid_argument, "assignment not computed");
    std::vector<int> x0(n, d.width), x1(n, -1), y0(n, d.height), y1(n, -1);
    for (int y = 0; y < d.height; ++y) {
        for (int x = 0; x < d.width; ++x) {
            const auto k = std::size_t(d.assignment[std::size_t(y) * d.width + x]);
            require(k < n, Errc::invalid_argument, "assignment refers to a missing site");
            x0[k] = std::min(x0[k], x);
            x1[k] = std::max(x1[k], x);
            y0[k] = std::min(y0[k], y);
            y1[k] = std::max(y1[k], y);
        }
    }
    std::vector<Shift> shifts(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (x1[k] < 0) continue; // empty cell, nothing to move
        shifts[k].dx = int(rng.range(-x0[k], d.width - 1 - x1[k]));
        shifts[k].dy = int(rng.range(-y0[k], d.height - 1 - y1[k]));
    }
    return shifts;
}

VoronoiDiagram build_voronoi(int width, int height, int n, RngStream& rng)
{
    VoronoiDiagram d;
    d.width = width;
    d.height = height;
    RngStream site_rng = rng.substream("sites");
    RngStream shift_rng = rng.substream("shifts");
    d.sites = sample_sites(width, height, n, site_rng);
    d.assignment = assign_cells(width, height, d.sites);
    d.shifts = sample_shifts(d, shift_rng);
    return d;
}

PixelMap voronoi_map(const VoronoiDiagram& d)
{
    PixelMap m{d.width, d.height, std::vector<std::uint32_t>(std::size_t(d.width) * d.height)};
    for (int y = 0; y < d.height; ++y) {
        for (int x = 0; x < d.width; ++x) {
            const std::size_t i = std::size_t(y) * d.width + x;
            const Shift s = d.shifts[std::size_t(d.assignment[i])];
            const int sx = x + s.dx, sy = y + s.dy;
            require(sx >= 0 && sy >= 0 && sx < d.width && sy < d.height, Errc::out_of_range,
                    "shift moves a cell outside the image");
            m.source[i] = std::uint32_t(std::size_t(sy) * d.width + sx);
        }
    }
    return m;
}

VoronoiResult voronoi_shuffle(const Image& img, const std::optional<LabelMask>& mask, int n, RngStream& rng)
{
    validate(img);
    if (mask)
        require(mask->width == img.width && mask->height == img.height, Errc::dimension_mismatch,
                "mask and image sizes differ");
    VoronoiResult r;
    r.diagram = build_voronoi(img.width, img.height, n, rng);
    const PixelMap m = voronoi_map(r.diagram);
    r.image = apply_map(img, m);
    if (mask) r.mask = apply_map(*mask, m);
    return r;
}

std::vector<int> random_permutation(int n, RngStream& rng)
{
    require(n >= 1, Errc::invalid_argument, "permutation of nothing");
    std::vector<int> p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    for (int i = n - 1; i > 0; --i) std::swap(p[std::size_t(i)], p[std::size_t(rng.below(std::uint64_t(i) + 1))]);
    return p;
}

void check_permutation(const std::vector<int>& perm, int n)
{
    require(perm.size() == std::size_t(n), Errc::invalid_argument,
            "permutation has " + std::to_string(perm.size()) + " entries, expected " + std::to_string(n));
    std::vector<char> seen(std::size_t(n), 0);
    for (int v : perm) {
        require(v >= 0 && v < n && !seen[std::size_t(v)], Errc::invalid_argument, "not a permutation");
        seen[std::size_t(v)] = 1;
    }
}

PixelMap patch_map(int width, int height, int pps, const std::vector<int>& perm)
{
    require(pps >= 1, Errc::invalid_argument, "patches_per_side must be >= 1");
    require(width % pps == 0 && height % pps == 0, Errc::invalid_argument,
            std::to_string(width) + "x" + std::to_string(height) + " is not divisible into " + std::to_string(pps) +
                "x" + std::to_string(pps) + " patches");
    check_permutation(perm, pps * pps);
    const int pw = width / pps, ph = height / pps;
    PixelMap m{width, height, std::vector<std::uint32_t>(std::size_t(width) * height)};
    for (int k = 0; k < pps * pps; ++k) {
        const int src = perm[std::size_t(k)];
        const int ox = (k % pps) * pw, oy = (k / pps) * ph;
        const int sx = (src % pps) * pw, sy = (src / pps) * ph;
        for (int y = 0; y < ph; ++y)
            for (int x = 0; x < pw; ++x)
                m.source[std::size_t(oy + y) * width + std::size_t(ox + x)] =
                    std::uint32_t(std::size_t(sy + y) * width + std::size_t(sx + x));
    }
    return m;
}

Image patch_shuffle(const Image& img, int pps, const std::vector<int>& perm)
{
    validate(img);
    return apply_map(img, patch_map(img.width, img.height, pps, perm));
}

Image patch_shuffle(const Image& img, int pps, RngStream& rng)
{
    require(pps >= 1, Errc::invalid_argument, "patches_per_side must be >= 1");
    return patch_shuffle(img, pps, random_permutation(pps * pps, rng));
}

int snap_half_diagonal(int width, int height, int requested)
{
    require(requested >= 1, Errc::invalid_argument, "half diagonal must be >= 1");
    require(width > 0 && height > 0 && width % 2 == 0 && height % 2 == 0, Errc::invalid_argument,
            "diamond lattice needs even image dimensions, got " + std::to_string(width) + "x" +
                std::to_string(height));
    // cell counts W*H/(2h^2) compared exactly: |r^2 - a^2| * b^2 vs |r^2 - b^2| * a^2
    const std::int64_t r2 = std::int64_t(requested) * requested;
    std::int64_t best = 0;
    for (std::int64_t a = 1; 2 * a <= std::min(width, height); ++a) {
        if (width % (2 * a) != 0 || height % (2 * a) != 0) continue;
        if (best == 0) {
            best = a;
            continue;
        }
        const std::int64_t a2 = a * a, b2 = best * best;
        const std::int64_t lhs = std::abs(r2 - a2) * b2, rhs = std::abs(r2 - b2) * a2;
        if (lhs <= rhs) best = a;
    }
    return int(best);
}

DiamondGrid diamond_grid(int width, int height, int requested)
{
    DiamondGrid g;
    g.width = width;
    g.height = height;
    g.half_diag = snap_half_diagonal(width, height, requested);
    const int h = g.half_diag, p = 2 * h;
    std::vector<std::int32_t> anchor_of(std::size_t(width) * height, -1);
    g.cell.resize(std::size_t(width) * height);
    // anchors of pixel (x, y): cell (I, J) of the rotated coordinates x+y, x-y
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const int i = floor_div(x + y, p), j = floor_div(x - y, p);
            const int ax = wrap(long(h) * (i + j), width), ay = wrap(long(h) * (i - j), height);
            anchor_of[std::size_t(ay) * width + ax] = 0;
        }
    }
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            if (anchor_of[std::size_t(y) * width + x] == 0) {
                anchor_of[std::size_t(y) * width + x] = std::int32_t(g.anchors.size());
                g.anchors.push_back({x, y});
            }
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const int i = floor_div(x + y, p), j = floor_div(x - y, p);
            const int ax = wrap(long(h) * (i + j), width), ay = wrap(long(h) * (i - j), height);
            g.cell[std::size_t(y) * width + x] = anchor_of[std::size_t(ay) * width + ax];
        }
    }
    return g;
}

PixelMap diamond_map(const DiamondGrid& g, const std::vector<int>& perm)
{
    check_permutation(perm, int(g.anchors.size()));
    PixelMap m{g.width, g.height, std::vector<std::uint32_t>(std::size_t(g.width) * g.height)};
    for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
            const std::size_t i = std::size_t(y) * g.width + x;
            const auto k = std::size_t(g.cell[i]);
            const Site a = g.anchors[k], b = g.anchors[std::size_t(perm[k])];
            const int sx = wrap(long(x) - a.x + b.x, g.width), sy = wrap(long(y) - a.y + b.y, g.height);
            m.source[i] = std::uint32_t(std::size_t(sy) * g.width + sx);
        }
    }
    return m;
}

Image diamond_shuffle(const Image& img, int half_diag, const std::vector<int>& perm)
{
    validate(img);
    return apply_map(img, diamond_map(diamond_grid(img.width, img.height, half_diag), perm));
}

Image diamond_shuffle(const Image& img, int half_diag, RngStream& rng)
{
    validate(img);
    const DiamondGrid g = diamond_grid(img.width, img.height, half_diag);
    return apply_map(img, diamond_map(g, random_permutation(int(g.anchors.size()), rng)));
}

Image tex_eed(const Image& original, const Image& eed_img)
{
    validate(original);
    validate(eed_img);
    require(original.same_shape(eed_img), Errc::dimension_mismatch, "original and EED image shapes differ");
    Image out(original.width, original.height, original.channels);
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = std::clamp(original.data[i] - eed_img.data[i] + 0.5, 0.0, 1.0);
    return out;
}

Image tex_eed_patched(const Image& original, const Image& eed_img, int pps, RngStream& rng)
{
    return patch_shuffle(tex_eed(original, eed_img), pps, rng);
}

nlohmann::ordered_json voronoi_provenance(const VoronoiDiagram& d)
{
    nlohmann::ordered_json j;
    j["sites"] = nlohmann::ordered_json::array();
    j["shifts"] = nlohmann::ordered_json::array();
    for (const Site& s : d.sites) j["sites"].push_back({s.x, s.y});
    for (const Shift& s : d.shifts) j["shifts"].push_back({s.dx, s.dy});
    return j;
}

nlohmann::ordered_json permutation_provenance(const std::vector<int>& perm)
{
    nlohmann::ordered_json j;
    j["permutation"] = perm;
    return j;
}

} // namespace cuedecomp
