#include "conflict/conflict.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "common/error.hpp"

namespace cuedecomp {

ComposeMode parse_compose_mode(const std::string& s)
{
    if (s == "blend") return ComposeMode::blend;
    if (s == "sum") return ComposeMode::sum;
    fail(Errc::invalid_argument, "unknown compose mode '" + s + "' (blend|sum)");
}

const char* compose_mode_name(ComposeMode m)
{
    return m == ComposeMode::blend ? "blend" : "sum";
}

void ConflictSpec::validate() const
{
    require(std::isfinite(gamma_s) && gamma_s >= 0, Errc::invalid_argument, "gamma_s must be >= 0");
    require(std::isfinite(gamma_t) && gamma_t >= 0, Errc::invalid_argument, "gamma_t must be >= 0");
    if (mode == ComposeMode::blend)
        require(gamma_s + gamma_t > 0, Errc::invalid_argument, "blend needs gamma_s + gamma_t > 0");
}

Image compose(const Image& shape_img, const Image& texture_img, const ConflictSpec& spec)
{
    spec.validate();
    validate(shape_img);
    validate(texture_img);
    require(shape_img.same_shape(texture_img), Errc::dimension_mismatch,
            "shape image is " + std::to_string(shape_img.width) + "x" + std::to_string(shape_img.height) + "x" +
                std::to_string(shape_img.channels) + ", texture image is " + std::to_string(texture_img.width) + "x" +
                std::to_string(texture_img.height) + "x" + std::to_string(texture_img.channels));
    Image out(shape_img.width, shape_img.height, shape_img.channels);
    const double gs = spec.gamma_s, gt = spec.gamma_t;
    if (spec.mode == ComposeMode::blend) {
        const double total = gs + gt;
        for (std::size_t i = 0; i < out.data.size(); ++i) {
            const double a = shape_img.data[i], b = texture_img.data[i];
            // keep rounding from leaving the [min, max] hull
            out.data[i] = std::clamp((gs * a + gt * b) / total, std::min(a, b), std::max(a, b));
        }
    } else {
        for (std::size_t i = 0; i < out.data.size(); ++i)
            out.data[i] = std::clamp(gs * shape_img.data[i] + gt * texture_img.data[i], 0.0, 1.0);
    }
    return out;
}

namespace {

// Kuhn's augmenting paths over pre-shuffled candidate lists.
bool augment(std::size_t s, const std::vector<std::vector<std::size_t>>& cand, std::vector<long>& owner,
             std::vector<char>& seen, std::vector<long>& match)
{
    for (std::size_t t : cand[s]) {
        if (seen[t]) continue;
        seen[t] = 1;
        if (owner[t] < 0 || augment(std::size_t(owner[t]), cand, owner, seen, match)) {
            owner[t] = long(s);
            match[s] = long(t);
            return true;
        }
    }
    return false;
}

} // namespace

std::vector<ConflictPair> build_pairing(const DatasetManifest& shapes, const DatasetManifest& textures, RngStream& rng,
                                        bool derangement)
{
    require(!shapes.entries.empty(), Errc::invalid_argument, "empty shape manifest");
    require(!textures.entries.empty(), Errc::invalid_argument, "empty texture manifest");
    std::set<std::string> classes;
    for (const auto* m : {&shapes, &textures})
        for (const auto& e : m->entries) {
            require(e.label.has_value(), Errc::schema_error, "sample '" + e.sample_id + "' has no class label");
            classes.insert(*e.label);
        }
    require(classes.size() >= 2, Errc::invalid_argument,
            "only one class (" + *classes.begin() + ") present, no cross-class pairing exists");

    const std::size_t ns = shapes.entries.size(), nt = textures.entries.size();
    std::vector<std::vector<std::size_t>> cand(ns);
    for (std::size_t s = 0; s < ns; ++s) {
        for (std::size_t t = 0; t < nt; ++t)
            if (*textures.entries[t].label != *shapes.entries[s].label) cand[s].push_back(t);
        require(!cand[s].empty(), Errc::invalid_argument,
                "no texture sample of a class other than '" + *shapes.entries[s].label + "'");
    }

    std::vector<long> match(ns, -1);
    if (!derangement) {
        for (std::size_t s = 0; s < ns; ++s) match[s] = long(cand[s][rng.below(cand[s].size())]);
    } else {
        require(nt >= ns, Errc::invalid_argument, "derangement needs at least as many textures as shapes");
        for (auto& c : cand)
            for (std::size_t i = c.size() - 1; i > 0; --i) std::swap(c[i], c[rng.below(i + 1)]);
        std::vector<long> owner(nt, -1);
        std::vector<char> seen(nt);
        for (std::size_t s = 0; s < ns; ++s) {
            std::fill(seen.begin(), seen.end(), 0);
            require(augment(s, cand, owner, seen, match), Errc::invalid_argument,
                    "no pairing uses every texture at most once");
        }
    }

    std::vector<ConflictPair> out;
    out.reserve(ns);
    for (std::size_t s = 0; s < ns; ++s) {
        const auto& a = shapes.entries[s];
        const auto& b = textures.entries[std::size_t(match[s])];
        out.push_back({a.sample_id, b.sample_id, *a.label, *b.label});
    }
    return out;
}

} // namespace cuedecomp
