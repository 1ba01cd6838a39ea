#pragma once

#include <string>
#include <vector>

#include "imagecore/image.hpp"
#include "imagecore/manifest.hpp"
#include "imagecore/rng.hpp"

namespace cuedecomp {

enum class ComposeMode { blend, sum };

ComposeMode parse_compose_mode(const std::string& s);
const char* compose_mode_name(ComposeMode m);

struct ConflictSpec {
    ComposeMode mode = ComposeMode::blend;
    double gamma_s = 1.0;
    double gamma_t = 1.0;

    void validate() const;
};

// blend: (gs*shape + gt*texture) / (gs + gt); sum: clamp(gs*shape + gt*texture)
Image compose(const Image& shape_img, const Image& texture_img, const ConflictSpec& spec);

struct ConflictPair {
    std::string shape_id;
    std::string texture_id;
    std::string shape_class;
    std::string texture_class;
    bool operator==(const ConflictPair&) const = default;
};

// Every shape sample gets a texture sample of another class, drawn uniformly.
// Textures are drawn with replacement unless `derangement` is set, in which
// case each texture sample is used at most once.
std::vector<ConflictPair> build_pairing(const DatasetManifest& shapes, const DatasetManifest& textures, RngStream& rng,
                                        bool derangement = false);

} // namespace cuedecomp
