#pragma once

#include <optional>

#include "imagecore/image.hpp"

namespace cuedecomp {

struct ResizeSpec {
    enum class Mode { none, fixed, shorter_side } mode = Mode::none;
    int width = 0;   // fixed
    int height = 0;  // fixed
    int shorter = 0; // shorter_side

    static ResizeSpec none() { return {}; }
    static ResizeSpec fixed(int w, int h) { return {Mode::fixed, w, h, 0}; }
    static ResizeSpec shorter_side(int s) { return {Mode::shorter_side, 0, 0, s}; }
};

struct CropSpec {
    int width = 0;
    int height = 0;
};

// Target size after the resize stage; shorter-side keeps the aspect ratio
// and rounds the long side half-up.
void resized_dims(int w, int h, const ResizeSpec& spec, int& out_w, int& out_h);

// Bilinear, align-corners=false (pixel centres at i+0.5).
Image resize_bilinear(const Image& img, int out_w, int out_h);
LabelMask resize_nearest(const LabelMask& mask, int out_w, int out_h);

Image crop(const Image& img, int x0, int y0, int w, int h);
LabelMask crop(const LabelMask& mask, int x0, int y0, int w, int h);

// Crop window offsets are floor((dim - crop) / 2). An absent crop keeps the
// resized image whole.
Image resize_center_crop(const Image& img, const ResizeSpec& resize, std::optional<CropSpec> crop);
LabelMask resize_center_crop(const LabelMask& mask, const ResizeSpec& resize, std::optional<CropSpec> crop);

} // namespace cuedecomp
