#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace cuedecomp {

// Interleaved row-major raster, intensities in [0,1].
struct Image {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<double> data;

    Image() = default;
    Image(int w, int h, int c, double fill = 0.0);

    std::size_t pixels() const { return std::size_t(width) * std::size_t(height); }
    double& at(int x, int y, int c) { return data[(std::size_t(y) * width + x) * channels + c]; }
    double at(int x, int y, int c) const { return data[(std::size_t(y) * width + x) * channels + c]; }

    bool same_shape(const Image& o) const
    {
        return width == o.width && height == o.height && channels == o.channels;
    }
    bool operator==(const Image& o) const = default;
};

struct LabelMask {
    int width = 0;
    int height = 0;
    std::vector<std::int32_t> labels;
    std::optional<std::int32_t> ignore_index;

    LabelMask() = default;
    LabelMask(int w, int h, std::int32_t fill = 0);

    std::int32_t& at(int x, int y) { return labels[std::size_t(y) * width + x]; }
    std::int32_t at(int x, int y) const { return labels[std::size_t(y) * width + x]; }
    bool operator==(const LabelMask& o) const = default;
};

// Throws invalid_argument on bad dimensions, wrong data length or values outside [0,1].
void validate(const Image& img);
void validate(const LabelMask& mask, std::optional<int> class_count = std::nullopt);

void clamp_unit(Image& img);
Image rotate90(const Image& img); // counter-clockwise

} // namespace cuedecomp
