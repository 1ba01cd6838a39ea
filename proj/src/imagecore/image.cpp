#include "imagecore/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "common/error.hpp"

namespace cuedecomp {

Image::Image(int w, int h, int c, double fill)
    : width(w), height(h), channels(c)
{
    require(w > 0 && h > 0, Errc::invalid_argument, "image dimensions must be positive");
    require(c == 1 || c == 3, Errc::invalid_argument, "image must have 1 or 3 channels");
    data.assign(std::size_t(w) * h * c, fill);
}

LabelMask::LabelMask(int w, int h, std::int32_t fill)
    : width(w), height(h)
{
    require(w > 0 && h > 0, Errc::invalid_argument, "mask dimensions must be positive");
    labels.assign(std::size_t(w) * h, fill);
}

void validate(const Image& img)
{
    require(img.width > 0 && img.height > 0, Errc::invalid_argument, "image dimensions must be positive");
    require(img.channels == 1 || img.channels == 3, Errc::invalid_argument,
            "image must have 1 or 3 channels");
    require(img.data.size() == img.pixels() * img.channels, Errc::invalid_argument,
            "image data length does not match width*height*channels");
    for (double v : img.data)
        require(std::isfinite(v) && v >= 0.0 && v <= 1.0, Errc::invalid_argument,
                "image intensity outside [0,1]");
}

void validate(const LabelMask& mask, std::optional<int> class_count)
{
    require(mask.width > 0 && mask.height > 0, Errc::invalid_argument, "mask dimensions must be positive");
    require(mask.labels.size() == std::size_t(mask.width) * mask.height, Errc::invalid_argument,
            "mask label length does not match width*height");
    if (!class_count) return;
    for (auto l : mask.labels) {
        if (mask.ignore_index && l == *mask.ignore_index) continue;
        require(l >= 0 && l < *class_count, Errc::invalid_argument,
                "mask label " + std::to_string(l) + " outside class range");
    }
}

void clamp_unit(Image& img)
{
    for (double& v : img.data) v = std::clamp(v, 0.0, 1.0);
}

Image rotate90(const Image& img)
{
    Image out(img.height, img.width, img.channels);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c)
                out.at(y, img.width - 1 - x, c) = img.at(x, y, c);
    return out;
}

} // namespace cuedecomp
