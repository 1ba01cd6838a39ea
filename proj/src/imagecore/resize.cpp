#include "imagecore/resize.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "common/error.hpp"

namespace cuedecomp {

void resized_dims(int w, int h, const ResizeSpec& spec, int& out_w, int& out_h)
{
    switch (spec.mode) {
    case ResizeSpec::Mode::none:
        out_w = w;
        out_h = h;
        return;
    case ResizeSpec::Mode::fixed:
        require(spec.width > 0 && spec.height > 0, Errc::invalid_argument, "resize dimensions must be positive");
        out_w = spec.width;
        out_h = spec.height;
        return;
    case ResizeSpec::Mode::shorter_side: {
        require(spec.shorter > 0, Errc::invalid_argument, "shorter side must be positive");
        auto scale_long = [&](long long lng, long long shrt) {
            // round(lng * S / shrt), half-up, in exact integer arithmetic
            return int((2 * lng * spec.shorter + shrt) / (2 * shrt));
        };
        if (w <= h) {
            out_w = spec.shorter;
            out_h = scale_long(h, w);
        } else {
            out_h = spec.shorter;
            out_w = scale_long(w, h);
        }
        return;
    }
    }
}

namespace {

struct Tap {
    int i0, i1;
    double f;
};

std::vector<Tap> bilinear_taps(int in, int out)
{
    std::vector<Tap> taps(static_cast<std::size_t>(out));
    const double scale = double(in) / double(out);
    for (int o = 0; o < out; ++o) {
        double src = std::clamp((o + 0.5) * scale - 0.5, 0.0, double(in - 1));
        int i0 = int(std::floor(src));
        int i1 = std::min(i0 + 1, in - 1);
        taps[std::size_t(o)] = {i0, i1, src - i0};
    }
    return taps;
}

std::vector<int> nearest_taps(int in, int out)
{
    std::vector<int> idx(static_cast<std::size_t>(out));
    for (int o = 0; o < out; ++o) {
        // exact integer form of floor((o + 0.5) * in / out)
        long long v = ((2LL * o + 1) * in) / (2LL * out);
        idx[std::size_t(o)] = int(std::min<long long>(v, in - 1));
    }
    return idx;
}

} // namespace

Image resize_bilinear(const Image& img, int out_w, int out_h)
{
    validate(img);
    require(out_w > 0 && out_h > 0, Errc::invalid_argument, "resize dimensions must be positive");
    if (out_w == img.width && out_h == img.height) return img;
    auto tx = bilinear_taps(img.width, out_w);
    auto ty = bilinear_taps(img.height, out_h);
    Image out(out_w, out_h, img.channels);
    for (int y = 0; y < out_h; ++y) {
        const Tap& a = ty[std::size_t(y)];
        for (int x = 0; x < out_w; ++x) {
            const Tap& b = tx[std::size_t(x)];
            for (int c = 0; c < img.channels; ++c) {
                double top = img.at(b.i0, a.i0, c) + b.f * (img.at(b.i1, a.i0, c) - img.at(b.i0, a.i0, c));
                double bot = img.at(b.i0, a.i1, c) + b.f * (img.at(b.i1, a.i1, c) - img.at(b.i0, a.i1, c));
                out.at(x, y, c) = std::clamp(top + a.f * (bot - top), 0.0, 1.0);
            }
        }
    }
    return out;
}

LabelMask resize_nearest(const LabelMask& mask, int out_w, int out_h)
{
    validate(mask);
    require(out_w > 0 && out_h > 0, Errc::invalid_argument, "resize dimensions must be positive");
    auto tx = nearest_taps(mask.width, out_w);
    auto ty = nearest_taps(mask.height, out_h);
    LabelMask out(out_w, out_h);
    out.ignore_index = mask.ignore_index;
    for (int y = 0; y < out_h; ++y)
        for (int x = 0; x < out_w; ++x) out.at(x, y) = mask.at(tx[std::size_t(x)], ty[std::size_t(y)]);
    return out;
}

Image crop(const Image& img, int x0, int y0, int w, int h)
{
    require(x0 >= 0 && y0 >= 0 && w > 0 && h > 0 && x0 + w <= img.width && y0 + h <= img.height,
            Errc::out_of_range, "crop window outside image");
    Image out(w, h, img.channels);
    for (int y = 0; y < h; ++y)
        std::copy_n(&img.data[(std::size_t(y0 + y) * img.width + x0) * img.channels], std::size_t(w) * img.channels,
                    &out.data[std::size_t(y) * w * img.channels]);
    return out;
}

LabelMask crop(const LabelMask& mask, int x0, int y0, int w, int h)
{
    require(x0 >= 0 && y0 >= 0 && w > 0 && h > 0 && x0 + w <= mask.width && y0 + h <= mask.height,
            Errc::out_of_range, "crop window outside mask");
    LabelMask out(w, h);
    out.ignore_index = mask.ignore_index;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) out.at(x, y) = mask.at(x0 + x, y0 + y);
    return out;
}

namespace {

template <class Raster, class ResizeFn>
Raster resize_then_crop(const Raster& in, const ResizeSpec& resize, std::optional<CropSpec> cs, ResizeFn fn)
{
    int rw = 0, rh = 0;
    resized_dims(in.width, in.height, resize, rw, rh);
    if (cs) {
        require(cs->width > 0 && cs->height > 0, Errc::invalid_argument, "crop dimensions must be positive");
        if (cs->width > rw || cs->height > rh)
            fail(Errc::out_of_range, "crop " + std::to_string(cs->width) + "x" + std::to_string(cs->height) +
                                         " larger than resized image " + std::to_string(rw) + "x" +
                                         std::to_string(rh));
    }
    Raster r = fn(in, rw, rh);
    if (!cs || (cs->width == rw && cs->height == rh)) return r;
    return crop(r, (rw - cs->width) / 2, (rh - cs->height) / 2, cs->width, cs->height);
}

} // namespace

Image resize_center_crop(const Image& img, const ResizeSpec& resize, std::optional<CropSpec> cs)
{
    return resize_then_crop(img, resize, cs, resize_bilinear);
}

LabelMask resize_center_crop(const LabelMask& mask, const ResizeSpec& resize, std::optional<CropSpec> cs)
{
    return resize_then_crop(mask, resize, cs, resize_nearest);
}

} // namespace cuedecomp
