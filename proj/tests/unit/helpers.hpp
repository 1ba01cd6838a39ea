#pragma once

#include <cmath>
#include <filesystem>
#include <string>

#include "imagecore/image.hpp"
#include "imagecore/rng.hpp"

namespace testutil {

inline cuedecomp::Image random_image(int w, int h, int c, std::uint64_t seed)
{
    cuedecomp::Image img(w, h, c);
    cuedecomp::RngStream rng(seed, "test-image");
    for (double& v : img.data) v = rng.uniform();
    return img;
}

inline double max_abs_diff(const cuedecomp::Image& a, const cuedecomp::Image& b)
{
    double m = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::fabs(a.data[i] - b.data[i]));
    return m;
}

inline std::filesystem::path temp_dir(const std::string& name)
{
    auto p = std::filesystem::temp_directory_path() / ("cuedecomp_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

} // namespace testutil

namespace testutil {

// (x, y) -> (h-1-y, x): quarter turn
inline cuedecomp::Image rotate90(const cuedecomp::Image& img)
{
    cuedecomp::Image out(img.height, img.width, img.channels);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c) out.at(img.height - 1 - y, x, c) = img.at(x, y, c);
    return out;
}

inline std::vector<double> channel_means(const cuedecomp::Image& img)
{
    std::vector<double> m(std::size_t(img.channels), 0.0);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c) m[std::size_t(c)] += img.at(x, y, c);
    for (double& v : m) v /= double(img.width) * img.height;
    return m;
}

// white disk of radius r centred in an n x n frame; optional stripes inside
inline cuedecomp::Image disk_image(int n, double r, double texture_amp)
{
    cuedecomp::Image img(n, n, 1, 0.0);
    const double c = (n - 1) / 2.0;
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            const double d = std::hypot(x - c, y - c);
            if (d <= r) img.at(x, y, 0) = 0.8 + texture_amp * (((x / 2 + y / 2) % 2) ? 1.0 : -1.0);
        }
    return img;
}

} // namespace testutil
