#include <doctest.h>

#include <cmath>
#include <complex>

#include "common/error.hpp"
#include "corrupt/corrupt.hpp"
#include "helpers.hpp"

using namespace cuedecomp;

namespace {

// naive 2-D DFT magnitudes of one channel
std::vector<double> dft_magnitudes(const Image& img, int c)
{
    const int w = img.width, h = img.height;
    std::vector<double> mag(std::size_t(w * h));
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u) {
            std::complex<double> s = 0;
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    const double a = -2 * M_PI * (double(u * x) / w + double(v * y) / h);
                    s += img.at(x, y, c) * std::polar(1.0, a);
                }
            mag[std::size_t(v * w + u)] = std::abs(s);
        }
    return mag;
}

double stddev(const std::vector<double>& v)
{
    double s = 0, s2 = 0;
    for (double x : v) {
        s += x;
        s2 += x * x;
    }
    const double m = s / double(v.size());
    return std::sqrt(s2 / double(v.size()) - m * m);
}

} // namespace

TEST_CASE("contrast")
{
    Image img = testutil::random_image(9, 7, 3, 1);
    CHECK(contrast(img, 1.0) == img);
    Image p(1, 1, 1, 0.8);
    CHECK(contrast(p, 0.2).data[0] == doctest::Approx(0.56));
    Image q = contrast(img, 1e-9);
    for (double v : q.data) CHECK(v == doctest::Approx(0.5).epsilon(1e-8));
    CHECK_THROWS_AS(contrast(img, 0.0), Error);
    CHECK_THROWS_AS(contrast(img, 1.5), Error);
}

TEST_CASE("lowpass of an impulse is the sampled gaussian")
{
    for (double sigma : {0.7, 2.0, 4.0}) {
        const int r = int(std::ceil(3 * sigma)), n = 2 * r + 21, c = n / 2;
        Image img(n, n, 1, 0.0);
        img.at(c, c, 0) = 1.0;
        Image out = lowpass_unclamped(img, sigma);
        std::vector<double> g(std::size_t(2 * r + 1));
        double s = 0;
        for (int k = -r; k <= r; ++k) s += g[std::size_t(k + r)] = std::exp(-k * k / (2 * sigma * sigma));
        for (double& v : g) v /= s;
        double worst = 0;
        for (int x = 0; x < n; ++x) {
            const int k = x - c;
            const double expect = std::abs(k) <= r ? g[std::size_t(k + r)] * g[std::size_t(r)] : 0.0;
            worst = std::max(worst, std::fabs(out.at(x, c, 0) - expect));
        }
        CHECK(worst < 1e-6);
        auto taps = gaussian_taps(sigma);
        CHECK(taps.size() == std::size_t(r + 1));
        CHECK(taps[0] == doctest::Approx(g[std::size_t(r)]).epsilon(1e-12));
    }
}

TEST_CASE("lowpass preserves constants and the mean")
{
    Image flat(20, 11, 3, 0.3);
    CHECK(testutil::max_abs_diff(lowpass(flat, 3.0), flat) < 1e-12);
    Image img = testutil::random_image(40, 30, 3, 4);
    for (double sigma : {1.0, 8.0, 16.0}) {
        auto m0 = testutil::channel_means(img), m1 = testutil::channel_means(lowpass(img, sigma));
        for (std::size_t c = 0; c < 3; ++c) CHECK(std::fabs(m1[c] - m0[c]) < 1e-6);
    }
}

TEST_CASE("highpass")
{
    Image flat(16, 16, 1, 0.7);
    for (double v : highpass(flat, 1.5).data) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));

    Image img = testutil::random_image(24, 20, 3, 6);
    Image hp = highpass(img, 1.0), lp = lowpass_unclamped(img, 1.0);
    for (std::size_t i = 0; i < img.data.size(); ++i)
        if (hp.data[i] > 0 && hp.data[i] < 1) CHECK(img.data[i] == doctest::Approx((hp.data[i] - 0.5) + lp.data[i]));

    Image step(60, 8, 1, 0.0);
    for (int y = 0; y < 8; ++y)
        for (int x = 30; x < 60; ++x) step.at(x, y, 0) = 1.0;
    Image e = highpass(step, 1.5);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 60; ++x) {
            if (x < 24 || x >= 36) CHECK(std::fabs(e.at(x, y, 0) - 0.5) < 1e-6);
            if (x < 30) CHECK(e.at(x, y, 0) <= 0.5);
            if (x >= 30) CHECK(e.at(x, y, 0) >= 0.5);
        }
}

TEST_CASE("blur corruptions commute with quarter turns")
{
    Image img = testutil::random_image(23, 17, 3, 7);
    for (double sigma : {0.45, 1.5, 4.0}) {
        CHECK(lowpass(testutil::rotate90(img), sigma) == testutil::rotate90(lowpass(img, sigma)));
        CHECK(highpass(testutil::rotate90(img), sigma) == testutil::rotate90(highpass(img, sigma)));
    }
}

TEST_CASE("uniform noise moments")
{
    Image gray(400, 250, 1, 0.5);
    RngStream rng(11, "noise");
    Image n = uniform_noise(gray, 0.6, rng);
    std::vector<double> d(n.data.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = n.data[i] - 0.5;
    const double sd = stddev(d);
    CHECK(std::fabs(sd - 0.6 / std::sqrt(12.0)) < 0.02 * 0.6 / std::sqrt(12.0));
    for (double v : d) CHECK(std::fabs(v) <= 0.3);

    RngStream g(11, "gauss");
    Image ng = uniform_noise(gray, 0.05, g, NoiseMode::gaussian);
    std::vector<double> dg(ng.data.size());
    for (std::size_t i = 0; i < dg.size(); ++i) dg[i] = ng.data[i] - 0.5;
    CHECK(std::fabs(stddev(dg) - 0.05) < 0.02 * 0.05);

    // one draw per pixel, shared by channels
    Image rgb(30, 30, 3, 0.5);
    RngStream r3(2, "rgb");
    Image o = uniform_noise(rgb, 0.4, r3);
    for (int y = 0; y < 30; ++y)
        for (int x = 0; x < 30; ++x) {
            CHECK(o.at(x, y, 0) == o.at(x, y, 1));
            CHECK(o.at(x, y, 0) == o.at(x, y, 2));
        }

    RngStream a(5, "k"), b(5, "k");
    Image img = testutil::random_image(16, 16, 3, 3);
    CHECK(uniform_noise(img, 0.35, a) == uniform_noise(img, 0.35, b));
    CHECK(uniform_noise(img, 0.0, a) == img);
}

TEST_CASE("phase noise keeps magnitudes and the mean")
{
    for (auto [w, h] : {std::pair{12, 10}, {9, 7}, {16, 16}}) {
        Image img = testutil::random_image(w, h, 3, std::uint64_t(w * h));
        RngStream rng(3, "phase");
        Image out = phase_noise_unclamped(img, 90.0, rng);
        CHECK(testutil::max_abs_diff(out, img) > 1e-3);
        for (int c = 0; c < 3; ++c) {
            auto m0 = dft_magnitudes(img, c), m1 = dft_magnitudes(out, c);
            double worst = 0;
            for (std::size_t i = 0; i < m0.size(); ++i) worst = std::max(worst, std::fabs(m0[i] - m1[i]));
            CHECK(worst < 1e-6);
        }
        auto a = testutil::channel_means(img), b = testutil::channel_means(out);
        for (std::size_t c = 0; c < 3; ++c) CHECK(std::fabs(a[c] - b[c]) < 1e-9);
    }
    Image img = testutil::random_image(20, 14, 3, 2);
    RngStream z(1, "zero");
    CHECK(testutil::max_abs_diff(phase_noise(img, 0.0, z), img) < 1e-6);
    RngStream p1(4, "p"), p2(4, "p");
    CHECK(phase_noise(img, 150, p1) == phase_noise(img, 150, p2));
}

TEST_CASE("identity intensities")
{
    Image img = testutil::random_image(32, 24, 3, 13);
    RngStream rng(1, "id");
    CHECK(corrupt(img, CorruptionKind::contrast, 1.0, rng) == img);
    CHECK(corrupt(img, CorruptionKind::lowpass, 0.0, rng) == img);
    CHECK(corrupt(img, CorruptionKind::highpass, 0.0, rng) == img);
    CHECK(corrupt(img, CorruptionKind::noise, 0.0, rng) == img);
    CHECK(testutil::max_abs_diff(corrupt(img, CorruptionKind::phase, 0.0, rng), img) < 1e-6);
}

TEST_CASE("intensity validation and naming")
{
    CHECK_THROWS_AS(check_intensity(CorruptionKind::contrast, 0.0), Error);
    CHECK_THROWS_AS(check_intensity(CorruptionKind::lowpass, -1.0), Error);
    CHECK_THROWS_AS(check_intensity(CorruptionKind::noise, -0.1), Error);
    CHECK_THROWS_AS(check_intensity(CorruptionKind::phase, 181.0), Error);
    CHECK_NOTHROW(check_intensity(CorruptionKind::phase, 180.0));
    CHECK_THROWS_AS(parse_corruption_kind("blur"), Error);
    for (auto k : {CorruptionKind::contrast, CorruptionKind::highpass, CorruptionKind::lowpass, CorruptionKind::noise,
                   CorruptionKind::phase})
        CHECK(parse_corruption_kind(corruption_kind_name(k)) == k);
    CHECK(intensity_tag(0.2) == "0.2");
    CHECK(intensity_tag(1.0) == "1");
    CHECK(variant_tag(CorruptionKind::contrast, 0.05) == "corrupt:contrast:0.05");
    CHECK(default_grid(CorruptionKind::contrast) == std::vector<double>{1.0, 0.5, 0.3, 0.2, 0.1, 0.05});
    CHECK(default_grid(CorruptionKind::phase).size() == 6);
}

TEST_CASE("sweep")
{
    Image img = testutil::random_image(16, 16, 3, 9);
    auto s = sweep(img, CorruptionKind::contrast, default_grid(CorruptionKind::contrast), 1, "a");
    REQUIRE(s.size() == 6);
    CHECK(s[0].first == 1.0);
    CHECK(s[0].second == img);
    CHECK(s[3].first == 0.2);
    CHECK(s[3].second == contrast(img, 0.2));

    auto n1 = sweep(img, CorruptionKind::noise, {0.1, 0.2}, 5, "a");
    auto n2 = sweep(img, CorruptionKind::noise, {0.2}, 5, "a");
    CHECK(n1[1].second == n2[0].second);
    auto n3 = sweep(img, CorruptionKind::noise, {0.2}, 5, "b");
    CHECK(n3[0].second != n2[0].second);
    CHECK_THROWS_AS(sweep(img, CorruptionKind::noise, {}, 5, "a"), Error);
}
