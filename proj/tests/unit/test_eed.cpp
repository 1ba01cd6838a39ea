#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "common/error.hpp"
#include "eed/eed.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace cuedecomp;

namespace {

DiffusionTensorField identity_field(int w, int h)
{
    DiffusionTensorField f(w, h);
    std::fill(f.xx.begin(), f.xx.end(), 1.0);
    std::fill(f.yy.begin(), f.yy.end(), 1.0);
    return f;
}

EedParams small_params(int steps)
{
    EedParams p;
    p.steps = steps;
    return p;
}

} // namespace

TEST_CASE("presmoothing kernel")
{
    auto k = gaussian_kernel(5, std::sqrt(5.0));
    REQUIRE(k.size() == 5);
    double raw[5], s = 0;
    for (int i = 0; i < 5; ++i) s += raw[i] = std::exp(-double((i - 2) * (i - 2)) / 10.0);
    for (int i = 0; i < 5; ++i) CHECK(k[std::size_t(i)] == doctest::Approx(raw[i] / s).epsilon(1e-14));
    CHECK(k[0] == doctest::Approx(0.1615).epsilon(1e-3));
    CHECK(k[1] == doctest::Approx(0.2180).epsilon(1e-3));
    CHECK(k[2] == doctest::Approx(0.2410).epsilon(1e-3));
    CHECK(gaussian_kernel(1, 3.0) == std::vector<double>{1.0});
    for (int n : {3, 7, 15})
        for (double sg : {0.3, 1.0, 4.0}) {
            auto kk = gaussian_kernel(n, sg);
            double t = 0;
            for (double v : kk) t += v;
            CHECK(std::fabs(t - 1) < 1e-12);
        }
    CHECK_THROWS_AS(gaussian_kernel(4, 1.0), Error);
    CHECK_THROWS_AS(gaussian_kernel(5, 0.0), Error);
}

TEST_CASE("charbonnier diffusivity")
{
    CHECK(charbonnier(0, 0.3) == 1.0);
    for (double k : {0.1, 1.0, 7.0}) CHECK(charbonnier(k * k, k) == doctest::Approx(1 / std::sqrt(2.0)));
    CHECK(charbonnier(4.0 / 225, 1.0 / 15) == doctest::Approx(1 / std::sqrt(5.0)));
    CHECK(charbonnier(1, 1) > charbonnier(2, 1));
    CHECK_THROWS_AS(charbonnier(-1, 1), Error);
}

TEST_CASE("structure tensor basics")
{
    EedParams p;
    auto zero = structure_tensor(Image(9, 9, 3, 0.4), p);
    for (std::size_t i = 0; i < zero.size(); ++i) {
        CHECK(zero.xx[i] == 0.0);
        CHECK(zero.xy[i] == 0.0);
        CHECK(zero.yy[i] == 0.0);
    }

    Image edge(12, 8, 1, 0.0);
    for (int y = 0; y < 8; ++y)
        for (int x = 6; x < 12; ++x) edge.at(x, y, 0) = 1.0;
    auto st = structure_tensor(edge, p);
    CHECK(st.xx[std::size_t(4 * 12 + 5)] > 0);
    for (std::size_t i = 0; i < st.size(); ++i) {
        CHECK(st.xy[i] == 0.0);
        CHECK(st.yy[i] == 0.0);
    }

    Image g = testutil::random_image(10, 7, 1, 3);
    Image rgb(10, 7, 3);
    for (int y = 0; y < 7; ++y)
        for (int x = 0; x < 10; ++x)
            for (int c = 0; c < 3; ++c) rgb.at(x, y, c) = g.at(x, y, 0);
    auto s1 = structure_tensor(g, p), s3 = structure_tensor(rgb, p);
    for (std::size_t i = 0; i < s1.size(); ++i) {
        CHECK(s3.xx[i] == doctest::Approx(3 * s1.xx[i]).epsilon(1e-12));
        CHECK(s3.xy[i] == doctest::Approx(3 * s1.xy[i]).epsilon(1e-12));
        CHECK(s3.yy[i] == doctest::Approx(3 * s1.yy[i]).epsilon(1e-12));
    }

    auto sr = structure_tensor(testutil::random_image(32, 32, 3, 11), p);
    for (std::size_t i = 0; i < sr.size(); ++i) {
        CHECK(sr.xx[i] >= 0);
        CHECK(sr.yy[i] >= 0);
        CHECK(sr.xy[i] * sr.xy[i] <= sr.xx[i] * sr.yy[i] + 1e-9);
    }
}

TEST_CASE("diffusion tensor closed forms")
{
    double d11, d12, d22;
    diffusion_tensor_at(0, 0, 0, 0.5, d11, d12, d22);
    CHECK(d11 == 1.0);
    CHECK(d12 == 0.0);
    CHECK(d22 == 1.0);

    const double a = 0.7;
    diffusion_tensor_at(a * a, 0, 0, 1.0, d11, d12, d22);
    CHECK(d11 == doctest::Approx(charbonnier(a * a, 1.0)).epsilon(1e-14));
    CHECK(std::fabs(d12) < 1e-15);
    CHECK(d22 == doctest::Approx(1.0).epsilon(1e-14));

    // rank-one tensor along (1,1)/sqrt2 with eigenvalue mu
    const double mu = 0.09, g = charbonnier(mu, 0.2);
    diffusion_tensor_at(mu / 2, mu / 2, mu / 2, 0.2, d11, d12, d22);
    CHECK(d12 == doctest::Approx((g - 1) / 2).epsilon(1e-12));
    CHECK(d11 == doctest::Approx((g + 1) / 2).epsilon(1e-12));
    CHECK(d22 == doctest::Approx((g + 1) / 2).epsilon(1e-12));

    EedParams p;
    auto dt = diffusion_tensor(structure_tensor(testutil::random_image(24, 24, 3, 8), p), 1.0 / 15 / 255);
    for (std::size_t i = 0; i < dt.size(); ++i) {
        const double tr = dt.xx[i] + dt.yy[i], det = dt.xx[i] * dt.yy[i] - dt.xy[i] * dt.xy[i];
        const double disc = std::sqrt(std::max(0.0, tr * tr / 4 - det));
        CHECK(tr / 2 - disc > 0);
        CHECK(tr / 2 + disc <= 1 + 1e-12);
    }
}

TEST_CASE("selling decomposition reconstructs the tensor")
{
    RngStream rng(5, "selling");
    double worst = 0;
    for (int i = 0; i < 20000; ++i) {
        // random eigenvalues spanning strong anisotropy
        const double l1 = std::pow(10.0, -6 * rng.uniform()), l2 = 1.0;
        const double th = rng.uniform() * M_PI, c = std::cos(th), s = std::sin(th);
        const double d11 = l1 * c * c + l2 * s * s, d22 = l1 * s * s + l2 * c * c, d12 = (l1 - l2) * c * s;
        auto dec = selling_decompose(d11, d12, d22);
        double r11 = 0, r12 = 0, r22 = 0;
        for (int k = 0; k < 3; ++k) {
            CHECK(dec.rho[std::size_t(k)] >= 0);
            r11 += dec.rho[std::size_t(k)] * dec.ex[std::size_t(k)] * dec.ex[std::size_t(k)];
            r12 += dec.rho[std::size_t(k)] * dec.ex[std::size_t(k)] * dec.ey[std::size_t(k)];
            r22 += dec.rho[std::size_t(k)] * dec.ey[std::size_t(k)] * dec.ey[std::size_t(k)];
        }
        worst = std::max({worst, std::fabs(r11 - d11), std::fabs(r12 - d12), std::fabs(r22 - d22)});
    }
    CHECK(worst < 1e-9);

    auto id = selling_decompose(1, 0, 1);
    double axis = 0;
    for (int k = 0; k < 3; ++k)
        if (std::abs(id.ex[std::size_t(k)]) + std::abs(id.ey[std::size_t(k)]) == 1) axis += id.rho[std::size_t(k)];
    CHECK(axis == doctest::Approx(2.0));
}

TEST_CASE("identity tensor step equals the five-point heat step")
{
    for (int c : {1, 3}) {
        Image u = testutil::random_image(5, 5, c, 17);
        Image got = diffuse_step(u, identity_field(5, 5), 0.2);
        CHECK(testutil::max_abs_diff(got, oracle::heat_step(u, 0.2)) < 1e-12);
    }
    Image u = testutil::random_image(13, 6, 1, 2);
    CHECK(testutil::max_abs_diff(diffuse_step(u, identity_field(13, 6), 0.25), oracle::heat_step(u, 0.25)) < 1e-12);
    CHECK(max_weight_sum(identity_field(4, 4)) == doctest::Approx(4.0));
}

TEST_CASE("diffuse_step is conservative and keeps constants fixed")
{
    EedParams p;
    Image u = testutil::random_image(20, 16, 3, 4);
    auto dt = diffusion_tensor(structure_tensor(u, p), p.kappa / p.intensity_range);
    const double tau = std::min(0.2, 1.0 / max_weight_sum(dt));
    Image v = diffuse_step(u, dt, tau);
    auto m0 = testutil::channel_means(u), m1 = testutil::channel_means(v);
    for (std::size_t c = 0; c < m0.size(); ++c) CHECK(std::fabs(m1[c] - m0[c]) <= 1e-10 * m0[c]);

    Image flat(20, 16, 3, 0.37);
    CHECK(diffuse_step(flat, dt, tau) == flat);

    CHECK_THROWS_AS(diffuse_step(u, identity_field(20, 16), 0.3), Error);
    CHECK_THROWS_AS(diffuse_step(u, identity_field(20, 16), 0.0), Error);
    CHECK_THROWS_AS(diffuse_step(u, identity_field(19, 16), 0.1), Error);
}

TEST_CASE("parameter validation and json")
{
    EedParams p;
    CHECK_NOTHROW(p.validate());
    EedParams bad = p;
    bad.kappa = 0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = p;
    bad.tau = 0.3;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = p;
    bad.steps = -1;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = p;
    bad.presmooth_kernel_size = 4;
    CHECK_THROWS_AS(bad.validate(), Error);
    EedParams q = p;
    q.steps = 7;
    q.tau = 0.125;
    CHECK(eed_params_from_json(to_json(q)) == q);
    CHECK_THROWS_AS(eed_params_from_json(nlohmann::json{{"stepz", 3}}), Error);
}

TEST_CASE("run_eed trivial cases")
{
    Image u = testutil::random_image(16, 16, 3, 1);
    CHECK(run_eed(u, small_params(0)) == u);
    Image flat(16, 16, 3, 0.25);
    CHECK(run_eed(flat, small_params(50)) == flat);
}

TEST_CASE("run_eed conserves mass, respects extrema, commutes with rotation")
{
    const int steps = 100;
    Image rnd = testutil::random_image(32, 32, 3, 21);
    Image disk = testutil::disk_image(32, 10, 0.1);
    for (const Image* u : {&rnd, &disk}) {
        Image v = run_eed_unclamped(*u, small_params(steps));
        auto m0 = testutil::channel_means(*u), m1 = testutil::channel_means(v);
        for (std::size_t c = 0; c < m0.size(); ++c) CHECK(std::fabs(m1[c] - m0[c]) <= 1e-6 * m0[c]);
        const auto [lo0, hi0] = std::minmax_element(u->data.begin(), u->data.end());
        const auto [lo1, hi1] = std::minmax_element(v.data.begin(), v.data.end());
        CHECK(*hi1 <= *hi0 + 1e-7 * steps);
        CHECK(*lo1 >= *lo0 - 1e-7 * steps);

        Image a = run_eed_unclamped(testutil::rotate90(*u), small_params(steps));
        Image b = testutil::rotate90(v);
        CHECK(testutil::max_abs_diff(a, b) <= 1e-12);
    }
}

TEST_CASE("disk keeps its boundary while interior texture is removed")
{
    const int n = 64;
    const double r = 20;
    Image u = testutil::disk_image(n, r, 0.1);
    Image v = run_eed(u, small_params(2000));

    auto interior_var = [&](const Image& img) {
        const double c = (n - 1) / 2.0;
        double s = 0, s2 = 0;
        int k = 0;
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x)
                if (std::hypot(x - c, y - c) <= r - 4) {
                    s += img.at(x, y, 0);
                    s2 += img.at(x, y, 0) * img.at(x, y, 0);
                    ++k;
                }
        return s2 / k - (s / k) * (s / k);
    };
    // half-intensity crossing along the ray from the centre to the right
    auto crossing = [&](const Image& img) {
        const int y = n / 2;
        const double half = 0.5 * img.at(n / 2, y, 0) + 0.5 * img.at(n - 1, y, 0);
        for (int x = n / 2; x + 1 < n; ++x) {
            const double a = img.at(x, y, 0), b = img.at(x + 1, y, 0);
            if (a >= half && b < half) return x + (a - half) / (a - b);
        }
        return -1.0;
    };
    Image smooth = testutil::disk_image(n, r, 0.0);
    const double shift = std::fabs(crossing(v) - crossing(smooth));
    MESSAGE("boundary shift " << shift << " px, variance " << interior_var(u) << " -> " << interior_var(v));
    CHECK(shift < 1.0);
    CHECK(interior_var(v) <= 0.5 * interior_var(u));
}
