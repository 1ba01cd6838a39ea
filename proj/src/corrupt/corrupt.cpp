#include "corrupt/corrupt.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "common/error.hpp"

namespace cuedecomp {

CorruptionKind parse_corruption_kind(const std::string& s)
{
    if (s == "contrast") return CorruptionKind::contrast;
    if (s == "highpass") return CorruptionKind::highpass;
    if (s == "lowpass") return CorruptionKind::lowpass;
    if (s == "noise") return CorruptionKind::noise;
    if (s == "phase") return CorruptionKind::phase;
    fail(Errc::invalid_argument, "unknown corruption kind '" + s + "' (contrast|highpass|lowpass|noise|phase)");
}

const char* corruption_kind_name(CorruptionKind k)
{
    switch (k) {
    case CorruptionKind::contrast: return "contrast";
    case CorruptionKind::highpass: return "highpass";
    case CorruptionKind::lowpass: return "lowpass";
    case CorruptionKind::noise: return "noise";
    case CorruptionKind::phase: return "phase";
    }
    return "?";
}

NoiseMode parse_noise_mode(const std::string& s)
{
    if (s == "uniform") return NoiseMode::uniform;
    if (s == "gaussian") return NoiseMode::gaussian;
    fail(Errc::invalid_argument, "unknown noise mode '" + s + "' (uniform|gaussian)");
}

const char* noise_mode_name(NoiseMode m)
{
    return m == NoiseMode::uniform ? "uniform" : "gaussian";
}

void check_intensity(CorruptionKind kind, double v)
{
    const std::string what = std::string(corruption_kind_name(kind)) + " intensity " + intensity_tag(v);
    require(std::isfinite(v), Errc::out_of_range, what + " is not finite");
    switch (kind) {
    case CorruptionKind::contrast: require(v > 0 && v <= 1, Errc::out_of_range, what + " outside (0,1]"); break;
    case CorruptionKind::highpass:
    case CorruptionKind::lowpass: require(v >= 0, Errc::out_of_range, what + ": sigma must be >= 0"); break;
    case CorruptionKind::noise: require(v >= 0, Errc::out_of_range, what + ": width must be >= 0"); break;
    case CorruptionKind::phase: require(v >= 0 && v <= 180, Errc::out_of_range, what + " outside [0,180]"); break;
    }
}

Image contrast(const Image& img, double c)
{
    check_intensity(CorruptionKind::contrast, c);
    validate(img);
    Image out = img;
    if (c == 1.0) return out; // (v - 0.5) + 0.5 is not always v in floating point
    for (double& v : out.data) v = std::clamp((v - 0.5) * c + 0.5, 0.0, 1.0);
    return out;
}

namespace {

inline int reflect(long i, long n)
{
    const long p = 2 * n;
    long m = i % p;
    if (m < 0) m += p;
    return int(m < n ? m : p - 1 - m);
}

// One 1-D pass along x (dir 0) or y (dir 1). Mirror taps are added before
// weighting so reversing the axis gives bitwise the same sums.
void blur_pass(const std::vector<double>& in, std::vector<double>& out, int w, int h, int c, int dir,
               const std::vector<double>& taps)
{
    const int r = int(taps.size()) - 1;
    const int n = dir == 0 ? w : h;
    std::vector<int> idx(std::size_t(n + 2 * r));
    for (int i = -r; i < n + r; ++i) idx[std::size_t(i + r)] = reflect(i, n);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int pos = dir == 0 ? x : y;
            for (int ch = 0; ch < c; ++ch) {
                auto sample = [&](int k) {
                    const int j = idx[std::size_t(pos + k + r)];
                    return dir == 0 ? in[(std::size_t(y) * w + j) * c + ch] : in[(std::size_t(j) * w + x) * c + ch];
                };
                double acc = taps[0] * sample(0);
                for (int k = 1; k <= r; ++k) acc += taps[std::size_t(k)] * (sample(-k) + sample(k));
                out[(std::size_t(y) * w + x) * c + ch] = acc;
            }
        }
    }
}

} // namespace

std::vector<double> gaussian_taps(double sigma)
{
    require(std::isfinite(sigma) && sigma > 0, Errc::out_of_range, "sigma must be > 0");
    const int r = int(std::ceil(3.0 * sigma));
    std::vector<double> t(std::size_t(r) + 1);
    for (int k = 0; k <= r; ++k) t[std::size_t(k)] = std::exp(-0.5 * (k * k) / (sigma * sigma));
    double sum = 0;
    for (int k = r; k >= 1; --k) sum += 2.0 * t[std::size_t(k)];
    sum += t[0];
    for (double& v : t) v /= sum;
    return t;
}

Image lowpass_unclamped(const Image& img, double sigma)
{
    check_intensity(CorruptionKind::lowpass, sigma);
    validate(img);
    if (sigma == 0) return img;
    const auto taps = gaussian_taps(sigma);
    const int w = img.width, h = img.height, c = img.channels;
    std::vector<double> t(img.data.size()), hv(img.data.size()), vh(img.data.size());
    blur_pass(img.data, t, w, h, c, 0, taps);
    blur_pass(t, hv, w, h, c, 1, taps);
    blur_pass(img.data, t, w, h, c, 1, taps);
    blur_pass(t, vh, w, h, c, 0, taps);
    Image out(w, h, c);
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = 0.5 * (hv[i] + vh[i]);
    return out;
}

Image lowpass(const Image& img, double sigma)
{
    Image out = lowpass_unclamped(img, sigma);
    clamp_unit(out);
    return out;
}

Image highpass(const Image& img, double sigma)
{
    check_intensity(CorruptionKind::highpass, sigma);
    validate(img);
    if (sigma == 0) return img;
    const Image low = lowpass_unclamped(img, sigma);
    Image out = img;
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = std::clamp(img.data[i] - low.data[i] + 0.5, 0.0, 1.0);
    return out;
}

Image uniform_noise(const Image& img, double width, RngStream& rng, NoiseMode mode)
{
    check_intensity(CorruptionKind::noise, width);
    validate(img);
    Image out = img;
    const std::size_t c = std::size_t(img.channels);
    for (std::size_t p = 0; p < img.pixels(); ++p) {
        const double n = mode == NoiseMode::uniform ? width * (rng.uniform() - 0.5) : width * rng.normal();
        for (std::size_t ch = 0; ch < c; ++ch) out.data[p * c + ch] = std::clamp(img.data[p * c + ch] + n, 0.0, 1.0);
    }
    return out;
}

namespace {

std::mutex& fftw_planner_mutex()
{
    static std::mutex m;
    return m;
}

struct FftwBuffer {
    explicit FftwBuffer(std::size_t n) : p(fftw_alloc_complex(n))
    {
        if (!p) throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(p); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    fftw_complex* p;
};

struct FftwPlan {
    FftwPlan(int h, int w, fftw_complex* in, fftw_complex* out, int sign)
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        plan = fftw_plan_dft_2d(h, w, in, out, sign, FFTW_ESTIMATE);
        require(plan != nullptr, Errc::invalid_argument, "FFT planning failed");
    }
    ~FftwPlan()
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    FftwPlan(const FftwPlan&) = delete;
    FftwPlan& operator=(const FftwPlan&) = delete;
    fftw_plan plan;
};

} // namespace

Image phase_noise_unclamped(const Image& img, double width_degrees, RngStream& rng)
{
    check_intensity(CorruptionKind::phase, width_degrees);
    validate(img);
    const int w = img.width, h = img.height, c = img.channels;
    const std::size_t n = img.pixels();

    // rotation per frequency, drawn once per conjugate pair in row-major order
    std::vector<std::complex<double>> rot(n, {1.0, 0.0});
    const double scale = width_degrees * std::numbers::pi / 180.0;
    for (int ky = 0; ky < h; ++ky) {
        for (int kx = 0; kx < w; ++kx) {
            const std::size_t i = std::size_t(ky) * w + kx;
            const std::size_t j = std::size_t((h - ky) % h) * w + std::size_t((w - kx) % w);
            if (j <= i) continue; // self-conjugate or already drawn
            const double phi = scale * (2.0 * rng.uniform() - 1.0);
            rot[i] = {std::cos(phi), std::sin(phi)};
            rot[j] = std::conj(rot[i]);
        }
    }

    FftwBuffer buf(n), spec(n);
    FftwPlan fwd(h, w, buf.p, spec.p, FFTW_FORWARD);
    FftwPlan inv(h, w, spec.p, buf.p, FFTW_BACKWARD);
    Image out(w, h, c);
    for (int ch = 0; ch < c; ++ch) {
        for (std::size_t p = 0; p < n; ++p) {
            buf.p[p][0] = img.data[p * std::size_t(c) + std::size_t(ch)];
            buf.p[p][1] = 0.0;
        }
        fftw_execute_dft(fwd.plan, buf.p, spec.p);
        for (std::size_t p = 0; p < n; ++p) {
            const std::complex<double> z = std::complex<double>(spec.p[p][0], spec.p[p][1]) * rot[p];
            spec.p[p][0] = z.real();
            spec.p[p][1] = z.imag();
        }
        fftw_execute_dft(inv.plan, spec.p, buf.p);
        for (std::size_t p = 0; p < n; ++p) out.data[p * std::size_t(c) + std::size_t(ch)] = buf.p[p][0] / double(n);
    }
    return out;
}

Image phase_noise(const Image& img, double width_degrees, RngStream& rng)
{
    Image out = phase_noise_unclamped(img, width_degrees, rng);
    clamp_unit(out);
    return out;
}

Image corrupt(const Image& img, CorruptionKind kind, double intensity, RngStream& rng, const CorruptionOptions& opt)
{
    switch (kind) {
    case CorruptionKind::contrast: return contrast(img, intensity);
    case CorruptionKind::highpass: return highpass(img, intensity);
    case CorruptionKind::lowpass: return lowpass(img, intensity);
    case CorruptionKind::noise: return uniform_noise(img, intensity, rng, opt.noise_mode);
    case CorruptionKind::phase: return phase_noise(img, intensity, rng);
    }
    fail(Errc::invalid_argument, "unknown corruption kind");
}

std::string intensity_tag(double v)
{
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string variant_tag(CorruptionKind kind, double intensity)
{
    return std::string("corrupt:") + corruption_kind_name(kind) + ":" + intensity_tag(intensity);
}

RngStream corruption_stream(std::uint64_t seed, const std::string& sample_id, CorruptionKind kind, double intensity)
{
    return RngStream(seed, sample_id + "/" + corruption_kind_name(kind) + ":" + intensity_tag(intensity));
}

std::vector<std::pair<double, Image>> sweep(const Image& img, CorruptionKind kind, const std::vector<double>& grid,
                                            std::uint64_t seed, const std::string& sample_id,
                                            const CorruptionOptions& opt)
{
    require(!grid.empty(), Errc::invalid_argument, "empty intensity grid");
    for (double v : grid) check_intensity(kind, v);
    std::vector<std::pair<double, Image>> out;
    out.reserve(grid.size());
    for (double v : grid) {
        RngStream rng = corruption_stream(seed, sample_id, kind, v);
        out.emplace_back(v, corrupt(img, kind, v, rng, opt));
    }
    return out;
}

std::vector<double> default_grid(CorruptionKind kind)
{
    switch (kind) {
    case CorruptionKind::contrast: return {1.0, 0.5, 0.3, 0.2, 0.1, 0.05};
    case CorruptionKind::lowpass: return {1, 2, 4, 8, 16};
    case CorruptionKind::highpass: return {3, 1.5, 1.0, 0.7, 0.45};
    case CorruptionKind::noise: return {0, 0.1, 0.2, 0.35, 0.6, 0.9};
    case CorruptionKind::phase: return {0, 30, 60, 90, 120, 150};
    }
    return {};
}

} // namespace cuedecomp
