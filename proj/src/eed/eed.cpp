#include "eed/eed.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "common/error.hpp"

namespace cuedecomp {

void EedParams::validate() const
{
    require(std::isfinite(kappa) && kappa > 0, Errc::invalid_argument, "kappa must be > 0");
    require(presmooth_kernel_size >= 1 && presmooth_kernel_size % 2 == 1, Errc::invalid_argument,
            "presmooth_kernel_size must be odd and >= 1");
    require(std::isfinite(presmooth_sigma) && presmooth_sigma > 0, Errc::invalid_argument,
            "presmooth_sigma must be > 0");
    require(steps >= 0, Errc::invalid_argument, "steps must be >= 0");
    require(std::isfinite(tau) && tau > 0 && tau <= 0.25, Errc::invalid_argument, "tau must lie in (0, 0.25]");
    require(std::isfinite(intensity_range) && intensity_range > 0, Errc::invalid_argument,
            "intensity_range must be > 0");
}

nlohmann::json to_json(const EedParams& p)
{
    return {{"kappa", p.kappa},
            {"presmooth_kernel_size", p.presmooth_kernel_size},
            {"presmooth_sigma", p.presmooth_sigma},
            {"steps", p.steps},
            {"tau", p.tau},
            {"intensity_range", p.intensity_range}};
}

EedParams eed_params_from_json(const nlohmann::json& j, EedParams p)
{
    require(j.is_object(), Errc::invalid_argument, "eed parameters must be a JSON object");
    try {
        for (auto it = j.begin(); it != j.end(); ++it) {
            const auto& k = it.key();
            if (k == "kappa")
                p.kappa = it->get<double>();
            else if (k == "presmooth_kernel_size")
                p.presmooth_kernel_size = it->get<int>();
            else if (k == "presmooth_sigma")
                p.presmooth_sigma = it->get<double>();
            else if (k == "steps")
                p.steps = it->get<int>();
            else if (k == "tau")
                p.tau = it->get<double>();
            else if (k == "intensity_range")
                p.intensity_range = it->get<double>();
            else
                fail(Errc::invalid_argument, "unknown eed parameter '" + k + "'");
        }
    } catch (const nlohmann::json::exception& ex) {
        fail(Errc::invalid_argument, std::string("bad eed parameter: ") + ex.what());
    }
    return p;
}

TensorField::TensorField(int w, int h)
    : width(w), height(h), xx(std::size_t(w) * h), xy(std::size_t(w) * h), yy(std::size_t(w) * h)
{
}

std::vector<double> gaussian_kernel(int size, double sigma)
{
    require(size >= 1 && size % 2 == 1, Errc::invalid_argument, "kernel size must be odd and >= 1");
    require(std::isfinite(sigma) && sigma > 0, Errc::invalid_argument, "sigma must be > 0");
    const int r = size / 2;
    std::vector<double> w(static_cast<std::size_t>(size));
    for (int k = -r; k <= r; ++k) w[std::size_t(k + r)] = std::exp(-double(k) * k / (2.0 * sigma * sigma));
    // pairwise from the tails inwards so the sum is mirror-symmetric
    double sum = w[std::size_t(r)];
    for (int k = r; k >= 1; --k) sum += w[std::size_t(r - k)] + w[std::size_t(r + k)];
    for (auto& v : w) v /= sum;
    return w;
}

double charbonnier(double s, double kappa)
{
    require(s >= 0, Errc::invalid_argument, "charbonnier: negative argument");
    require(kappa > 0, Errc::invalid_argument, "charbonnier: kappa must be > 0");
    return 1.0 / std::sqrt(1.0 + s / (kappa * kappa));
}

void diffusion_tensor_at(double j11, double j12, double j22, double kappa, double& d11, double& d12, double& d22)
{
    const double diff = j11 - j22;
    const double delta = std::sqrt(diff * diff + 4.0 * j12 * j12);
    const double mu1 = 0.5 * (j11 + j22 + delta);
    const double g = 1.0 / std::sqrt(1.0 + mu1 / (kappa * kappa));
    // cos(2 theta), sin(2 theta) of the dominant eigenvector; ties pick the x axis
    const bool aniso = delta > 0;
    const double r = aniso ? diff / delta : 1.0;
    const double s = aniso ? j12 / delta : 0.0;
    // below the threshold the tensor is exactly the identity
    const double gm1 = mu1 >= 1e-12 ? g - 1.0 : 0.0;
    d11 = 1.0 + gm1 * 0.5 * (1.0 + r);
    d22 = 1.0 + gm1 * 0.5 * (1.0 - r);
    d12 = gm1 * s;
}

namespace {

// Reduced lattice basis (u, v); the superbase is (u, v, -u-v).
struct Basis {
    double u0 = 1, u1 = 0, v0 = 0, v1 = 1;
};

inline double metric_dot(double a, double b, double c, double p0, double p1, double q0, double q1)
{
    return a * (p0 * q0) + b * (p0 * q1 + p1 * q0) + c * (p1 * q1);
}

// Lagrange-Gauss reduction of the integer lattice under the metric D. A
// reduced pair with <u,Dv> <= 0 spans an obtuse superbase. Vectors hold small
// integers, exact in double.
void reduce(double a, double b, double c, Basis& bs, double& nu, double& nv, double& puv)
{
    // selects instead of branches: the swaps are close to random on textured input
    const bool sw0 = c < a;
    double u0 = sw0 ? 0 : 1, u1 = sw0 ? 1 : 0, v0 = sw0 ? 1 : 0, v1 = sw0 ? 0 : 1;
    nu = sw0 ? c : a;
    nv = sw0 ? a : c;
    puv = b;
    for (int iter = 0; iter < 64; ++iter) {
        // reduced once |<u,Dv>| <= |u|_D^2 / 2
        if (2.0 * puv >= -nu && 2.0 * puv < nu) break;
        // round-half-up via truncation; |q| stays far below 2^52
        const double q = puv / nu + 0.5;
        double m = double(static_cast<long long>(q));
        m = m > q ? m - 1.0 : m;
        v0 -= m * u0;
        v1 -= m * u1;
        nv = metric_dot(a, b, c, v0, v1, v0, v1);
        puv = metric_dot(a, b, c, u0, u1, v0, v1);
        const bool sw = nv < nu;
        const double t0 = u0, t1 = u1, tn = nu;
        u0 = sw ? v0 : u0;
        u1 = sw ? v1 : u1;
        nu = sw ? nv : nu;
        v0 = sw ? t0 : v0;
        v1 = sw ? t1 : v1;
        nv = sw ? tn : nv;
    }
    const double sg = puv > 0 ? -1.0 : 1.0;
    puv *= sg;
    bs = {u0, u1, sg * v0, sg * v1};
}

SellingDecomposition decompose(double a, double b, double c)
{
    SellingDecomposition d{};
    const double ab = std::fabs(b);
    if (ab <= a && ab <= c) {
        // the canonical superbase is already obtuse: axes plus one diagonal
        d.rho = {a - ab, c - ab, ab};
        d.ex = {1, 0, 1};
        d.ey = {0, 1, b >= 0 ? 1 : -1};
        return d;
    }
    Basis bs;
    double nu = 0, nv = 0, puv = 0;
    reduce(a, b, c, bs, nu, nv, puv);
    // weight of each pair of the superbase sits on the perpendicular of the
    // remaining vector
    d.rho = {std::max(0.0, -puv), std::max(0.0, nu + puv), std::max(0.0, nv + puv)};
    const double third[3][2] = {{-bs.u0 - bs.v0, -bs.u1 - bs.v1}, {bs.v0, bs.v1}, {bs.u0, bs.u1}};
    for (int n = 0; n < 3; ++n) {
        long ex = -long(third[n][1]), ey = long(third[n][0]);
        if (ex < 0 || (ex == 0 && ey < 0)) {
            ex = -ex;
            ey = -ey;
        }
        d.ex[std::size_t(n)] = int(ex);
        d.ey[std::size_t(n)] = int(ey);
    }
    return d;
}

void decompose_field(const TensorField& dt, std::vector<SellingDecomposition>& dec)
{
    dec.resize(dt.size());
    for (std::size_t i = 0; i < dt.size(); ++i) dec[i] = decompose(dt.xx[i], dt.xy[i], dt.yy[i]);
}

} // namespace

SellingDecomposition selling_decompose(double a, double b, double c)
{
    return decompose(a, b, c);
}

namespace {

inline int reflect(int i, int n)
{
    const int period = 2 * n;
    int m = i % period;
    if (m < 0) m += period;
    return m < n ? m : period - 1 - m;
}

// Separable Gaussian on an interleaved raster, half-sample reflection.
class Smoother {
public:
    Smoother(int w, int h, int ch, const std::vector<double>& kernel)
        : w_(w), h_(h), c_(ch), r_(int(kernel.size() / 2)), weights_(std::size_t(r_) + 1),
          pad_(std::size_t(w + 2 * r_) * ch), tmp_(std::size_t(w) * h * ch), rows_(std::size_t(h + 2 * r_)),
          xidx_(std::size_t(w + 2 * r_))
    {
        for (int k = 0; k <= r_; ++k) weights_[std::size_t(k)] = kernel[std::size_t(r_ + k)];
        for (int j = 0; j < w + 2 * r_; ++j) xidx_[std::size_t(j)] = reflect(j - r_, w);
        for (int j = 0; j < h + 2 * r_; ++j) rows_[std::size_t(j)] = reflect(j - r_, h);
    }

    void run(const double* in, double* out)
    {
        const int C = c_, R = r_;
        const double* wk = weights_.data();
        for (int y = 0; y < h_; ++y) {
            const double* row = in + std::size_t(y) * w_ * C;
            for (int j = 0; j < w_ + 2 * R; ++j)
                for (int ch = 0; ch < C; ++ch)
                    pad_[std::size_t(j) * C + ch] = row[std::size_t(xidx_[std::size_t(j)]) * C + ch];
            double* dst = tmp_.data() + std::size_t(y) * w_ * C;
            const double* p = pad_.data() + std::size_t(R) * C;
            const int n = w_ * C;
            if (R == 2 && C == 3)
                hpass<2, 3>(p, dst, n, wk);
            else if (R == 2 && C == 1)
                hpass<2, 1>(p, dst, n, wk);
            else
                for (int i = 0; i < n; ++i) {
                    double acc = wk[0] * p[i];
                    for (int k = 1; k <= R; ++k) acc += wk[k] * (p[i - k * C] + p[i + k * C]);
                    dst[i] = acc;
                }
        }
        const std::size_t stride = std::size_t(w_) * C;
        const int n = w_ * C;
        for (int y = 0; y < h_; ++y) {
            double* dst = out + std::size_t(y) * stride;
            const double* mid = tmp_.data() + std::size_t(rows_[std::size_t(y + R)]) * stride;
            for (int i = 0; i < n; ++i) dst[i] = wk[0] * mid[i];
            for (int k = 1; k <= R; ++k) {
                const double* up = tmp_.data() + std::size_t(rows_[std::size_t(y + R - k)]) * stride;
                const double* dn = tmp_.data() + std::size_t(rows_[std::size_t(y + R + k)]) * stride;
                const double wv = wk[k];
                for (int i = 0; i < n; ++i) dst[i] += wv * (up[i] + dn[i]);
            }
        }
    }

private:
    template <int R, int C>
    static void hpass(const double* p, double* dst, int n, const double* wk)
    {
        for (int i = 0; i < n; ++i) {
            double acc = wk[0] * p[i];
            for (int k = 1; k <= R; ++k) acc += wk[k] * (p[i - k * C] + p[i + k * C]);
            dst[i] = acc;
        }
    }

    int w_, h_, c_, r_;
    std::vector<double> weights_;
    std::vector<double> pad_, tmp_;
    std::vector<int> rows_, xidx_;
};

// Structure tensor of one pixel from the smoothed raster s.
template <int C>
inline void structure_at(const double* s, int w, int h, int x, int y, double& j11, double& j12, double& j22)
{
    const int xm = x > 0 ? x - 1 : 0, xp = x < w - 1 ? x + 1 : w - 1;
    const int ym = y > 0 ? y - 1 : 0, yp = y < h - 1 ? y + 1 : h - 1;
    const double* l = s + (std::size_t(y) * w + xm) * C;
    const double* r = s + (std::size_t(y) * w + xp) * C;
    const double* u = s + (std::size_t(ym) * w + x) * C;
    const double* d = s + (std::size_t(yp) * w + x) * C;
    j11 = j12 = j22 = 0.0;
    for (int ch = 0; ch < C; ++ch) {
        const double gx = 0.5 * (r[ch] - l[ch]);
        const double gy = 0.5 * (d[ch] - u[ch]);
        j11 += gx * gx;
        j12 += gx * gy;
        j22 += gy * gy;
    }
}

// Pair fluxes of one pixel's stencil: half of each rho on the pair (i, i+e)
// and half on (i, i-e), scaled by tau and added straight into the new state
// un (initialized to u). Pairs leaving the image carry no flux. wsum collects
// the tau-scaled weight touching every pixel.
template <int C>
inline void scatter_pixel(const SellingDecomposition& d, double half_tau, int x, int y, int w, int h,
                          const double* u, double* un, double* wsum)
{
    const std::size_t i = std::size_t(y) * w + x;
    const double* ui = u + i * C;
    double* oi = un + i * C;
    const int rx = std::max({d.ex[0], d.ex[1], d.ex[2]});
    const int ry = std::max({std::abs(d.ey[0]), std::abs(d.ey[1]), std::abs(d.ey[2])});
    if (x >= rx && y >= ry && x + rx < w && y + ry < h) {
        for (int n = 0; n < 3; ++n) {
            const double wt = half_tau * d.rho[std::size_t(n)];
            const std::ptrdiff_t off = std::ptrdiff_t(d.ey[std::size_t(n)]) * w + d.ex[std::size_t(n)];
            const double* up = ui + off * C;
            const double* um = ui - off * C;
            double* op = oi + off * C;
            double* om = oi - off * C;
            for (int ch = 0; ch < C; ++ch) {
                const double fp = wt * (up[ch] - ui[ch]);
                const double fm = wt * (um[ch] - ui[ch]);
                oi[ch] += fp + fm;
                op[ch] -= fp;
                om[ch] -= fm;
            }
            wsum[i] += wt + wt;
            wsum[std::ptrdiff_t(i) + off] += wt;
            wsum[std::ptrdiff_t(i) - off] += wt;
        }
        return;
    }
    for (int n = 0; n < 3; ++n) {
        const double wt = half_tau * d.rho[std::size_t(n)];
        if (wt <= 0.0) continue;
        const int ex = d.ex[std::size_t(n)], ey = d.ey[std::size_t(n)];
        for (int sg = 1; sg >= -1; sg -= 2) {
            const int xx = x + sg * ex, yy = y + sg * ey;
            if (xx < 0 || yy < 0 || xx >= w || yy >= h) continue;
            const std::size_t j = std::size_t(yy) * w + xx;
            const double* uj = u + j * C;
            double* oj = un + j * C;
            for (int ch = 0; ch < C; ++ch) {
                const double f = wt * (uj[ch] - ui[ch]);
                oi[ch] += f;
                oj[ch] -= f;
            }
            wsum[i] += wt;
            wsum[j] += wt;
        }
    }
}

void check_tau(double tau, const std::vector<double>& wsum)
{
    const double maxw = wsum.empty() ? 0.0 : *std::max_element(wsum.begin(), wsum.end());
    if (maxw > 1.0 + 1e-12)
        fail(Errc::out_of_range, "tau " + std::to_string(tau) + " exceeds the stability bound " +
                                     std::to_string(tau / maxw) + " of the current tensor field");
}

void check_tau_positive(double tau)
{
    require(std::isfinite(tau) && tau > 0, Errc::out_of_range, "tau must be > 0");
}

class EedSolver {
public:
    EedSolver(int w, int h, int ch, const EedParams& p)
        : w_(w), h_(h), c_(ch), kappa_(p.kappa / p.intensity_range), tau_(p.tau),
          smoother_(w, h, ch, gaussian_kernel(p.presmooth_kernel_size, p.presmooth_sigma)),
          s_(std::size_t(w) * h * ch), un_(std::size_t(w) * h * ch), wsum_(std::size_t(w) * h), row_(w, 1),
          dec_(std::size_t(w))
    {
    }

    void step(std::vector<double>& u)
    {
        if (c_ == 1)
            step_impl<1>(u);
        else
            step_impl<3>(u);
    }

private:
    // Row at a time: tensor, decomposition and fluxes of one row stay in cache.
    template <int C>
    void step_impl(std::vector<double>& u)
    {
        smoother_.run(u.data(), s_.data());
        std::copy(u.begin(), u.end(), un_.begin());
        std::fill(wsum_.begin(), wsum_.end(), 0.0);
        const double half_tau = 0.5 * tau_;
        for (int y = 0; y < h_; ++y) {
            for (int x = 0; x < w_; ++x)
                structure_at<C>(s_.data(), w_, h_, x, y, row_.xx[std::size_t(x)], row_.xy[std::size_t(x)],
                                row_.yy[std::size_t(x)]);
            for (std::size_t x = 0; x < std::size_t(w_); ++x)
                diffusion_tensor_at(row_.xx[x], row_.xy[x], row_.yy[x], kappa_, row_.xx[x], row_.xy[x], row_.yy[x]);
            for (std::size_t x = 0; x < std::size_t(w_); ++x) dec_[x] = decompose(row_.xx[x], row_.xy[x], row_.yy[x]);
            for (int x = 0; x < w_; ++x)
                scatter_pixel<C>(dec_[std::size_t(x)], half_tau, x, y, w_, h_, u.data(), un_.data(), wsum_.data());
        }
        check_tau(tau_, wsum_);
        u.swap(un_);
    }

    int w_, h_, c_;
    double kappa_, tau_;
    Smoother smoother_;
    std::vector<double> s_, un_, wsum_;
    TensorField row_;
    std::vector<SellingDecomposition> dec_;
};

template <int C>
void apply_step(const Image& img, const DiffusionTensorField& dt, double tau, Image& res)
{
    const int w = img.width, h = img.height;
    std::vector<SellingDecomposition> dec;
    decompose_field(dt, dec);
    std::vector<double> wsum(img.pixels(), 0.0);
    const double half_tau = 0.5 * tau;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            scatter_pixel<C>(dec[std::size_t(y) * w + x], half_tau, x, y, w, h, img.data.data(), res.data.data(),
                             wsum.data());
    check_tau(tau, wsum);
}

} // namespace

StructureTensorField structure_tensor(const Image& img, const EedParams& params)
{
    require(img.width > 0 && img.height > 0 && img.data.size() == img.pixels() * img.channels &&
                (img.channels == 1 || img.channels == 3),
            Errc::invalid_argument, "invalid image buffer");
    Smoother sm(img.width, img.height, img.channels,
                gaussian_kernel(params.presmooth_kernel_size, params.presmooth_sigma));
    std::vector<double> s(img.data.size());
    sm.run(img.data.data(), s.data());
    StructureTensorField st(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const std::size_t i = std::size_t(y) * img.width + x;
            if (img.channels == 1)
                structure_at<1>(s.data(), img.width, img.height, x, y, st.xx[i], st.xy[i], st.yy[i]);
            else
                structure_at<3>(s.data(), img.width, img.height, x, y, st.xx[i], st.xy[i], st.yy[i]);
        }
    return st;
}

DiffusionTensorField diffusion_tensor(const StructureTensorField& st, double kappa)
{
    require(kappa > 0, Errc::invalid_argument, "kappa must be > 0");
    DiffusionTensorField dt(st.width, st.height);
    for (std::size_t i = 0; i < st.size(); ++i)
        diffusion_tensor_at(st.xx[i], st.xy[i], st.yy[i], kappa, dt.xx[i], dt.xy[i], dt.yy[i]);
    return dt;
}

double max_weight_sum(const DiffusionTensorField& dt)
{
    const int w = dt.width, h = dt.height;
    std::vector<SellingDecomposition> dec;
    decompose_field(dt, dec);
    std::vector<double> wsum(dt.size(), 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::size_t i = std::size_t(y) * w + x;
            const auto& d = dec[i];
            for (int n = 0; n < 3; ++n) {
                const double wt = 0.5 * d.rho[std::size_t(n)];
                if (wt <= 0.0) continue;
                for (int sg = 1; sg >= -1; sg -= 2) {
                    const int xx = x + sg * d.ex[std::size_t(n)], yy = y + sg * d.ey[std::size_t(n)];
                    if (xx < 0 || yy < 0 || xx >= w || yy >= h) continue;
                    wsum[i] += wt;
                    wsum[std::size_t(yy) * w + xx] += wt;
                }
            }
        }
    return wsum.empty() ? 0.0 : *std::max_element(wsum.begin(), wsum.end());
}

Image diffuse_step(const Image& img, const DiffusionTensorField& dt, double tau)
{
    require(dt.width == img.width && dt.height == img.height, Errc::dimension_mismatch,
            "tensor field does not match image");
    require(img.data.size() == img.pixels() * img.channels && (img.channels == 1 || img.channels == 3),
            Errc::invalid_argument, "invalid image buffer");
    check_tau_positive(tau);
    Image res = img;
    if (img.channels == 1)
        apply_step<1>(img, dt, tau, res);
    else
        apply_step<3>(img, dt, tau, res);
    return res;
}

Image run_eed_unclamped(const Image& img, const EedParams& params)
{
    params.validate();
    validate(img);
    Image u = img;
    if (params.steps == 0) return u;
    EedSolver solver(img.width, img.height, img.channels, params);
    for (int s = 0; s < params.steps; ++s) solver.step(u.data);
    return u;
}

Image run_eed(const Image& img, const EedParams& params)
{
    Image u = run_eed_unclamped(img, params);
    clamp_unit(u);
    return u;
}

} // namespace cuedecomp
