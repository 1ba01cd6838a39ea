#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "imagecore/image.hpp"

namespace cuedecomp {

struct EedParams {
    double kappa = 1.0 / 15.0;
    int presmooth_kernel_size = 5;
    double presmooth_sigma = 2.23606797749979; // sqrt(5)
    int steps = 16384;
    double tau = 0.2;
    // kappa is read on a 0..intensity_range gray scale; 255 matches 8-bit data
    double intensity_range = 255.0;

    void validate() const;
    bool operator==(const EedParams&) const = default;
};

nlohmann::json to_json(const EedParams& p);
EedParams eed_params_from_json(const nlohmann::json& j, EedParams base = {});

// Symmetric 2x2 field, one (xx, xy, yy) triple per pixel.
struct TensorField {
    int width = 0;
    int height = 0;
    std::vector<double> xx, xy, yy;

    TensorField() = default;
    TensorField(int w, int h);
    std::size_t size() const { return xx.size(); }
};
using StructureTensorField = TensorField;
using DiffusionTensorField = TensorField;

std::vector<double> gaussian_kernel(int size, double sigma);
double charbonnier(double s, double kappa);

// Gaussian presmoothing (reflective), central differences, outer products
// summed over channels. Intensities in [0,1] units.
StructureTensorField structure_tensor(const Image& img, const EedParams& params);

// Eigenvalue g(mu1) across the dominant direction, 1 along it.
DiffusionTensorField diffusion_tensor(const StructureTensorField& st, double kappa);
void diffusion_tensor_at(double j11, double j12, double j22, double kappa, double& d11, double& d12, double& d22);

// Nonnegative decomposition D = sum_k rho_k e_k e_k^T over an obtuse superbase.
struct SellingDecomposition {
    std::array<double, 3> rho;
    std::array<int, 3> ex, ey;
};
SellingDecomposition selling_decompose(double d11, double d12, double d22);

// Largest per-pixel sum of neighbour weights of the flux stencil; an explicit
// step keeps the extremum principle iff tau * this <= 1.
double max_weight_sum(const DiffusionTensorField& dt);

// One explicit step of u_t = div(D grad u), zero flux through the border.
// Not clamped.
Image diffuse_step(const Image& img, const DiffusionTensorField& dt, double tau);

// Iterates structure_tensor -> diffusion_tensor -> diffuse_step and clamps
// the result to [0,1] once at the end.
Image run_eed(const Image& img, const EedParams& params);

// Same iteration without the final clamp, exposed for property checks.
Image run_eed_unclamped(const Image& img, const EedParams& params);

} // namespace cuedecomp
