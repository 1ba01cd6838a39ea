#pragma once

#include <string>
#include <utility>
#include <vector>

#include "imagecore/image.hpp"
#include "imagecore/rng.hpp"

namespace cuedecomp {

enum class CorruptionKind { contrast, highpass, lowpass, noise, phase };

CorruptionKind parse_corruption_kind(const std::string& s);
const char* corruption_kind_name(CorruptionKind k);

enum class NoiseMode { uniform, gaussian };

NoiseMode parse_noise_mode(const std::string& s);
const char* noise_mode_name(NoiseMode m);

// clamp((in - 0.5) * c + 0.5), c in (0, 1]
Image contrast(const Image& img, double c);

// Separable Gaussian, radius ceil(3 sigma), half-sample reflection at the
// border. The result averages both pass orders so it commutes exactly with
// 90-degree rotation. sigma = 0 is the identity.
Image lowpass(const Image& img, double sigma);
Image lowpass_unclamped(const Image& img, double sigma);
std::vector<double> gaussian_taps(double sigma); // taps[0] is the centre, then one side

// clamp(in - lowpass(in) + 0.5); sigma = 0 is the identity.
Image highpass(const Image& img, double sigma);

// Additive noise, one draw per pixel shared by all channels. Uniform mode
// draws from [-width/2, width/2); gaussian mode uses width as the std.
Image uniform_noise(const Image& img, double width, RngStream& rng, NoiseMode mode = NoiseMode::uniform);

// Phase of every conjugate-symmetric frequency pair shifted by +phi / -phi,
// phi ~ U[-w, w] degrees, one draw per pair shared by all channels.
// Self-conjugate frequencies (DC, Nyquist) keep their phase.
Image phase_noise(const Image& img, double width_degrees, RngStream& rng);
Image phase_noise_unclamped(const Image& img, double width_degrees, RngStream& rng); // raw, may leave [0,1]

struct CorruptionOptions {
    NoiseMode noise_mode = NoiseMode::uniform;
};

void check_intensity(CorruptionKind kind, double intensity);
Image corrupt(const Image& img, CorruptionKind kind, double intensity, RngStream& rng,
              const CorruptionOptions& opt = {});

// Shortest round-trip decimal form, used in variant tags and stream keys.
std::string intensity_tag(double v);
std::string variant_tag(CorruptionKind kind, double intensity);

// One output per grid point, each from the stream (seed, sample_id/kind:intensity).
std::vector<std::pair<double, Image>> sweep(const Image& img, CorruptionKind kind, const std::vector<double>& grid,
                                            std::uint64_t seed, const std::string& sample_id,
                                            const CorruptionOptions& opt = {});
RngStream corruption_stream(std::uint64_t seed, const std::string& sample_id, CorruptionKind kind, double intensity);

std::vector<double> default_grid(CorruptionKind kind);

} // namespace cuedecomp
