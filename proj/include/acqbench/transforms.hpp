#pragma once

#include <array>
#include <cstddef>

#include "acqbench/image_buffer.hpp"
#include "acqbench/pipeline_config.hpp"

namespace acqbench {

// Pixel-exact implementations of the acquisition parameters. Every function is
// pure: it returns a new buffer and never touches its input.

/// Re-quantizes 8-bit samples onto the 2^bits level set:
/// bin = min(floor(v*2^bits/256), 2^bits-1), v' = round(bin*255/(2^bits-1)).
/// Buffers already at or below `bits` are returned unchanged.
ImageBuffer quantize(const ImageBuffer& buf, int bits);

/// v' = round(255*(v/255)^gamma) on every sample. Accepts RGB, GRAY and BGRNE
/// buffers at 8 bits; gamma must lie in (0, 10].
ImageBuffer gamma_fixed(const ImageBuffer& buf, double gamma);

struct DynamicGammaResult {
  ImageBuffer image;
  double gamma = 1.0;
};

/// Mean-luma targeting gamma: gamma = ln(0.5)/ln(mu/255) clamped to
/// [kDynamicGammaMin, kDynamicGammaMax], where mu is the BT.601 mean luma
/// (plain mean for GRAY). mu of exactly 0 or 255 yields the identity, gamma 1.
DynamicGammaResult gamma_dynamic(const ImageBuffer& buf);

/// Mean BT.601 luma in [0, 255]; used by gamma_dynamic.
double mean_luma(const ImageBuffer& buf);

/// RGB -> {GRAY, HSV, HLS, YCbCr} and {GRAY, HSV, HLS, YCbCr, BGRNE} -> RGB.
/// Hue is stored as degrees/2 (0..179). YCbCr is BT.601 full range, GRAY is
/// BT.601 luma. Other pairs throw InvalidArgument.
ImageBuffer convert_color(const ImageBuffer& buf, ColorModel target);

/// Bilinear resize so that the longer side becomes `max_side` (>= 8).
ImageBuffer resize_max_side(const ImageBuffer& buf, int max_side);

/// Bilinear rescale of both dimensions by `factor` in (0, 4].
ImageBuffer scale_by_factor(const ImageBuffer& buf, double factor);

/// Bilinear resample to exactly `width` x `height` (half-pixel centers, edge clamp).
ImageBuffer resize_to(const ImageBuffer& buf, int width, int height);

/// Single-coefficient radial model r_d = r_u (1 + k1 r_u^2). Radii are
/// normalized by the half-diagonal so that r = 1 at the image corners.
struct DistortionParams {
  double k1 = 0.0;

  /// Throws InvalidArgument unless |k1| <= 0.5.
  void validate() const;
  /// Forward model on a normalized radius.
  double distorted_radius(double undistorted) const { return undistorted * (1.0 + k1 * undistorted * undistorted); }
};

struct NewtonSettings {
  double tolerance = 1e-9;
  int max_iterations = 25;
};

struct RadiusInverse {
  enum class Status { Converged, NoPreimage, NotConverged };
  Status status = Status::Converged;
  double radius = 0.0;
  int iterations = 0;
};

/// Solves r_u (1 + k1 r_u^2) = r_d for the smallest non-negative r_u by Newton
/// iteration from r_d. For k1 < 0 radii beyond the model's fold-over point have
/// no preimage and report NoPreimage.
RadiusInverse invert_radius(double distorted, double k1, NewtonSettings settings = {});

struct DistortResult {
  ImageBuffer image;
  std::size_t newton_failures = 0;
  std::size_t out_of_bounds = 0;
};

/// Synthesizes lens distortion: every output pixel samples the input at its
/// undistorted preimage (bilinear); pixels without an in-bounds preimage are 0.
DistortResult distort(const ImageBuffer& buf, const DistortionParams& params);

/// Mirror of distort(): every output pixel samples the input at its
/// forward-distorted location.
ImageBuffer undistort(const ImageBuffer& buf, const DistortionParams& params);

/// Stacks five single-channel 8-bit bands given in B, G, R, RedEdge, NIR order
/// into one BGRNE buffer. All bands must share dimensions.
ImageBuffer fuse_multispectral(const std::array<ImageBuffer, 5>& bands);

/// Extracts plane `channel` as a GRAY buffer.
ImageBuffer extract_plane(const ImageBuffer& buf, int channel);

/// Runs the configured transforms in the fixed order
/// distortion -> gamma -> color -> resize (max side, then factor) -> quantize.
/// JPEG storage is not applied here. Color conversions outside the direct
/// pairs route through RGB.
ImageBuffer apply_config(const ImageBuffer& buf, const PipelineConfig& cfg);

}  // namespace acqbench
