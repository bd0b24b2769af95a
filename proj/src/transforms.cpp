#include "acqbench/transforms.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "acqbench/error.hpp"

namespace acqbench {

namespace {

std::uint8_t to_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp<long>(std::lround(v), 0, 255));
}

void require_8bit(const ImageBuffer& buf, const char* op) {
  if (buf.bit_depth() != 8) {
    throw InvalidArgument(std::string(op) + " requires an 8-bit buffer, got " +
                          std::to_string(buf.bit_depth()) + "-bit");
  }
}

void require_well_formed(const ImageBuffer& buf, const char* op) {
  auto violations = validate_buffer(buf);
  if (!violations.empty()) {
    throw InvalidArgument(std::string(op) + ": malformed input buffer (" +
                          violations.front().code + ": " + violations.front().detail + ")");
  }
}

ImageBuffer map_samples(const ImageBuffer& buf, const std::array<std::uint8_t, 256>& lut,
                        int out_bits) {
  std::vector<std::uint8_t> out(buf.samples().size());
  std::transform(buf.samples().begin(), buf.samples().end(), out.begin(),
                 [&lut](std::uint8_t v) { return lut[v]; });
  return ImageBuffer(buf.width(), buf.height(), buf.channels(), out_bits, buf.color_model(),
                     std::move(out));
}

// ---- color kernels (8-bit, hue stored as degrees / 2) -----------------------

struct Triple {
  std::uint8_t a, b, c;
};

double hue_degrees(int r, int g, int b, int max, int delta) {
  double h;
  if (max == r) {
    h = 60.0 * (g - b) / delta;
  } else if (max == g) {
    h = 120.0 + 60.0 * (b - r) / delta;
  } else {
    h = 240.0 + 60.0 * (r - g) / delta;
  }
  return h < 0.0 ? h + 360.0 : h;
}

std::uint8_t encode_hue(double degrees) {
  long h = std::lround(degrees / 2.0);
  return static_cast<std::uint8_t>(h >= 180 ? h - 180 : h);
}

// Chroma/offset form shared by HSV and HLS decoding.
Triple hue_chroma_to_rgb(double hue_deg, double chroma, double offset) {
  const double hp = hue_deg / 60.0;
  const double x = chroma * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp) % 6) {
    case 0: r = chroma; g = x; break;
    case 1: r = x; g = chroma; break;
    case 2: g = chroma; b = x; break;
    case 3: g = x; b = chroma; break;
    case 4: r = x; b = chroma; break;
    default: r = chroma; b = x; break;
  }
  return {to_u8(r + offset), to_u8(g + offset), to_u8(b + offset)};
}

Triple rgb_to_hsv(int r, int g, int b) {
  const int max = std::max({r, g, b});
  const int min = std::min({r, g, b});
  const int delta = max - min;
  const std::uint8_t s = max == 0 ? 0 : to_u8(255.0 * delta / max);
  const std::uint8_t h = delta == 0 ? 0 : encode_hue(hue_degrees(r, g, b, max, delta));
  return {h, s, static_cast<std::uint8_t>(max)};
}

Triple hsv_to_rgb(int h, int s, int v) {
  const double chroma = v * (s / 255.0);
  return hue_chroma_to_rgb(h * 2.0, chroma, v - chroma);
}

Triple rgb_to_hls(int r, int g, int b) {
  const int max = std::max({r, g, b});
  const int min = std::min({r, g, b});
  const int delta = max - min;
  const int sum = max + min;
  const std::uint8_t l = to_u8(sum / 2.0);
  if (delta == 0) return {0, l, 0};
  const double s = sum < 255 ? static_cast<double>(delta) / sum
                             : static_cast<double>(delta) / (510 - sum);
  return {encode_hue(hue_degrees(r, g, b, max, delta)), l, to_u8(255.0 * s)};
}

Triple hls_to_rgb(int h, int l, int s) {
  const double ln = l / 255.0;
  const double chroma = (1.0 - std::abs(2.0 * ln - 1.0)) * (s / 255.0) * 255.0;
  return hue_chroma_to_rgb(h * 2.0, chroma, l - chroma / 2.0);
}

Triple rgb_to_ycbcr(int r, int g, int b) {
  return {to_u8(0.299 * r + 0.587 * g + 0.114 * b),
          to_u8(128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b),
          to_u8(128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b)};
}

Triple ycbcr_to_rgb(int y, int cb, int cr) {
  const double u = cb - 128.0;
  const double v = cr - 128.0;
  return {to_u8(y + 1.402 * v), to_u8(y - 0.344136 * u - 0.714136 * v), to_u8(y + 1.772 * u)};
}

template <typename Kernel>
ImageBuffer map_triples(const ImageBuffer& buf, ColorModel target, Kernel kernel) {
  const std::size_t n = buf.pixel_count();
  auto p0 = buf.plane(0), p1 = buf.plane(1), p2 = buf.plane(2);
  std::vector<std::uint8_t> out(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    Triple t = kernel(p0[i], p1[i], p2[i]);
    out[i] = t.a;
    out[n + i] = t.b;
    out[2 * n + i] = t.c;
  }
  return ImageBuffer(buf.width(), buf.height(), 3, 8, target, std::move(out));
}

ImageBuffer rgb_to_gray(const ImageBuffer& buf) {
  const std::size_t n = buf.pixel_count();
  auto r = buf.plane(0), g = buf.plane(1), b = buf.plane(2);
  std::vector<std::uint8_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = to_u8(0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i]);
  return ImageBuffer(buf.width(), buf.height(), 1, 8, ColorModel::Gray, std::move(out));
}

ImageBuffer planes_to_rgb(const ImageBuffer& buf, std::array<int, 3> source_planes) {
  const std::size_t n = buf.pixel_count();
  std::vector<std::uint8_t> out(3 * n);
  for (int c = 0; c < 3; ++c) {
    auto plane = buf.plane(source_planes[static_cast<std::size_t>(c)]);
    std::copy(plane.begin(), plane.end(), out.begin() + static_cast<std::ptrdiff_t>(c * n));
  }
  return ImageBuffer(buf.width(), buf.height(), 3, 8, ColorModel::Rgb, std::move(out));
}

// ---- sampling ---------------------------------------------------------------

// Bilinear sample of one plane at (sx, sy); caller guarantees 0 <= sx <= w-1, 0 <= sy <= h-1.
double sample_bilinear(std::span<const std::uint8_t> plane, int w, int h, double sx, double sy) {
  const int x0 = std::min(static_cast<int>(sx), w - 1);
  const int y0 = std::min(static_cast<int>(sy), h - 1);
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double fx = sx - x0;
  const double fy = sy - y0;
  const auto at = [&](int x, int y) {
    return static_cast<double>(plane[static_cast<std::size_t>(y) * w + x]);
  };
  const double top = at(x0, y0) + fx * (at(x1, y0) - at(x0, y0));
  const double bottom = at(x0, y1) + fx * (at(x1, y1) - at(x0, y1));
  return top + fy * (bottom - top);
}

struct Geometry {
  double cx, cy, radius;

  explicit Geometry(const ImageBuffer& buf)
      : cx((buf.width() - 1) / 2.0),
        cy((buf.height() - 1) / 2.0),
        radius(std::hypot(static_cast<double>(buf.width()), static_cast<double>(buf.height())) /
               2.0) {}
};

// Resamples every plane through `source_of(x, y, sx, sy)`, which returns false
// when the pixel has no in-bounds source.
template <typename SourceFn>
ImageBuffer remap(const ImageBuffer& buf, SourceFn source_of) {
  const int w = buf.width(), h = buf.height(), ch = buf.channels();
  const std::size_t n = buf.pixel_count();
  std::vector<std::uint8_t> out(n * static_cast<std::size_t>(ch), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double sx = 0, sy = 0;
      if (!source_of(x, y, sx, sy)) continue;
      if (sx < 0.0 || sy < 0.0 || sx > w - 1 || sy > h - 1) continue;
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      for (int c = 0; c < ch; ++c) {
        out[static_cast<std::size_t>(c) * n + idx] = to_u8(sample_bilinear(buf.plane(c), w, h, sx, sy));
      }
    }
  }
  return ImageBuffer(w, h, ch, 8, buf.color_model(), std::move(out));
}

}  // namespace

// ---- quantization / gamma ---------------------------------------------------

ImageBuffer quantize(const ImageBuffer& buf, int bits) {
  if (!is_supported_bit_depth(bits)) {
    throw InvalidArgument("quantize: unsupported bit depth " + std::to_string(bits));
  }
  require_well_formed(buf, "quantize");
  if (buf.bit_depth() <= bits) return buf;
  const auto levels = quantization_levels(bits);
  std::array<std::uint8_t, 256> lut{};
  const int top = (1 << bits) - 1;
  for (int v = 0; v < 256; ++v) {
    const int bin = std::min((v << bits) / 256, top);
    lut[static_cast<std::size_t>(v)] = levels[static_cast<std::size_t>(bin)];
  }
  return map_samples(buf, lut, bits);
}

ImageBuffer gamma_fixed(const ImageBuffer& buf, double gamma) {
  if (!(gamma > 0.0) || gamma > 10.0) {
    throw InvalidArgument("gamma must lie in (0, 10], got " + format_number(gamma));
  }
  const auto model = buf.color_model();
  if (model != ColorModel::Rgb && model != ColorModel::Gray && model != ColorModel::Bgrne) {
    throw InvalidArgument("gamma is defined on RGB, GRAY and BGRNE buffers, not " +
                          std::string(to_string(model)));
  }
  require_8bit(buf, "gamma");
  require_well_formed(buf, "gamma");
  if (gamma == 1.0) return buf;
  std::array<std::uint8_t, 256> lut{};
  for (int v = 0; v < 256; ++v) {
    lut[static_cast<std::size_t>(v)] = to_u8(255.0 * std::pow(v / 255.0, gamma));
  }
  return map_samples(buf, lut, 8);
}

double mean_luma(const ImageBuffer& buf) {
  require_well_formed(buf, "mean_luma");
  const double n = static_cast<double>(buf.pixel_count());
  auto plane_sum = [&](int c) {
    double s = 0;
    for (auto v : buf.plane(c)) s += v;
    return s;
  };
  switch (buf.color_model()) {
    case ColorModel::Gray:
      return plane_sum(0) / n;
    case ColorModel::Rgb:
      return (0.299 * plane_sum(0) + 0.587 * plane_sum(1) + 0.114 * plane_sum(2)) / n;
    case ColorModel::Bgrne:
      return (0.299 * plane_sum(static_cast<int>(Band::Red)) +
              0.587 * plane_sum(static_cast<int>(Band::Green)) +
              0.114 * plane_sum(static_cast<int>(Band::Blue))) /
             n;
    default:
      throw InvalidArgument("mean luma is defined on RGB, GRAY and BGRNE buffers, not " +
                            std::string(to_string(buf.color_model())));
  }
}

DynamicGammaResult gamma_dynamic(const ImageBuffer& buf) {
  require_8bit(buf, "gamma_dynamic");
  const double mu = mean_luma(buf);
  if (mu <= 0.0 || mu >= 255.0) return {buf, 1.0};
  const double gamma =
      std::clamp(std::log(0.5) / std::log(mu / 255.0), kDynamicGammaMin, kDynamicGammaMax);
  return {gamma_fixed(buf, gamma), gamma};
}

// ---- color ------------------------------------------------------------------

ImageBuffer convert_color(const ImageBuffer& buf, ColorModel target) {
  require_8bit(buf, "convert_color");
  require_well_formed(buf, "convert_color");
  const ColorModel source = buf.color_model();
  if (source == target) return buf;
  if (source == ColorModel::Rgb) {
    switch (target) {
      case ColorModel::Gray: return rgb_to_gray(buf);
      case ColorModel::Hsv: return map_triples(buf, target, rgb_to_hsv);
      case ColorModel::Hls: return map_triples(buf, target, rgb_to_hls);
      case ColorModel::YCbCr: return map_triples(buf, target, rgb_to_ycbcr);
      default: break;
    }
  } else if (target == ColorModel::Rgb) {
    switch (source) {
      case ColorModel::Gray: return planes_to_rgb(buf, {0, 0, 0});
      case ColorModel::Hsv: return map_triples(buf, target, hsv_to_rgb);
      case ColorModel::Hls: return map_triples(buf, target, hls_to_rgb);
      case ColorModel::YCbCr: return map_triples(buf, target, ycbcr_to_rgb);
      case ColorModel::Bgrne:
        return planes_to_rgb(buf, {static_cast<int>(Band::Red), static_cast<int>(Band::Green),
                                   static_cast<int>(Band::Blue)});
      default: break;
    }
  }
  throw InvalidArgument("unsupported color conversion " + std::string(to_string(source)) +
                        " -> " + std::string(to_string(target)));
}

// ---- resolution -------------------------------------------------------------

ImageBuffer resize_to(const ImageBuffer& buf, int width, int height) {
  require_well_formed(buf, "resize");
  if (width < 1 || height < 1) throw InvalidArgument("resize: target dimensions must be >= 1");
  if (width == buf.width() && height == buf.height()) return buf;
  const int w = buf.width(), h = buf.height(), ch = buf.channels();
  const double rx = static_cast<double>(w) / width;
  const double ry = static_cast<double>(h) / height;

  std::vector<int> x0(static_cast<std::size_t>(width)), x1(x0.size());
  std::vector<double> fx(x0.size());
  for (int x = 0; x < width; ++x) {
    const double sx = std::clamp((x + 0.5) * rx - 0.5, 0.0, static_cast<double>(w - 1));
    const auto i = static_cast<std::size_t>(x);
    x0[i] = static_cast<int>(sx);
    x1[i] = std::min(x0[i] + 1, w - 1);
    fx[i] = sx - x0[i];
  }
  const std::size_t n_out = static_cast<std::size_t>(width) * height;
  std::vector<std::uint8_t> out(n_out * static_cast<std::size_t>(ch));
  for (int c = 0; c < ch; ++c) {
    auto plane = buf.plane(c);
    for (int y = 0; y < height; ++y) {
      const double sy = std::clamp((y + 0.5) * ry - 0.5, 0.0, static_cast<double>(h - 1));
      const int y0 = static_cast<int>(sy);
      const int y1 = std::min(y0 + 1, h - 1);
      const double fy = sy - y0;
      const auto* row0 = plane.data() + static_cast<std::size_t>(y0) * w;
      const auto* row1 = plane.data() + static_cast<std::size_t>(y1) * w;
      auto* dst = out.data() + static_cast<std::size_t>(c) * n_out + static_cast<std::size_t>(y) * width;
      for (int x = 0; x < width; ++x) {
        const auto i = static_cast<std::size_t>(x);
        const double top = row0[x0[i]] + fx[i] * (row0[x1[i]] - row0[x0[i]]);
        const double bottom = row1[x0[i]] + fx[i] * (row1[x1[i]] - row1[x0[i]]);
        dst[x] = to_u8(top + fy * (bottom - top));
      }
    }
  }
  return ImageBuffer(width, height, ch, 8, buf.color_model(), std::move(out));
}

ImageBuffer resize_max_side(const ImageBuffer& buf, int max_side) {
  if (max_side < 8) throw InvalidArgument("max_side must be >= 8, got " + std::to_string(max_side));
  const int longest = std::max(buf.width(), buf.height());
  if (longest == max_side) return buf;
  const double s = static_cast<double>(max_side) / longest;
  return resize_to(buf, std::max(1L, std::lround(buf.width() * s)),
                   std::max(1L, std::lround(buf.height() * s)));
}

ImageBuffer scale_by_factor(const ImageBuffer& buf, double factor) {
  if (!(factor > 0.0 && factor <= 4.0)) {
    throw InvalidArgument("scale factor must lie in (0, 4], got " + format_number(factor));
  }
  if (factor == 1.0) return buf;
  return resize_to(buf, std::max(1L, std::lround(buf.width() * factor)),
                   std::max(1L, std::lround(buf.height() * factor)));
}

// ---- distortion -------------------------------------------------------------

void DistortionParams::validate() const {
  if (!std::isfinite(k1) || std::abs(k1) > 0.5) {
    throw InvalidArgument("distortion requires |k1| <= 0.5, got " + format_number(k1));
  }
}

RadiusInverse invert_radius(double distorted, double k1, NewtonSettings settings) {
  if (k1 < 0.0) {
    // r + k1 r^3 peaks at r* = 1/sqrt(-3 k1); larger distorted radii have no real preimage.
    const double fold = 1.0 / std::sqrt(-3.0 * k1);
    if (distorted > fold * (1.0 + k1 * fold * fold)) {
      return {RadiusInverse::Status::NoPreimage, 0.0, 0};
    }
  }
  double r = distorted;
  for (int it = 0; it <= settings.max_iterations; ++it) {
    const double residual = r * (1.0 + k1 * r * r) - distorted;
    if (std::abs(residual) <= settings.tolerance) {
      return {RadiusInverse::Status::Converged, r, it};
    }
    const double slope = 1.0 + 3.0 * k1 * r * r;
    if (it == settings.max_iterations || slope <= 0.0) break;
    r -= residual / slope;
  }
  return {RadiusInverse::Status::NotConverged, r, settings.max_iterations};
}

DistortResult distort(const ImageBuffer& buf, const DistortionParams& params) {
  params.validate();
  require_well_formed(buf, "distort");
  if (params.k1 == 0.0) return {buf, 0, 0};
  const Geometry g(buf);
  std::size_t failures = 0, outside = 0;
  ImageBuffer out = remap(buf, [&](int x, int y, double& sx, double& sy) {
    const double dx = x - g.cx, dy = y - g.cy;
    const double rd = std::hypot(dx, dy) / g.radius;
    if (rd == 0.0) {
      sx = x;
      sy = y;
      return true;
    }
    const auto inv = invert_radius(rd, params.k1);
    if (inv.status != RadiusInverse::Status::Converged) {
      if (inv.status == RadiusInverse::Status::NotConverged) ++failures;
      ++outside;
      return false;
    }
    const double scale = inv.radius / rd;
    sx = g.cx + dx * scale;
    sy = g.cy + dy * scale;
    if (sx < 0.0 || sy < 0.0 || sx > buf.width() - 1 || sy > buf.height() - 1) ++outside;
    return true;
  });
  return {std::move(out), failures, outside};
}

ImageBuffer undistort(const ImageBuffer& buf, const DistortionParams& params) {
  params.validate();
  require_well_formed(buf, "undistort");
  if (params.k1 == 0.0) return buf;
  const Geometry g(buf);
  return remap(buf, [&](int x, int y, double& sx, double& sy) {
    const double dx = x - g.cx, dy = y - g.cy;
    const double ru2 = (dx * dx + dy * dy) / (g.radius * g.radius);
    const double scale = 1.0 + params.k1 * ru2;
    sx = g.cx + dx * scale;
    sy = g.cy + dy * scale;
    return true;
  });
}

// ---- multispectral ----------------------------------------------------------

ImageBuffer fuse_multispectral(const std::array<ImageBuffer, 5>& bands) {
  const auto& first = bands[0];
  for (std::size_t i = 0; i < bands.size(); ++i) {
    const auto& b = bands[i];
    require_well_formed(b, "fuse_multispectral");
    if (b.channels() != 1 || b.bit_depth() != 8) {
      throw InvalidArgument("fuse_multispectral: band " + std::to_string(i) +
                            " must be a single-channel 8-bit buffer");
    }
    if (b.width() != first.width() || b.height() != first.height()) {
      throw InvalidArgument("fuse_multispectral: band " + std::to_string(i) + " is " +
                            std::to_string(b.width()) + "x" + std::to_string(b.height()) +
                            ", expected " + std::to_string(first.width()) + "x" +
                            std::to_string(first.height()));
    }
  }
  std::vector<std::uint8_t> samples;
  samples.reserve(first.pixel_count() * 5);
  for (const auto& b : bands) samples.insert(samples.end(), b.samples().begin(), b.samples().end());
  return ImageBuffer(first.width(), first.height(), 5, 8, ColorModel::Bgrne, std::move(samples));
}

ImageBuffer extract_plane(const ImageBuffer& buf, int channel) {
  auto plane = buf.plane(channel);
  return ImageBuffer(buf.width(), buf.height(), 1, buf.bit_depth(), ColorModel::Gray,
                     std::vector<std::uint8_t>(plane.begin(), plane.end()));
}

// ---- composition ------------------------------------------------------------

ImageBuffer apply_config(const ImageBuffer& buf, const PipelineConfig& cfg) {
  cfg.validate();
  ImageBuffer img = buf;
  if (cfg.distortion_k1 != 0.0) {
    auto result = distort(img, DistortionParams{cfg.distortion_k1});
    if (result.newton_failures > 0) {
      throw Error("distortion: Newton inversion failed for " +
                  std::to_string(result.newton_failures) + " pixels");
    }
    img = std::move(result.image);
  }
  switch (cfg.gamma.kind) {
    case GammaMode::Kind::None:
      break;
    case GammaMode::Kind::Fixed:
      img = gamma_fixed(img, cfg.gamma.gamma);
      break;
    case GammaMode::Kind::Dynamic:
      img = gamma_dynamic(img).image;
      break;
  }
  if (img.color_model() != cfg.color_model) {
    const bool direct = img.color_model() == ColorModel::Rgb || cfg.color_model == ColorModel::Rgb;
    if (!direct) img = convert_color(img, ColorModel::Rgb);
    img = convert_color(img, cfg.color_model);
  }
  if (cfg.max_side) img = resize_max_side(img, *cfg.max_side);
  if (cfg.scale_factor) img = scale_by_factor(img, *cfg.scale_factor);
  return quantize(img, cfg.quant_bits);
}

}  // namespace acqbench
