#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "acqbench/error.hpp"
#include "acqbench/transforms.hpp"
#include "support.hpp"

using namespace acqbench;
using namespace testing_support;

namespace {

ImageBuffer gray_ramp() {
  std::vector<std::uint8_t> s(256);
  for (int i = 0; i < 256; ++i) s[i] = static_cast<std::uint8_t>(i);
  return ImageBuffer(256, 1, 1, 8, ColorModel::Gray, s);
}

ImageBuffer gray1(std::uint8_t v) { return ImageBuffer(1, 1, 1, 8, ColorModel::Gray, {v}); }

std::array<int, 3> convert_pixel(std::array<int, 3> rgb, ColorModel target) {
  const ImageBuffer out = convert_color(rgb_pixels(1, 1, {rgb}), target);
  return {out.at(0, 0, 0), out.channels() > 1 ? out.at(0, 0, 1) : -1,
          out.channels() > 1 ? out.at(0, 0, 2) : -1};
}

}  // namespace

// ---- quantize -----------------------------------------------------------------

TEST(Quantize, TopBinMapsTo255) { EXPECT_EQ(quantize(gray1(255), 2).at(0, 0, 0), 255); }

TEST(Quantize, EightBitsIsIdentity) {
  const auto r = gray_ramp();
  EXPECT_EQ(quantize(r, 8), r);
}

TEST(Quantize, HundredAtTwoBits) {
  const auto q = quantize(gray1(100), 2);
  EXPECT_EQ(q.at(0, 0, 0), 85);
  EXPECT_EQ(q.bit_depth(), 2);
  EXPECT_EQ(oracle_quantize(100, 2), 85);
  // Nearest level search agrees for this sample.
  int best = 0;
  for (int level : quantization_levels(2)) {
    if (std::abs(level - 100) < std::abs(best - 100)) best = level;
  }
  EXPECT_EQ(best, 85);
}

TEST(Quantize, MatchesOracleOnAllSamples) {
  const auto r = gray_ramp();
  for (int bits : {2, 4, 8}) {
    const auto q = quantize(r, bits);
    for (int v = 0; v < 256; ++v) EXPECT_EQ(q.at(v, 0, 0), oracle_quantize(v, bits)) << v << "@" << bits;
  }
}

TEST(Quantize, RejectsUnsupportedBits) { EXPECT_THROW(quantize(gray_ramp(), 3), InvalidArgument); }

TEST(QuantizeProperty, IdempotentAndBounded) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto img = random_image(rng, 13, 7);
    for (int bits : {2, 4, 8}) {
      const auto q = quantize(img, bits);
      EXPECT_EQ(quantize(q, bits), q);
      EXPECT_TRUE(validate_buffer(q).empty());
      // Floor binning: a sample can sit anywhere in a bin of width 256/2^bits.
      const int bound = 256 / (1 << bits) - 1;
      for (std::size_t i = 0; i < img.samples().size(); ++i) {
        ASSERT_LE(std::abs(int(q.samples()[i]) - int(img.samples()[i])), bound);
      }
    }
  }
}

// ---- gamma --------------------------------------------------------------------

TEST(Gamma, OneIsIdentity) {
  const auto r = gray_ramp();
  EXPECT_EQ(gamma_fixed(r, 1.0), r);
}

TEST(Gamma, EndpointsFixed) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> g(0.05, 10.0);
  for (int i = 0; i < 100; ++i) {
    const double gamma = g(rng);
    EXPECT_EQ(gamma_fixed(gray1(0), gamma).at(0, 0, 0), 0);
    EXPECT_EQ(gamma_fixed(gray1(255), gamma).at(0, 0, 0), 255);
  }
}

TEST(Gamma, HalfAt128) { EXPECT_EQ(gamma_fixed(gray1(128), 0.5).at(0, 0, 0), 181); }

TEST(Gamma, MatchesHighPrecisionOracle) {
  const auto r = gray_ramp();
  for (double g : {0.5, 2.5, 0.7, 1.3}) {
    const auto out = gamma_fixed(r, g);
    for (int v = 0; v < 256; ++v) EXPECT_EQ(out.at(v, 0, 0), oracle_gamma(v, g)) << v << " " << g;
  }
}

TEST(Gamma, RejectsDerivedColorModels) {
  auto hsv = ImageBuffer::filled(2, 2, ColorModel::Hsv, 10);
  EXPECT_THROW(gamma_fixed(hsv, 0.5), InvalidArgument);
  EXPECT_THROW(gamma_fixed(gray_ramp(), 0.0), InvalidArgument);
}

TEST(GammaProperty, Monotone) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> g(0.1, 10.0);
  const auto r = gray_ramp();
  for (int i = 0; i < 200; ++i) {
    const auto out = gamma_fixed(r, g(rng));
    for (int v = 1; v < 256; ++v) ASSERT_LE(out.at(v - 1, 0, 0), out.at(v, 0, 0));
  }
}

// The expanding map (gamma < 1) is applied first: its inverse then never sees
// the collapsed dark range that the compressing map produces.
TEST(GammaProperty, InversePairWithinTwo) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> g(0.4, 2.5);
  const auto r = gray_ramp();
  for (int i = 0; i < 300; ++i) {
    double gamma = g(rng);
    if (gamma > 1.0) gamma = 1.0 / gamma;
    const auto back = gamma_fixed(gamma_fixed(r, gamma), 1.0 / gamma);
    for (int v = 0; v < 256; ++v) ASSERT_LE(std::abs(back.at(v, 0, 0) - v), 2) << gamma << " " << v;
  }
}

TEST(GammaDynamic, Uniform128IsNearIdentity) {
  const auto img = ImageBuffer::filled(8, 8, ColorModel::Rgb, 128);
  const auto r = gamma_dynamic(img);
  EXPECT_NEAR(r.gamma, std::log(0.5) / std::log(128.0 / 255.0), 1e-12);
  EXPECT_NEAR(r.gamma, 1.006, 5e-4);
  for (auto v : r.image.samples()) EXPECT_LE(std::abs(int(v) - 128), 1);
}

TEST(GammaDynamic, BlackIsIdentity) {
  const auto img = ImageBuffer::filled(4, 4, ColorModel::Rgb, 0);
  const auto r = gamma_dynamic(img);
  EXPECT_EQ(r.gamma, 1.0);
  EXPECT_EQ(r.image, img);
}

TEST(GammaDynamic, Uniform64TargetsMidpoint) {
  const auto img = ImageBuffer::filled(4, 4, ColorModel::Gray, 64);
  const auto r = gamma_dynamic(img);
  const double expected = std::log(0.5) / std::log(64.0 / 255.0);
  EXPECT_NEAR(r.gamma, expected, 1e-12);
  EXPECT_NEAR(r.gamma, 0.501, 5e-4);
  // 255 * 0.5 is an exact rounding tie, so only the neighbourhood is checked.
  EXPECT_NEAR(r.image.at(0, 0, 0), 128, 1);
}

TEST(GammaDynamic, ClampsExtremeMeans) {
  const auto r = gamma_dynamic(ImageBuffer::filled(4, 4, ColorModel::Gray, 1));
  EXPECT_EQ(r.gamma, kDynamicGammaMin);
}

// ---- color ---------------------------------------------------------------------

TEST(Color, PureRedToHsv) {
  EXPECT_EQ(convert_pixel({255, 0, 0}, ColorModel::Hsv), (std::array<int, 3>{0, 255, 255}));
}

TEST(Color, PureBlueToHsvHalfDegrees) {
  EXPECT_EQ(convert_pixel({0, 0, 255}, ColorModel::Hsv), (std::array<int, 3>{120, 255, 255}));
}

TEST(Color, AchromaticToYCbCr) {
  for (int g = 0; g < 256; g += 15) {
    EXPECT_EQ(convert_pixel({g, g, g}, ColorModel::YCbCr), (std::array<int, 3>{g, 128, 128}));
  }
}

TEST(Color, HlsOfPureGreen) {
  // H = 120 deg -> 60, L = 0.5 -> 128, S = 1 -> 255
  EXPECT_EQ(convert_pixel({0, 255, 0}, ColorModel::Hls), (std::array<int, 3>{60, 128, 255}));
}

TEST(Color, GrayOfAchromaticEqualsRedPlane) {
  std::vector<std::array<int, 3>> px;
  for (int g = 0; g < 256; ++g) px.push_back({g, g, g});
  const auto gray = convert_color(rgb_pixels(256, 1, px), ColorModel::Gray);
  EXPECT_EQ(gray.channels(), 1);
  for (int g = 0; g < 256; ++g) EXPECT_LE(std::abs(gray.at(g, 0, 0) - g), 1);
}

TEST(Color, YCbCrRoundTripOnLattice) {
  std::vector<std::array<int, 3>> px;
  for (int r = 0; r < 256; r += 15)
    for (int g = 0; g < 256; g += 15)
      for (int b = 0; b < 256; b += 15) px.push_back({r, g, b});
  const auto img = rgb_pixels(static_cast<int>(px.size()), 1, px);
  const auto back = convert_color(convert_color(img, ColorModel::YCbCr), ColorModel::Rgb);
  for (std::size_t i = 0; i < img.samples().size(); ++i) {
    EXPECT_LE(std::abs(int(back.samples()[i]) - int(img.samples()[i])), 2);
  }
}

// 8-bit hue storage (H/2) limits the HSV/HLS round trip: half a hue step of
// 2 degrees moves a channel by up to (max - min) / 60, about 4.25 at full
// chroma. HLS adds one more step from the rounded lightness and saturation.
// Both bounds were confirmed exhaustively over the full 8-bit cube.
TEST(Color, HueModelsRoundTripWithinHueQuantizationBound) {
  std::vector<std::array<int, 3>> px;
  for (int r = 0; r < 256; r += 15)
    for (int g = 0; g < 256; g += 15)
      for (int b = 0; b < 256; b += 15) px.push_back({r, g, b});
  const auto img = rgb_pixels(static_cast<int>(px.size()), 1, px);
  for (auto [m, bound] : {std::pair{ColorModel::Hsv, 4}, std::pair{ColorModel::Hls, 5}}) {
    const auto back = convert_color(convert_color(img, m), ColorModel::Rgb);
    int worst = 0;
    for (std::size_t i = 0; i < img.samples().size(); ++i) {
      worst = std::max(worst, std::abs(int(back.samples()[i]) - int(img.samples()[i])));
    }
    EXPECT_LE(worst, bound) << to_string(m);
  }
}

TEST(Color, UnsupportedPairsThrow) {
  const auto hsv = convert_color(ImageBuffer::filled(2, 2, ColorModel::Rgb, 9), ColorModel::Hsv);
  EXPECT_THROW(convert_color(hsv, ColorModel::YCbCr), InvalidArgument);
  EXPECT_THROW(convert_color(ImageBuffer::filled(2, 2, ColorModel::Rgb, 9), ColorModel::Bgrne),
               InvalidArgument);
}

TEST(Color, BgrneToRgbTakesVisibleBands) {
  std::vector<std::uint8_t> s{1, 2, 3, 4, 5};
  const auto rgb = convert_color(ImageBuffer(1, 1, 5, 8, ColorModel::Bgrne, s), ColorModel::Rgb);
  EXPECT_EQ(rgb.at(0, 0, 0), 3);
  EXPECT_EQ(rgb.at(0, 0, 1), 2);
  EXPECT_EQ(rgb.at(0, 0, 2), 1);
}

// ---- resize --------------------------------------------------------------------

TEST(Resize, MaxSideHalves) {
  const auto img = ImageBuffer::filled(2048, 1024, ColorModel::Gray, 77);
  const auto out = resize_max_side(img, 1024);
  EXPECT_EQ(out.width(), 1024);
  EXPECT_EQ(out.height(), 512);
  for (auto v : out.samples()) ASSERT_EQ(v, 77);
}

TEST(Resize, MaxSideIdentity) {
  std::mt19937_64 rng(1);
  const auto img = random_image(rng, 1024, 512, ColorModel::Gray);
  EXPECT_EQ(resize_max_side(img, 1024), img);
}

TEST(Resize, FactorIdentityAndExactDims) {
  std::mt19937_64 rng(1);
  const auto img = random_image(rng, 100, 60);
  EXPECT_EQ(scale_by_factor(img, 1.0), img);
  const auto half = scale_by_factor(img, 0.5);
  EXPECT_EQ(half.width(), 50);
  EXPECT_EQ(half.height(), 30);
}

TEST(Resize, ConstantsSurviveDownAndUp) {
  const auto img = ImageBuffer::filled(37, 21, ColorModel::Rgb, 201);
  const auto back = scale_by_factor(scale_by_factor(img, 0.5), 2.0);
  EXPECT_EQ(back.width(), 38);  // lround(18.5) * 2
  const auto c = ImageBuffer::filled(40, 20, ColorModel::Rgb, 201);
  EXPECT_EQ(scale_by_factor(scale_by_factor(c, 0.5), 2.0), c);
}

TEST(ResizeProperty, ConstantsAndDimsFormula) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> dim(8, 300);
  std::uniform_int_distribution<int> val(0, 255);
  for (int i = 0; i < 60; ++i) {
    const int w = dim(rng), h = dim(rng), L = dim(rng);
    const auto img = ImageBuffer::filled(w, h, ColorModel::Rgb, static_cast<std::uint8_t>(val(rng)));
    const auto out = resize_max_side(img, L);
    const double s = static_cast<double>(L) / std::max(w, h);
    EXPECT_EQ(out.width(), std::max<long>(1, std::lround(w * s)));
    EXPECT_EQ(out.height(), std::max<long>(1, std::lround(h * s)));
    EXPECT_EQ(std::max(out.width(), out.height()), L);
    for (auto v : out.samples()) ASSERT_EQ(v, img.samples()[0]);
  }
}

TEST(Resize, RejectsBadArguments) {
  const auto img = ImageBuffer::filled(10, 10, ColorModel::Gray, 1);
  EXPECT_THROW(resize_max_side(img, 7), InvalidArgument);
  EXPECT_THROW(scale_by_factor(img, 0.0), InvalidArgument);
  EXPECT_THROW(scale_by_factor(img, 4.5), InvalidArgument);
}

// ---- distortion ----------------------------------------------------------------

TEST(Distortion, ZeroIsIdentity) {
  std::mt19937_64 rng(2);
  const auto img = random_image(rng, 31, 17);
  const auto d = distort(img, {0.0});
  EXPECT_EQ(d.image, img);
  EXPECT_EQ(d.newton_failures, 0u);
  EXPECT_EQ(undistort(img, {0.0}), img);
}

TEST(Distortion, CenterPixelFixed) {
  std::mt19937_64 rng(4);
  const auto img = random_image(rng, 33, 21, ColorModel::Gray);
  for (double k1 : {-0.5, -0.2, 0.2, 0.5}) {
    EXPECT_EQ(distort(img, {k1}).image.at(16, 10, 0), img.at(16, 10, 0));
    EXPECT_EQ(undistort(img, {k1}).at(16, 10, 0), img.at(16, 10, 0));
  }
}

TEST(Distortion, ForwardModelAtCorner) {
  const DistortionParams p{0.2};
  EXPECT_DOUBLE_EQ(p.distorted_radius(1.0), 1.2);
  const auto inv = invert_radius(1.2, 0.2);
  ASSERT_EQ(inv.status, RadiusInverse::Status::Converged);
  EXPECT_NEAR(inv.radius, 1.0, 1e-9);
}

TEST(DistortionProperty, NewtonInvertsForwardModel) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> k(-0.5, 0.5);
  std::uniform_real_distribution<double> r(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double k1 = k(rng), ru = r(rng);
    const double rd = DistortionParams{k1}.distorted_radius(ru);
    const auto inv = invert_radius(rd, k1);
    if (k1 < 0 && ru > 1.0 / std::sqrt(-3.0 * k1)) continue;  // beyond the fold
    ASSERT_EQ(inv.status, RadiusInverse::Status::Converged) << k1 << " " << ru;
    ASSERT_NEAR(inv.radius, ru, 1e-7);
  }
}

TEST(Distortion, NoPreimageBeyondFold) {
  // k1 = -0.5: fold at r = sqrt(2/3), f_max = 0.544
  const auto inv = invert_radius(0.6, -0.5);
  EXPECT_EQ(inv.status, RadiusInverse::Status::NoPreimage);
}

TEST(Distortion, BarrelLeavesBlackCornersPincushionDoesNot) {
  const auto img = ImageBuffer::filled(40, 30, ColorModel::Gray, 200);
  // Barrel: corner pixels sample preimages beyond the frame.
  const auto barrel = distort(img, {-0.2});
  EXPECT_EQ(barrel.newton_failures, 0u);
  EXPECT_GT(barrel.out_of_bounds, 0u);
  EXPECT_EQ(barrel.image.at(0, 0, 0), 0);
  EXPECT_EQ(barrel.image.at(20, 15, 0), 200);
  // Pincushion: every preimage lies inside the frame.
  const auto pin = distort(img, {0.2});
  EXPECT_EQ(pin.newton_failures, 0u);
  EXPECT_EQ(pin.out_of_bounds, 0u);
}

TEST(Distortion, RejectsLargeK1) {
  const auto img = ImageBuffer::filled(4, 4, ColorModel::Gray, 1);
  EXPECT_THROW(distort(img, {0.51}), InvalidArgument);
}

// ---- multispectral ----------------------------------------------------------------

TEST(Multispectral, ConstantBands) {
  std::array<ImageBuffer, 5> bands;
  for (auto& b : bands) b = ImageBuffer::filled(6, 4, ColorModel::Gray, 42);
  const auto fused = fuse_multispectral(bands);
  EXPECT_EQ(fused.channels(), 5);
  EXPECT_EQ(fused.color_model(), ColorModel::Bgrne);
  for (auto v : fused.samples()) ASSERT_EQ(v, 42);
}

TEST(Multispectral, PlaneExtractionIsLossless) {
  std::mt19937_64 rng(6);
  std::array<ImageBuffer, 5> bands;
  for (auto& b : bands) b = random_image(rng, 9, 5, ColorModel::Gray);
  const auto fused = fuse_multispectral(bands);
  for (int c = 0; c < 5; ++c) EXPECT_EQ(extract_plane(fused, c), bands[c]);
}

TEST(Multispectral, MismatchedDimsRejected) {
  std::array<ImageBuffer, 5> bands;
  for (auto& b : bands) b = ImageBuffer::filled(6, 4, ColorModel::Gray, 1);
  bands[3] = ImageBuffer::filled(6, 5, ColorModel::Gray, 1);
  EXPECT_THROW(fuse_multispectral(bands), InvalidArgument);
}

// ---- apply_config ----------------------------------------------------------------

TEST(ApplyConfig, DefaultsAreIdentity) {
  std::mt19937_64 rng(10);
  const auto rgb = random_image(rng, 23, 19);
  EXPECT_EQ(apply_config(rgb, PipelineConfig{}), rgb);
  PipelineConfig gray_cfg;
  gray_cfg.color_model = ColorModel::Gray;
  const auto gray = random_image(rng, 23, 19, ColorModel::Gray);
  EXPECT_EQ(apply_config(gray, gray_cfg), gray);
}

TEST(ApplyConfig, GrayFourBits) {
  std::mt19937_64 rng(12);
  const auto img = random_image(rng, 50, 40);
  PipelineConfig c;
  c.color_model = ColorModel::Gray;
  c.quant_bits = 4;
  const auto out = apply_config(img, c);
  EXPECT_EQ(out.channels(), 1);
  EXPECT_EQ(out.bit_depth(), 4);
  std::set<int> distinct(out.samples().begin(), out.samples().end());
  EXPECT_LE(distinct.size(), 16u);
  EXPECT_TRUE(validate_buffer(out).empty());
}

TEST(ApplyConfig, RoutesBetweenDerivedModelsThroughRgb) {
  std::mt19937_64 rng(13);
  const auto img = convert_color(random_image(rng, 8, 8), ColorModel::Hsv);
  PipelineConfig c;
  c.color_model = ColorModel::YCbCr;
  const auto out = apply_config(img, c);
  EXPECT_EQ(out.color_model(), ColorModel::YCbCr);
  EXPECT_EQ(out, convert_color(convert_color(img, ColorModel::Rgb), ColorModel::YCbCr));
}

TEST(ApplyConfig, FixedOrder) {
  std::mt19937_64 rng(14);
  const auto img = random_image(rng, 64, 48);
  PipelineConfig c;
  c.distortion_k1 = 0.2;
  c.gamma = GammaMode::fixed(2.5);
  c.color_model = ColorModel::Hls;
  c.max_side = 32;
  c.scale_factor = 0.5;
  c.quant_bits = 2;
  const auto manual =
      quantize(scale_by_factor(resize_max_side(convert_color(gamma_fixed(distort(img, {0.2}).image, 2.5),
                                                             ColorModel::Hls),
                                               32),
                               0.5),
               2);
  EXPECT_EQ(apply_config(img, c), manual);
}

TEST(ApplyConfig, Deterministic) {
  std::mt19937_64 rng(15);
  const auto img = random_image(rng, 64, 48);
  PipelineConfig c;
  c.gamma = GammaMode::dynamic();
  c.distortion_k1 = -0.2;
  c.color_model = ColorModel::YCbCr;
  c.quant_bits = 4;
  EXPECT_EQ(apply_config(img, c), apply_config(img, c));
}
