#include <gtest/gtest.h>

#include <random>
#include <set>

#include "acqbench/codec.hpp"
#include "acqbench/error.hpp"
#include "acqbench/image_buffer.hpp"
#include "acqbench/pipeline_config.hpp"
#include "support.hpp"

using namespace acqbench;

namespace {

bool has_code(const std::vector<Violation>& v, const std::string& code) {
  for (const auto& x : v) {
    if (x.code == code) return true;
  }
  return false;
}

}  // namespace

TEST(ImageBuffer, WellFormedRgbHasNoViolations) {
  ImageBuffer b(2, 2, 3, 8, ColorModel::Rgb, std::vector<std::uint8_t>(12, 7));
  EXPECT_TRUE(validate_buffer(b).empty());
}

TEST(ImageBuffer, ShortSampleVectorIsReported) {
  ImageBuffer b(2, 2, 3, 8, ColorModel::Rgb, std::vector<std::uint8_t>(11, 7));
  EXPECT_TRUE(has_code(validate_buffer(b), "sample count"));
  EXPECT_THROW(ImageBuffer::checked(2, 2, 3, 8, ColorModel::Rgb, std::vector<std::uint8_t>(11)),
               InvalidArgument);
}

TEST(ImageBuffer, OffLevelSampleAtFourBits) {
  // 4-bit levels are the multiples of 17.
  const auto levels = quantization_levels(4);
  ASSERT_EQ(levels.size(), 16u);
  for (std::size_t i = 0; i < levels.size(); ++i) EXPECT_EQ(levels[i], 17 * i);
  EXPECT_EQ(std::count(levels.begin(), levels.end(), 100), 0);

  ImageBuffer b(1, 1, 1, 4, ColorModel::Gray, {100});
  EXPECT_TRUE(has_code(validate_buffer(b), "level set"));
  ImageBuffer ok(1, 1, 1, 4, ColorModel::Gray, {102});
  EXPECT_TRUE(validate_buffer(ok).empty());
}

TEST(ImageBuffer, ChannelModelConsistency) {
  EXPECT_TRUE(has_code(validate_buffer(ImageBuffer(1, 1, 1, 8, ColorModel::Rgb, {0})), "color model"));
  EXPECT_TRUE(has_code(validate_buffer(ImageBuffer(1, 1, 3, 8, ColorModel::Gray, {0, 0, 0})),
                       "color model"));
  EXPECT_TRUE(has_code(validate_buffer(ImageBuffer(1, 1, 3, 8, ColorModel::Bgrne, {0, 0, 0})),
                       "color model"));
  EXPECT_TRUE(validate_buffer(ImageBuffer(1, 1, 5, 8, ColorModel::Bgrne, {1, 2, 3, 4, 5})).empty());
  EXPECT_TRUE(has_code(validate_buffer(ImageBuffer(1, 1, 2, 8, ColorModel::Rgb, {0, 0})), "channels"));
}

TEST(ImageBuffer, DimensionsAndBitDepth) {
  EXPECT_TRUE(has_code(validate_buffer(ImageBuffer(0, 1, 1, 8, ColorModel::Gray, {})), "dimensions"));
  EXPECT_TRUE(has_code(validate_buffer(ImageBuffer(1, 1, 1, 3, ColorModel::Gray, {0})), "bit depth"));
}

TEST(ImageBuffer, LevelSetsMatchFormula) {
  for (int bits : {2, 4, 8}) {
    const auto levels = quantization_levels(bits);
    const int n = 1 << bits;
    ASSERT_EQ(static_cast<int>(levels.size()), n);
    for (int i = 0; i < n; ++i) {
      EXPECT_EQ(levels[i], static_cast<int>(std::floor(i * 255.0 / (n - 1) + 0.5)));
    }
  }
  EXPECT_EQ(quantization_levels(2), (std::vector<std::uint8_t>{0, 85, 170, 255}));
}

TEST(ImageBuffer, PlaneAccess) {
  ImageBuffer b(2, 1, 3, 8, ColorModel::Rgb, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(b.at(1, 0, 0), 2);
  EXPECT_EQ(b.at(0, 0, 2), 5);
  auto p = b.plane(1);
  EXPECT_EQ(p.size(), 2u);
  EXPECT_EQ(p[0], 3);
}

TEST(ImageBuffer, ValidityStableThroughQraw) {
  std::mt19937_64 rng(11);
  for (int bits : {2, 4, 8}) {
    const auto levels = quantization_levels(bits);
    std::uniform_int_distribution<std::size_t> pick(0, levels.size() - 1);
    std::vector<std::uint8_t> s(5 * 3 * 3);
    for (auto& v : s) v = levels[pick(rng)];
    ImageBuffer b(5, 3, 3, bits, ColorModel::Rgb, s);
    ASSERT_TRUE(validate_buffer(b).empty());
    const ImageBuffer back = decode_image(encode_qraw(b));
    EXPECT_TRUE(validate_buffer(back).empty());
    EXPECT_EQ(back, b);
  }
}

TEST(ColorModelTags, RoundTrip) {
  for (auto m : {ColorModel::Gray, ColorModel::Rgb, ColorModel::Hsv, ColorModel::Hls, ColorModel::YCbCr,
                 ColorModel::Bgrne}) {
    EXPECT_EQ(parse_color_model(to_string(m)), m);
  }
  EXPECT_EQ(parse_color_model("GRAY"), ColorModel::Gray);
  EXPECT_THROW(parse_color_model("cmyk"), InvalidArgument);
  EXPECT_EQ(channels_for(ColorModel::Bgrne), 5);
}

TEST(ConfigId, Defaults) { EXPECT_EQ(config_id(PipelineConfig{}), "q8_lossless_full_rgb_g1_k0"); }

TEST(ConfigId, OptimizedGray) {
  PipelineConfig c;
  c.quant_bits = 4;
  c.jpeg_quality = 90;
  c.color_model = ColorModel::Gray;
  EXPECT_EQ(config_id(c), "q4_j90_full_gray_g1_k0");
}

TEST(ConfigId, SignOfK1Matters) {
  PipelineConfig a, b;
  a.distortion_k1 = 0.2;
  b.distortion_k1 = -0.2;
  EXPECT_NE(config_id(a), config_id(b));
  EXPECT_EQ(config_id(b), "q8_lossless_full_rgb_g1_k-0.2");
}

TEST(ConfigId, OtherFields) {
  PipelineConfig c;
  c.max_side = 768;
  c.scale_factor = 0.5;
  c.gamma = GammaMode::fixed(2.5);
  c.color_model = ColorModel::YCbCr;
  EXPECT_EQ(config_id(c), "q8_lossless_s768x0.5_ycbcr_g2.5_k0");
  c.gamma = GammaMode::dynamic();
  EXPECT_EQ(config_id(c), "q8_lossless_s768x0.5_ycbcr_gdyn_k0");
  c.gamma = GammaMode::fixed(1.0);
  EXPECT_EQ(config_id(c), "q8_lossless_s768x0.5_ycbcr_g1_k0");
}

// Property: distinct configurations on randomly sampled grids get distinct ids.
TEST(ConfigId, InjectiveOnRandomConfigs) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> pick(0, 1000);
  const std::vector<int> bits{2, 4, 8};
  const std::vector<std::optional<int>> quality{std::nullopt, 1, 50, 70, 90, 100};
  const std::vector<std::optional<int>> sides{std::nullopt, 256, 512, 756, 768, 1024};
  const std::vector<std::optional<double>> factors{std::nullopt, 0.5, 1.0, 2.0, 0.25, 1.5};
  const std::vector<ColorModel> colors{ColorModel::Rgb, ColorModel::Gray, ColorModel::Hsv,
                                       ColorModel::Hls, ColorModel::YCbCr};
  const std::vector<GammaMode> gammas{GammaMode::none(), GammaMode::fixed(0.5), GammaMode::fixed(2.5),
                                      GammaMode::fixed(0.1 + 1e-9), GammaMode::dynamic()};
  const std::vector<double> k1s{-0.2, 0.0, 0.2, 0.5, -0.5, 0.1 + 0.2};
  std::map<std::string, PipelineConfig> seen;
  for (int i = 0; i < 5000; ++i) {
    PipelineConfig c;
    c.quant_bits = bits[pick(rng) % bits.size()];
    c.jpeg_quality = quality[pick(rng) % quality.size()];
    c.max_side = sides[pick(rng) % sides.size()];
    c.scale_factor = factors[pick(rng) % factors.size()];
    c.color_model = colors[pick(rng) % colors.size()];
    c.gamma = gammas[pick(rng) % gammas.size()];
    c.distortion_k1 = k1s[pick(rng) % k1s.size()];
    const std::string id = config_id(c);
    auto [it, inserted] = seen.emplace(id, c);
    if (!inserted) EXPECT_EQ(it->second, c) << id;
  }
  EXPECT_GT(seen.size(), 1000u);
}

TEST(PipelineConfigTest, ValidateRejectsOutOfRange) {
  PipelineConfig c;
  c.quant_bits = 3;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.jpeg_quality = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c.jpeg_quality = 101;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.scale_factor = 0.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.distortion_k1 = 0.6;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.max_side = 4;
  EXPECT_THROW(c.validate(), InvalidArgument);
  EXPECT_THROW(GammaMode::fixed(0.0), InvalidArgument);
  EXPECT_NO_THROW(PipelineConfig{}.validate());
}

TEST(PipelineConfigTest, FileGrammarRoundTrip) {
  const std::string text =
      "# optimized, gray\n"
      "quant_bits = 4\n"
      "JPEG_QUALITY = 90   # trailing comment\n"
      "\n"
      "max_side = 756\n"
      "scale_factor = 2\n"
      "color_model = gray\n"
      "gamma = dynamic\n"
      "distortion_k1 = -0.2\n";
  const PipelineConfig c = parse_pipeline_config(text);
  EXPECT_EQ(c.quant_bits, 4);
  EXPECT_EQ(c.jpeg_quality, 90);
  EXPECT_EQ(c.max_side, 756);
  EXPECT_EQ(c.scale_factor, 2.0);
  EXPECT_EQ(c.color_model, ColorModel::Gray);
  EXPECT_EQ(c.gamma, GammaMode::dynamic());
  EXPECT_EQ(c.distortion_k1, -0.2);
  EXPECT_EQ(parse_pipeline_config(to_config_text(c)), c);
  EXPECT_EQ(parse_pipeline_config(to_config_text(PipelineConfig{})), PipelineConfig{});
}

TEST(PipelineConfigTest, FileGrammarErrors) {
  EXPECT_THROW(parse_pipeline_config("quant_bits = 4\nquant_bits = 2\n"), InvalidArgument);
  EXPECT_THROW(parse_pipeline_config("bits = 4\n"), InvalidArgument);
  EXPECT_THROW(parse_pipeline_config("quant_bits 4\n"), InvalidArgument);
  EXPECT_THROW(parse_pipeline_config("jpeg_quality = ninety\n"), InvalidArgument);
  EXPECT_THROW(parse_pipeline_config("gamma = -1\n"), InvalidArgument);
  const auto lossless = parse_pipeline_config("jpeg_quality = lossless\nmax_side = full\n");
  EXPECT_FALSE(lossless.jpeg_quality);
  EXPECT_FALSE(lossless.max_side);
}

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(-0.2), "-0.2");
  EXPECT_EQ(format_number(2.0), "2");
  EXPECT_EQ(format_number(-0.0), "0");
  EXPECT_EQ(format_number(0.1 + 0.2), "0.30000000000000004");
}
