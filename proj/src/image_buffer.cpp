#include "acqbench/image_buffer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>

#include "acqbench/error.hpp"

namespace acqbench {

namespace {

constexpr std::array<std::pair<ColorModel, std::string_view>, 6> kModelNames{{
    {ColorModel::Gray, "gray"},
    {ColorModel::Rgb, "rgb"},
    {ColorModel::Hsv, "hsv"},
    {ColorModel::Hls, "hls"},
    {ColorModel::YCbCr, "ycbcr"},
    {ColorModel::Bgrne, "bgrne"},
}};

}  // namespace

std::string_view to_string(ColorModel model) {
  for (const auto& [m, name] : kModelNames) {
    if (m == model) return name;
  }
  return "unknown";
}

ColorModel parse_color_model(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (const auto& [m, n] : kModelNames) {
    if (n == lower) return m;
  }
  throw InvalidArgument("unknown color model '" + std::string(name) + "'");
}

int channels_for(ColorModel model) {
  switch (model) {
    case ColorModel::Gray:
      return 1;
    case ColorModel::Bgrne:
      return 5;
    default:
      return 3;
  }
}

bool is_supported_bit_depth(int bits) { return bits == 2 || bits == 4 || bits == 8; }

std::vector<std::uint8_t> quantization_levels(int bits) {
  if (!is_supported_bit_depth(bits)) {
    throw InvalidArgument("unsupported bit depth " + std::to_string(bits));
  }
  const int count = 1 << bits;
  std::vector<std::uint8_t> levels(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    levels[static_cast<std::size_t>(i)] =
        static_cast<std::uint8_t>(std::lround(i * 255.0 / (count - 1)));
  }
  return levels;
}

ImageBuffer::ImageBuffer(int width, int height, int channels, int bit_depth, ColorModel model,
                         std::vector<std::uint8_t> samples)
    : width_(width),
      height_(height),
      channels_(channels),
      bit_depth_(bit_depth),
      model_(model),
      samples_(std::move(samples)) {}

ImageBuffer ImageBuffer::checked(int width, int height, int channels, int bit_depth,
                                 ColorModel model, std::vector<std::uint8_t> samples) {
  ImageBuffer buf(width, height, channels, bit_depth, model, std::move(samples));
  auto violations = validate_buffer(buf);
  if (!violations.empty()) {
    std::string msg = "invalid image buffer:";
    for (const auto& v : violations) msg += " [" + v.code + ": " + v.detail + "]";
    throw InvalidArgument(msg);
  }
  return buf;
}

ImageBuffer ImageBuffer::filled(int width, int height, ColorModel model, std::uint8_t value) {
  const int ch = channels_for(model);
  std::vector<std::uint8_t> samples(static_cast<std::size_t>(width) * height * ch, value);
  return checked(width, height, ch, 8, model, std::move(samples));
}

std::span<const std::uint8_t> ImageBuffer::plane(int channel) const {
  if (channel < 0 || channel >= channels_) {
    throw InvalidArgument("plane index " + std::to_string(channel) + " out of range");
  }
  return std::span<const std::uint8_t>(samples_).subspan(
      static_cast<std::size_t>(channel) * pixel_count(), pixel_count());
}

ImageBuffer ImageBuffer::with_tag(ColorModel model) const {
  ImageBuffer copy = *this;
  copy.model_ = model;
  return copy;
}

ImageBuffer ImageBuffer::with_bit_depth(int bit_depth) const {
  ImageBuffer copy = *this;
  copy.bit_depth_ = bit_depth;
  return copy;
}

std::vector<Violation> validate_buffer(const ImageBuffer& buf) {
  std::vector<Violation> out;
  if (buf.width() < 1 || buf.height() < 1) {
    out.push_back({"dimensions", "width and height must be >= 1, got " +
                                     std::to_string(buf.width()) + "x" +
                                     std::to_string(buf.height())});
  }
  const int ch = buf.channels();
  if (ch != 1 && ch != 3 && ch != 5) {
    out.push_back({"channels", "channel count must be 1, 3 or 5, got " + std::to_string(ch)});
  }
  if (!is_supported_bit_depth(buf.bit_depth())) {
    out.push_back({"bit depth", "bit depth must be 2, 4 or 8, got " +
                                    std::to_string(buf.bit_depth())});
  }
  if (channels_for(buf.color_model()) != ch) {
    out.push_back({"color model", std::string(to_string(buf.color_model())) + " requires " +
                                      std::to_string(channels_for(buf.color_model())) +
                                      " channels, buffer has " + std::to_string(ch)});
  }
  const std::size_t expected = buf.width() > 0 && buf.height() > 0 && ch > 0
                                   ? buf.pixel_count() * static_cast<std::size_t>(ch)
                                   : 0;
  if (buf.samples().size() != expected) {
    out.push_back({"sample count", "expected " + std::to_string(expected) + " samples, got " +
                                       std::to_string(buf.samples().size())});
  }
  if (is_supported_bit_depth(buf.bit_depth()) && buf.bit_depth() < 8) {
    std::array<bool, 256> allowed{};
    for (auto level : quantization_levels(buf.bit_depth())) allowed[level] = true;
    std::size_t bad = 0;
    std::uint8_t first_bad = 0;
    for (auto s : buf.samples()) {
      if (!allowed[s]) {
        if (bad == 0) first_bad = s;
        ++bad;
      }
    }
    if (bad > 0) {
      out.push_back({"level set", std::to_string(bad) + " samples off the " +
                                      std::to_string(buf.bit_depth()) +
                                      "-bit level set (first: " + std::to_string(first_bad) +
                                      ")"});
    }
  }
  return out;
}

}  // namespace acqbench
