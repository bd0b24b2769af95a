#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace acqbench {

enum class ColorModel { Gray, Rgb, Hsv, Hls, YCbCr, Bgrne };

/// Lower-case tag used in config ids, config files and reports ("gray", "rgb", ...).
std::string_view to_string(ColorModel model);
/// Parses a tag case-insensitively; throws InvalidArgument on unknown names.
ColorModel parse_color_model(std::string_view name);
/// Channel count implied by a color model (1, 3 or 5).
int channels_for(ColorModel model);

/// Plane indices of the fused multispectral layout.
enum class Band { Blue = 0, Green = 1, Red = 2, RedEdge = 3, NearInfrared = 4 };

/// Quantization level set for `bits`: round(i*255/(2^bits-1)) for i < 2^bits.
std::vector<std::uint8_t> quantization_levels(int bits);
bool is_supported_bit_depth(int bits);

/// Planar raster with 8-bit sample containers.
///
/// Construction does not enforce the invariants so that malformed buffers can
/// be inspected with validate_buffer(); use ImageBuffer::checked() when a
/// buffer must be well-formed. Instances are immutable once built.
class ImageBuffer {
 public:
  ImageBuffer() = default;
  ImageBuffer(int width, int height, int channels, int bit_depth, ColorModel model,
              std::vector<std::uint8_t> samples);

  /// Same as the constructor but throws InvalidArgument listing every violation.
  static ImageBuffer checked(int width, int height, int channels, int bit_depth,
                             ColorModel model, std::vector<std::uint8_t> samples);
  /// An 8-bit buffer of the model's channel count with every sample set to `value`.
  static ImageBuffer filled(int width, int height, ColorModel model, std::uint8_t value);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  int bit_depth() const noexcept { return bit_depth_; }
  ColorModel color_model() const noexcept { return model_; }

  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  std::span<const std::uint8_t> samples() const noexcept { return samples_; }
  /// One channel plane; requires channel < channels() and a well-formed buffer.
  std::span<const std::uint8_t> plane(int channel) const;
  std::uint8_t at(int x, int y, int channel) const {
    return samples_[static_cast<std::size_t>(channel) * pixel_count() +
                    static_cast<std::size_t>(y) * width_ + x];
  }

  /// Copy with a different color-model tag or bit depth; samples are shared by value.
  ImageBuffer with_tag(ColorModel model) const;
  ImageBuffer with_bit_depth(int bit_depth) const;

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  int bit_depth_ = 8;
  ColorModel model_ = ColorModel::Rgb;
  std::vector<std::uint8_t> samples_;
};

struct Violation {
  std::string code;  // "dimensions", "channels", "bit depth", "color model", "sample count", "level set"
  std::string detail;
};

/// Every violated buffer invariant; an empty list means the buffer is well-formed.
std::vector<Violation> validate_buffer(const ImageBuffer& buf);

}  // namespace acqbench
