#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "acqbench/image_buffer.hpp"
#include "acqbench/pipeline_config.hpp"

namespace acqbench {

enum class ImageFormat { Jpeg, Png, Qraw };

std::string_view to_string(ImageFormat format);
/// File extension including the dot: ".jpg", ".png", ".qraw".
std::string_view file_extension(ImageFormat format);

struct EncodedBlob {
  ImageFormat format = ImageFormat::Png;
  int quality = 0;  // JPEG only
  std::vector<std::uint8_t> bytes;
  int source_width = 0;
  int source_height = 0;
  int source_channels = 0;
};

/// Baseline JPEG, 4:2:0 chroma subsampling for 3-channel input, libjpeg's
/// standard quality scaling of the Annex K tables. 1- and 3-channel only.
EncodedBlob encode_jpeg(const ImageBuffer& buf, int quality);

/// Lossless PNG (8-bit gray or RGB). 5-channel buffers are rejected.
EncodedBlob encode_png(const ImageBuffer& buf);

/// Bit-packed planar raw format. Every sample must lie on the level set of the
/// buffer's bit depth.
EncodedBlob encode_qraw(const ImageBuffer& buf);

/// Decodes any supported stream (format sniffed from the magic bytes).
/// `tag` overrides the color model inferred from the channel count
/// (1 -> GRAY, 3 -> RGB, 5 -> BGRNE); a YCbCr tag also makes the JPEG decoder
/// return raw YCbCr components. Throws DecodeError on corrupt input.
ImageBuffer decode_image(std::span<const std::uint8_t> bytes,
                         std::optional<ColorModel> tag = std::nullopt);
ImageBuffer decode_image(const EncodedBlob& blob, std::optional<ColorModel> tag = std::nullopt);

/// Sniffs the format; nullopt for unknown magic.
std::optional<ImageFormat> detect_format(std::span<const std::uint8_t> bytes);

// ---- QRAW -------------------------------------------------------------------

inline constexpr std::size_t kQrawHeaderSize = 15;
inline constexpr std::uint8_t kQrawVersion = 1;

/// Layout (little-endian): "QRAW" | u8 version | u32 width | u32 height |
/// u8 channels | u8 bits | payload. The payload stores level indices planar,
/// MSB-first, each row padded to a byte boundary.
struct QrawHeader {
  std::uint8_t version = kQrawVersion;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint8_t channels = 0;
  std::uint8_t bits = 8;
};

/// channels * height * ceil(width * bits / 8).
std::uint64_t qraw_payload_size(std::uint64_t width, std::uint64_t height, std::uint64_t channels,
                                int bits);
QrawHeader parse_qraw_header(std::span<const std::uint8_t> bytes);

// ---- storage policy ---------------------------------------------------------

/// JPEG when the config asks for it; otherwise PNG for 8-bit 1/3-channel
/// buffers and QRAW for quantized or 5-channel buffers.
ImageFormat storage_format(const PipelineConfig& cfg, const ImageBuffer& transformed);
EncodedBlob encode_for_config(const ImageBuffer& transformed, const PipelineConfig& cfg);

// ---- files ------------------------------------------------------------------

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
ImageBuffer load_image(const std::filesystem::path& path,
                       std::optional<ColorModel> tag = std::nullopt);

bool is_image_file(const std::filesystem::path& path);

}  // namespace acqbench
