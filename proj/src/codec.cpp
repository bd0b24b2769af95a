#include "acqbench/codec.hpp"

#include <array>
#include <csetjmp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include <jpeglib.h>
#include <png.h>
#include <zlib.h>

#include "acqbench/error.hpp"

namespace acqbench {

namespace {

constexpr std::array<std::uint8_t, 8> kPngMagic{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
constexpr std::array<std::uint8_t, 4> kQrawMagic{'Q', 'R', 'A', 'W'};

std::vector<std::uint8_t> interleave(const ImageBuffer& buf) {
  const std::size_t n = buf.pixel_count();
  const int ch = buf.channels();
  std::vector<std::uint8_t> out(n * static_cast<std::size_t>(ch));
  for (int c = 0; c < ch; ++c) {
    auto plane = buf.plane(c);
    for (std::size_t i = 0; i < n; ++i) out[i * ch + c] = plane[i];
  }
  return out;
}

std::vector<std::uint8_t> deinterleave(std::span<const std::uint8_t> px, std::size_t n, int ch) {
  std::vector<std::uint8_t> out(n * static_cast<std::size_t>(ch));
  for (int c = 0; c < ch; ++c) {
    for (std::size_t i = 0; i < n; ++i) out[static_cast<std::size_t>(c) * n + i] = px[i * ch + c];
  }
  return out;
}

ColorModel model_for(int channels, std::optional<ColorModel> tag) {
  if (tag) {
    if (channels_for(*tag) != channels) {
      throw InvalidArgument("color model " + std::string(to_string(*tag)) + " does not match " +
                            std::to_string(channels) + "-channel stream");
    }
    return *tag;
  }
  return channels == 1 ? ColorModel::Gray : channels == 5 ? ColorModel::Bgrne : ColorModel::Rgb;
}

void require_encodable(const ImageBuffer& buf, const char* what) {
  auto violations = validate_buffer(buf);
  if (!violations.empty()) {
    throw InvalidArgument(std::string(what) + ": malformed buffer (" + violations.front().code +
                          ": " + violations.front().detail + ")");
  }
}

// ---- JPEG -------------------------------------------------------------------

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

// Warnings (e.g. premature end of data) are treated as corrupt streams.
void jpeg_emit_message(j_common_ptr cinfo, int msg_level) {
  if (msg_level < 0) jpeg_error_exit(cinfo);
}

void jpeg_silent(j_common_ptr) {}

struct JpegEncodeJob {
  const std::uint8_t* pixels;
  int width, height, channels;
  J_COLOR_SPACE space;
  int quality;
  unsigned char* out = nullptr;
  unsigned long out_size = 0;
  char message[JMSG_LENGTH_MAX] = {};
};

bool run_jpeg_encode(JpegEncodeJob& job) {
  jpeg_compress_struct cinfo{};
  JpegErrorManager err{};
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  err.base.output_message = jpeg_silent;
  if (setjmp(err.jump)) {
    std::snprintf(job.message, sizeof job.message, "%s", err.message);
    jpeg_destroy_compress(&cinfo);
    return false;
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &job.out, &job.out_size);
  cinfo.image_width = static_cast<JDIMENSION>(job.width);
  cinfo.image_height = static_cast<JDIMENSION>(job.height);
  cinfo.input_components = job.channels;
  cinfo.in_color_space = job.space;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, job.quality, TRUE);
  if (job.channels == 3) {
    // 4:2:0 luma/chroma sampling.
    cinfo.comp_info[0].h_samp_factor = 2;
    cinfo.comp_info[0].v_samp_factor = 2;
    cinfo.comp_info[1].h_samp_factor = cinfo.comp_info[1].v_samp_factor = 1;
    cinfo.comp_info[2].h_samp_factor = cinfo.comp_info[2].v_samp_factor = 1;
  }
  cinfo.optimize_coding = FALSE;
  jpeg_start_compress(&cinfo, TRUE);
  const std::size_t stride = static_cast<std::size_t>(job.width) * job.channels;
  while (cinfo.next_scanline < cinfo.image_height) {
    auto* row = const_cast<JSAMPROW>(job.pixels + cinfo.next_scanline * stride);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  return true;
}

struct JpegDecodeJob {
  const std::uint8_t* data;
  std::size_t size;
  bool raw_ycbcr = false;
  std::vector<std::uint8_t>* pixels;
  int width = 0, height = 0, channels = 0;
  std::size_t consumed = 0;
  char message[JMSG_LENGTH_MAX] = {};
};

bool run_jpeg_decode(JpegDecodeJob& job) {
  jpeg_decompress_struct cinfo{};
  JpegErrorManager err{};
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  err.base.emit_message = jpeg_emit_message;
  err.base.output_message = jpeg_silent;
  if (setjmp(err.jump)) {
    std::snprintf(job.message, sizeof job.message, "%s", err.message);
    if (cinfo.src != nullptr) job.consumed = job.size - cinfo.src->bytes_in_buffer;
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, job.data, static_cast<unsigned long>(job.size));
  jpeg_read_header(&cinfo, TRUE);
  if (cinfo.num_components == 1) {
    cinfo.out_color_space = JCS_GRAYSCALE;
  } else if (cinfo.num_components == 3) {
    cinfo.out_color_space = job.raw_ycbcr ? JCS_YCbCr : JCS_RGB;
  } else {
    std::snprintf(err.message, sizeof err.message, "unsupported JPEG component count %d",
                  cinfo.num_components);
    std::longjmp(err.jump, 1);
  }
  jpeg_start_decompress(&cinfo);
  job.width = static_cast<int>(cinfo.output_width);
  job.height = static_cast<int>(cinfo.output_height);
  job.channels = cinfo.output_components;
  const std::size_t stride = static_cast<std::size_t>(job.width) * job.channels;
  job.pixels->assign(stride * job.height, 0);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = job.pixels->data() + cinfo.output_scanline * stride;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

ImageBuffer decode_jpeg(std::span<const std::uint8_t> bytes, std::optional<ColorModel> tag) {
  std::vector<std::uint8_t> pixels;
  JpegDecodeJob job{bytes.data(), bytes.size(), tag == ColorModel::YCbCr, &pixels};
  if (!run_jpeg_decode(job)) throw DecodeError(job.consumed, std::string("JPEG: ") + job.message);
  const std::size_t n = static_cast<std::size_t>(job.width) * job.height;
  return ImageBuffer(job.width, job.height, job.channels, 8, model_for(job.channels, tag),
                     deinterleave(pixels, n, job.channels));
}

// ---- PNG --------------------------------------------------------------------

std::uint32_t read_be32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
         std::uint32_t{p[3]};
}

// Walks the chunk list so that structural damage is reported with its position.
// Returns the offset of the first IDAT chunk.
std::size_t check_png_structure(std::span<const std::uint8_t> bytes) {
  std::size_t pos = kPngMagic.size();
  std::size_t first_idat = 0;
  while (true) {
    if (pos + 12 > bytes.size()) throw DecodeError(pos, "PNG: truncated chunk header");
    const std::uint32_t length = read_be32(bytes.data() + pos);
    const std::string type(reinterpret_cast<const char*>(bytes.data() + pos + 4), 4);
    if (length > 0x7fffffffu || pos + 12 + length > bytes.size()) {
      throw DecodeError(pos, "PNG: chunk " + type + " runs past end of stream");
    }
    const std::uint32_t stored = read_be32(bytes.data() + pos + 8 + length);
    const auto crc = static_cast<std::uint32_t>(
        crc32(crc32(0L, Z_NULL, 0), bytes.data() + pos + 4, static_cast<uInt>(length + 4)));
    if (crc != stored) throw DecodeError(pos, "PNG: CRC mismatch in chunk " + type);
    if (type == "IDAT" && first_idat == 0) first_idat = pos;
    pos += 12 + length;
    if (type == "IEND") return first_idat;
  }
}

ImageBuffer decode_png(std::span<const std::uint8_t> bytes, std::optional<ColorModel> tag) {
  const std::size_t idat = check_png_structure(bytes);
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    std::string msg = image.message;
    png_image_free(&image);
    throw DecodeError(0, "PNG: " + msg);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int ch = color ? 3 : 1;
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
  // Alpha, if present, is composited onto black.
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw DecodeError(idat, "PNG: " + msg);
  }
  const int w = static_cast<int>(image.width), h = static_cast<int>(image.height);
  return ImageBuffer(w, h, ch, 8, model_for(ch, tag),
                     deinterleave(pixels, static_cast<std::size_t>(w) * h, ch));
}

// ---- QRAW -------------------------------------------------------------------

void put_le32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_le32(const std::uint8_t* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) |
         (std::uint32_t{p[3]} << 24);
}

ImageBuffer decode_qraw(std::span<const std::uint8_t> bytes, std::optional<ColorModel> tag) {
  const QrawHeader hdr = parse_qraw_header(bytes);
  const std::uint64_t expected = qraw_payload_size(hdr.width, hdr.height, hdr.channels, hdr.bits);
  const std::uint64_t available = bytes.size() - kQrawHeaderSize;
  if (available < expected) {
    throw DecodeError(bytes.size(), "QRAW: truncated payload, expected " +
                                        std::to_string(expected) + " bytes");
  }
  if (available > expected) {
    throw DecodeError(kQrawHeaderSize + expected, "QRAW: trailing bytes after payload");
  }
  const int bits = hdr.bits;
  const auto levels = quantization_levels(bits);
  const std::size_t w = hdr.width, h = hdr.height;
  const std::size_t stride = (w * bits + 7) / 8;
  const std::size_t n = w * h;
  std::vector<std::uint8_t> samples(n * hdr.channels);
  const std::uint8_t* payload = bytes.data() + kQrawHeaderSize;
  const unsigned mask = (1u << bits) - 1u;
  for (std::size_t c = 0; c < hdr.channels; ++c) {
    for (std::size_t y = 0; y < h; ++y) {
      const std::uint8_t* row = payload + (c * h + y) * stride;
      std::uint8_t* dst = samples.data() + c * n + y * w;
      for (std::size_t x = 0; x < w; ++x) {
        const std::size_t bit = x * bits;
        const unsigned shift = 8u - static_cast<unsigned>(bits) - static_cast<unsigned>(bit % 8);
        dst[x] = levels[(row[bit / 8] >> shift) & mask];
      }
    }
  }
  return ImageBuffer(static_cast<int>(w), static_cast<int>(h), hdr.channels, bits,
                     model_for(hdr.channels, tag), std::move(samples));
}

}  // namespace

std::string_view to_string(ImageFormat format) {
  switch (format) {
    case ImageFormat::Jpeg: return "jpeg";
    case ImageFormat::Png: return "png";
    case ImageFormat::Qraw: return "qraw";
  }
  return "unknown";
}

std::string_view file_extension(ImageFormat format) {
  switch (format) {
    case ImageFormat::Jpeg: return ".jpg";
    case ImageFormat::Png: return ".png";
    case ImageFormat::Qraw: return ".qraw";
  }
  return "";
}

EncodedBlob encode_jpeg(const ImageBuffer& buf, int quality) {
  if (quality < 1 || quality > 100) {
    throw InvalidArgument("JPEG quality must lie in [1, 100], got " + std::to_string(quality));
  }
  require_encodable(buf, "encode_jpeg");
  if (buf.channels() != 1 && buf.channels() != 3) {
    throw InvalidArgument("JPEG supports 1 or 3 channels; split or convert the " +
                          std::to_string(buf.channels()) + "-channel buffer first");
  }
  const auto pixels = interleave(buf);
  JpegEncodeJob job{pixels.data(), buf.width(), buf.height(), buf.channels(),
                    buf.channels() == 1                       ? JCS_GRAYSCALE
                    : buf.color_model() == ColorModel::YCbCr ? JCS_YCbCr
                                                              : JCS_RGB,
                    quality};
  const bool ok = run_jpeg_encode(job);
  EncodedBlob blob{ImageFormat::Jpeg, quality, {}, buf.width(), buf.height(), buf.channels()};
  if (job.out != nullptr) {
    if (ok) blob.bytes.assign(job.out, job.out + job.out_size);
    std::free(job.out);
  }
  if (!ok) throw Error(std::string("JPEG encoder failed: ") + job.message);
  return blob;
}

EncodedBlob encode_png(const ImageBuffer& buf) {
  require_encodable(buf, "encode_png");
  if (buf.channels() != 1 && buf.channels() != 3) {
    throw InvalidArgument("PNG storage supports 1 or 3 channels, got " +
                          std::to_string(buf.channels()));
  }
  const auto pixels = interleave(buf);
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(buf.width());
  image.height = static_cast<png_uint_32>(buf.height());
  image.format = buf.channels() == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  // One pass into a worst-case buffer; the size query would run the encoder twice.
  png_alloc_size_t size = PNG_IMAGE_PNG_SIZE_MAX(image);
  EncodedBlob blob{ImageFormat::Png, 0, std::vector<std::uint8_t>(size), buf.width(), buf.height(),
                   buf.channels()};
  if (!png_image_write_to_memory(&image, blob.bytes.data(), &size, 0, pixels.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw Error("PNG encoder failed: " + msg);
  }
  blob.bytes.resize(size);
  return blob;
}

std::uint64_t qraw_payload_size(std::uint64_t width, std::uint64_t height, std::uint64_t channels,
                                int bits) {
  return channels * height * ((width * static_cast<std::uint64_t>(bits) + 7) / 8);
}

QrawHeader parse_qraw_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kQrawHeaderSize) throw DecodeError(bytes.size(), "QRAW: truncated header");
  if (!std::equal(kQrawMagic.begin(), kQrawMagic.end(), bytes.begin())) {
    throw DecodeError(0, "QRAW: bad magic");
  }
  QrawHeader hdr;
  hdr.version = bytes[4];
  hdr.width = get_le32(bytes.data() + 5);
  hdr.height = get_le32(bytes.data() + 9);
  hdr.channels = bytes[13];
  hdr.bits = bytes[14];
  if (hdr.version != kQrawVersion) {
    throw DecodeError(4, "QRAW: unsupported version " + std::to_string(hdr.version));
  }
  if (hdr.width == 0 || hdr.width > 0x7fffffffu) throw DecodeError(5, "QRAW: invalid width");
  if (hdr.height == 0 || hdr.height > 0x7fffffffu) throw DecodeError(9, "QRAW: invalid height");
  if (hdr.channels != 1 && hdr.channels != 3 && hdr.channels != 5) {
    throw DecodeError(13, "QRAW: invalid channel count " + std::to_string(hdr.channels));
  }
  if (!is_supported_bit_depth(hdr.bits)) {
    throw DecodeError(14, "QRAW: invalid bit depth " + std::to_string(hdr.bits));
  }
  return hdr;
}

EncodedBlob encode_qraw(const ImageBuffer& buf) {
  require_encodable(buf, "encode_qraw");
  const int bits = buf.bit_depth();
  std::array<int, 256> index{};
  index.fill(-1);
  const auto levels = quantization_levels(bits);
  for (std::size_t i = 0; i < levels.size(); ++i) index[levels[i]] = static_cast<int>(i);

  const std::size_t w = static_cast<std::size_t>(buf.width());
  const std::size_t h = static_cast<std::size_t>(buf.height());
  const std::size_t stride = (w * bits + 7) / 8;
  std::vector<std::uint8_t> out;
  out.reserve(kQrawHeaderSize + qraw_payload_size(w, h, buf.channels(), bits));
  out.insert(out.end(), kQrawMagic.begin(), kQrawMagic.end());
  out.push_back(kQrawVersion);
  put_le32(out, static_cast<std::uint32_t>(w));
  put_le32(out, static_cast<std::uint32_t>(h));
  out.push_back(static_cast<std::uint8_t>(buf.channels()));
  out.push_back(static_cast<std::uint8_t>(bits));

  std::vector<std::uint8_t> row(stride);
  for (int c = 0; c < buf.channels(); ++c) {
    auto plane = buf.plane(c);
    for (std::size_t y = 0; y < h; ++y) {
      std::fill(row.begin(), row.end(), 0);
      for (std::size_t x = 0; x < w; ++x) {
        const int level = index[plane[y * w + x]];
        if (level < 0) {
          throw InvalidArgument("encode_qraw: sample " + std::to_string(plane[y * w + x]) +
                                " at (" + std::to_string(x) + ", " + std::to_string(y) +
                                ") is off the " + std::to_string(bits) + "-bit level set");
        }
        const std::size_t bit = x * bits;
        row[bit / 8] |= static_cast<std::uint8_t>(level << (8 - bits - static_cast<int>(bit % 8)));
      }
      out.insert(out.end(), row.begin(), row.end());
    }
  }
  return EncodedBlob{ImageFormat::Qraw, 0, std::move(out), buf.width(), buf.height(),
                     buf.channels()};
}

std::optional<ImageFormat> detect_format(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 3 && bytes[0] == 0xff && bytes[1] == 0xd8 && bytes[2] == 0xff) {
    return ImageFormat::Jpeg;
  }
  if (bytes.size() >= kPngMagic.size() &&
      std::equal(kPngMagic.begin(), kPngMagic.end(), bytes.begin())) {
    return ImageFormat::Png;
  }
  if (bytes.size() >= kQrawMagic.size() &&
      std::equal(kQrawMagic.begin(), kQrawMagic.end(), bytes.begin())) {
    return ImageFormat::Qraw;
  }
  return std::nullopt;
}

ImageBuffer decode_image(std::span<const std::uint8_t> bytes, std::optional<ColorModel> tag) {
  auto format = detect_format(bytes);
  if (!format) throw DecodeError(0, "unrecognized image stream");
  switch (*format) {
    case ImageFormat::Jpeg: return decode_jpeg(bytes, tag);
    case ImageFormat::Png: return decode_png(bytes, tag);
    case ImageFormat::Qraw: return decode_qraw(bytes, tag);
  }
  throw DecodeError(0, "unrecognized image stream");
}

ImageBuffer decode_image(const EncodedBlob& blob, std::optional<ColorModel> tag) {
  return decode_image(std::span<const std::uint8_t>(blob.bytes), tag);
}

ImageFormat storage_format(const PipelineConfig& cfg, const ImageBuffer& transformed) {
  if (cfg.jpeg_quality) return ImageFormat::Jpeg;
  if (transformed.bit_depth() < 8 || transformed.channels() == 5) return ImageFormat::Qraw;
  return ImageFormat::Png;
}

EncodedBlob encode_for_config(const ImageBuffer& transformed, const PipelineConfig& cfg) {
  switch (storage_format(cfg, transformed)) {
    case ImageFormat::Jpeg: return encode_jpeg(transformed, *cfg.jpeg_quality);
    case ImageFormat::Qraw: return encode_qraw(transformed);
    case ImageFormat::Png: return encode_png(transformed);
  }
  throw Error("unreachable storage format");
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
  if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), size)) {
    throw DataError("cannot read " + path.string());
  }
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("cannot write " + path.string());
}

ImageBuffer load_image(const std::filesystem::path& path, std::optional<ColorModel> tag) {
  const auto bytes = read_file(path);
  try {
    return decode_image(bytes, tag);
  } catch (const DecodeError& e) {
    throw DecodeError(e.offset(), path.string() + ": " + e.detail());
  }
}

bool is_image_file(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".qraw";
}

}  // namespace acqbench
