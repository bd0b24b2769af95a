#include "acqbench/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <unistd.h>

#include "acqbench/annotations_io.hpp"
#include "acqbench/codec.hpp"
#include "acqbench/corpus.hpp"
#include "acqbench/error.hpp"
#include "acqbench/eval.hpp"
#include "acqbench/size_stats.hpp"
#include "acqbench/transforms.hpp"

namespace acqbench {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(std::string(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

long long parse_count(const KeyValue& kv) {
  long long v = 0;
  const std::string& s = kv.value;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || v < 0) {
    throw InvalidArgument("line " + std::to_string(kv.line) + ": " + kv.key +
                          " must be a non-negative integer");
  }
  return v;
}

bool parse_bool(const KeyValue& kv) {
  if (kv.value == "true" || kv.value == "yes" || kv.value == "1") return true;
  if (kv.value == "false" || kv.value == "no" || kv.value == "0") return false;
  throw InvalidArgument("line " + std::to_string(kv.line) + ": " + kv.key + " must be true or false");
}

template <typename T>
std::vector<T> or_default(const std::vector<T>& v, T fallback) {
  return v.empty() ? std::vector<T>{fallback} : v;
}

// Appends the value carried by a single pipeline key to the matching list.
void append_value(SweepSpec& spec, const KeyValue& kv) {
  PipelineConfig probe;
  apply_config_key(probe, kv);
  const std::string& k = kv.key;
  if (k == "quant_bits") {
    spec.quant_bits.push_back(probe.quant_bits);
  } else if (k == "jpeg_quality") {
    spec.jpeg_quality.push_back(probe.jpeg_quality);
  } else if (k == "max_side") {
    spec.max_side.push_back(probe.max_side);
  } else if (k == "scale_factor") {
    spec.scale_factor.push_back(probe.scale_factor);
  } else if (k == "color_model") {
    spec.color_model.push_back(probe.color_model);
  } else if (k == "gamma") {
    spec.gamma.push_back(probe.gamma);
  } else if (k == "distortion_k1") {
    spec.distortion_k1.push_back(probe.distortion_k1);
  }
}

bool is_list_key(std::string_view k) {
  return k == "quant_bits" || k == "jpeg_quality" || k == "max_side" || k == "scale_factor" ||
         k == "color_model" || k == "gamma" || k == "distortion_k1";
}

}  // namespace

std::size_t SweepSpec::grid_size() const {
  auto n = [](std::size_t s) { return std::max<std::size_t>(s, 1); };
  return n(quant_bits.size()) * n(jpeg_quality.size()) * n(max_side.size()) *
         n(scale_factor.size()) * n(color_model.size()) * n(gamma.size()) *
         n(distortion_k1.size());
}

std::vector<PipelineConfig> SweepSpec::expand() const {
  const std::size_t size = grid_size();
  if (size > cap) {
    throw InvalidArgument("grid has " + std::to_string(size) + " configurations, above the cap of " +
                          std::to_string(cap));
  }
  const PipelineConfig d;
  std::vector<PipelineConfig> out;
  out.reserve(size);
  for (int bits : or_default(quant_bits, d.quant_bits)) {
    for (auto q : or_default(jpeg_quality, d.jpeg_quality)) {
      for (auto side : or_default(max_side, d.max_side)) {
        for (auto f : or_default(scale_factor, d.scale_factor)) {
          for (auto cm : or_default(color_model, d.color_model)) {
            for (const auto& g : or_default(gamma, d.gamma)) {
              for (double k1 : or_default(distortion_k1, d.distortion_k1)) {
                PipelineConfig cfg;
                cfg.quant_bits = bits;
                cfg.jpeg_quality = q;
                cfg.max_side = side;
                cfg.scale_factor = f;
                cfg.color_model = cm;
                cfg.gamma = g;
                cfg.distortion_k1 = k1;
                cfg.validate();
                out.push_back(cfg);
              }
            }
          }
        }
      }
    }
  }
  return out;
}

SweepSpec preset(std::string_view name, bool gray) {
  SweepSpec s;
  if (name == "baseline") return s;
  if (name == "optimized") {
    s.quant_bits = {4};
    s.jpeg_quality = {90};
    s.max_side = {std::nullopt};
    s.color_model = {gray ? ColorModel::Gray : ColorModel::Rgb};
    return s;
  }
  if (name == "full-grid") {
    s.quant_bits = {8, 4, 2};
    s.jpeg_quality = {std::nullopt, 90, 70};
    s.max_side = {256, 512, 768, 1024};
    s.scale_factor = {0.5, 1.0, 2.0};
    s.color_model = {ColorModel::Rgb, ColorModel::Hsv, ColorModel::Hls, ColorModel::YCbCr,
                     ColorModel::Gray};
    s.gamma = {GammaMode::fixed(0.5), GammaMode::none(), GammaMode::fixed(2.5), GammaMode::dynamic()};
    s.distortion_k1 = {-0.2, 0.0, 0.2};
    return s;
  }
  throw InvalidArgument("unknown preset \"" + std::string(name) +
                        "\" (expected baseline, optimized or full-grid)");
}

SweepSpec parse_sweep_spec(std::string_view text, const fs::path& base_dir) {
  const auto kvs = parse_key_values(text);
  std::optional<std::string> preset_name;
  bool preset_gray = false;
  for (const auto& kv : kvs) {
    if (kv.key == "preset") preset_name = kv.value;
    if (kv.key == "preset_gray") preset_gray = parse_bool(kv);
  }
  SweepSpec spec;
  auto resolve_path = [&](const std::string& v) {
    fs::path p(v);
    return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  };
  for (const auto& kv : kvs) {
    const std::string& k = kv.key;
    if (is_list_key(k)) {
      for (const auto& part : split(kv.value, ',')) {
        KeyValue one{k, trim(part), kv.line};
        if (one.value.empty()) throw InvalidArgument("line " + std::to_string(kv.line) + ": empty value");
        append_value(spec, one);
      }
    } else if (k == "preset" || k == "preset_gray") {
      continue;
    } else if (k == "corpus") {
      spec.corpus = resolve_path(kv.value);
    } else if (k == "annotations") {
      spec.annotations = resolve_path(kv.value);
    } else if (k == "output") {
      spec.output = resolve_path(kv.value);
    } else if (k == "detector") {
      spec.detector = DetectorContract::parse(kv.value);
    } else if (k == "cap") {
      spec.cap = static_cast<std::size_t>(parse_count(kv));
    } else if (k == "bench_reps") {
      spec.bench_reps = static_cast<int>(parse_count(kv));
    } else if (k == "queue_capacity") {
      spec.queue_capacity = static_cast<std::size_t>(std::max(1LL, parse_count(kv)));
    } else if (k == "bench_workers") {
      spec.bench_workers = static_cast<int>(std::max(1LL, parse_count(kv)));
    } else if (k == "workers") {
      spec.workers = static_cast<int>(parse_count(kv));
    } else {
      throw InvalidArgument("line " + std::to_string(kv.line) + ": unknown key \"" + k + "\"");
    }
  }
  if (preset_name) {
    const SweepSpec p = preset(*preset_name, preset_gray);
    if (spec.quant_bits.empty()) spec.quant_bits = p.quant_bits;
    if (spec.jpeg_quality.empty()) spec.jpeg_quality = p.jpeg_quality;
    if (spec.max_side.empty()) spec.max_side = p.max_side;
    if (spec.scale_factor.empty()) spec.scale_factor = p.scale_factor;
    if (spec.color_model.empty()) spec.color_model = p.color_model;
    if (spec.gamma.empty()) spec.gamma = p.gamma;
    if (spec.distortion_k1.empty()) spec.distortion_k1 = p.distortion_k1;
  }
  if (spec.bench_reps > 0 && spec.bench_reps < 3) throw InvalidArgument("bench_reps must be 0 or at least 3");
  return spec;
}

SweepSpec load_sweep_spec(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_sweep_spec(ss.str(), path.parent_path());
}

// ---- reports -----------------------------------------------------------------

const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> cols{
      "version",   "config_id",      "quant_bits",   "jpeg_quality",  "max_side",
      "scale_factor", "color_model", "gamma",        "distortion_k1", "images",
      "baseline_bytes", "variant_bytes", "mean_bytes", "median_bytes", "reduction",
      "map50",     "fps"};
  return cols;
}

ReportKind parse_report_kind(std::string_view name) {
  if (name == "csv") return ReportKind::Csv;
  if (name == "markdown" || name == "md") return ReportKind::Markdown;
  if (name == "svg") return ReportKind::Svg;
  throw InvalidArgument("report kind must be csv, markdown or svg");
}

namespace {

std::string opt_number(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

std::string gamma_text(const GammaMode& g) {
  if (g.kind == GammaMode::Kind::Dynamic) return "dynamic";
  if (g.kind == GammaMode::Kind::Fixed) return format_number(g.gamma);
  return "none";
}

std::vector<std::string> row_fields(const ReportRow& r) {
  const PipelineConfig& c = r.config;
  return {std::to_string(kReportVersion),
          r.config_id,
          std::to_string(c.quant_bits),
          c.jpeg_quality ? std::to_string(*c.jpeg_quality) : "lossless",
          c.max_side ? std::to_string(*c.max_side) : "full",
          c.scale_factor ? format_number(*c.scale_factor) : "none",
          std::string(to_string(c.color_model)),
          gamma_text(c.gamma),
          format_number(c.distortion_k1),
          std::to_string(r.images),
          std::to_string(r.baseline_bytes),
          std::to_string(r.variant_bytes),
          format_number(r.mean_bytes),
          format_number(r.median_bytes),
          format_number(r.reduction),
          opt_number(r.map50),
          opt_number(r.fps)};
}

std::string join(const std::vector<std::string>& v, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += sep;
    out += v[i];
  }
  return out;
}

double to_double(const std::string& s, const std::string& column) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw SchemaError("column " + column + ": bad number \"" + s + "\"");
  }
  return v;
}

std::uint64_t to_u64(const std::string& s, const std::string& column) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw SchemaError("column " + column + ": bad integer \"" + s + "\"");
  }
  return v;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::optional<double> column_value(const ReportRow& r, std::string_view column) {
  if (column == "variant_bytes") return static_cast<double>(r.variant_bytes);
  if (column == "mean_bytes") return r.mean_bytes;
  if (column == "reduction") return r.reduction;
  if (column == "map50") return r.map50;
  if (column == "fps") return r.fps;
  throw InvalidArgument("cannot plot column \"" + std::string(column) + "\"");
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string axis_label(std::string_view column) {
  if (column == "variant_bytes") return "total bytes";
  if (column == "mean_bytes") return "mean bytes per image";
  if (column == "reduction") return "size reduction";
  if (column == "map50") return "mAP@0.5";
  if (column == "fps") return "end-to-end FPS";
  return std::string(column);
}

}  // namespace

std::string report_row_csv(const ReportRow& row) { return join(row_fields(row), ",") + "\n"; }

std::string emit_scatter(const std::vector<ReportRow>& rows, std::string_view x_column,
                         std::string_view y_column) {
  if (rows.empty()) throw InvalidArgument("no rows to report");
  constexpr double kW = 640, kH = 420, kLeft = 70, kRight = 20, kTop = 30, kBottom = 50;
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  bool any_x = false, any_y = false;
  for (const auto& r : rows) {
    if (auto x = column_value(r, x_column)) {
      xmin = any_x ? std::min(xmin, *x) : *x;
      xmax = any_x ? std::max(xmax, *x) : *x;
      any_x = true;
    }
    if (auto y = column_value(r, y_column)) {
      ymin = any_y ? std::min(ymin, *y) : *y;
      ymax = any_y ? std::max(ymax, *y) : *y;
      any_y = true;
    }
  }
  auto widen = [](double& lo, double& hi) {
    if (hi - lo < 1e-12) {
      const double pad = std::max(std::abs(lo) * 0.05, 0.5);
      lo -= pad;
      hi += pad;
    }
  };
  widen(xmin, xmax);
  widen(ymin, ymax);
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return kTop + ph - (y - ymin) / (ymax - ymin) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
    << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n";
  o << "<style>.axis{stroke:#333;stroke-width:1}.point{fill:#1f77b4;stroke:#0b3d63}"
       ".point.missing{fill:none;stroke:#999}text{font-family:sans-serif;font-size:12px}</style>\n";
  o << "<rect x=\"0\" y=\"0\" width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n";
  o << "<line class=\"axis\" x1=\"" << kLeft << "\" y1=\"" << kTop + ph << "\" x2=\"" << kLeft + pw
    << "\" y2=\"" << kTop + ph << "\"/>\n";
  o << "<line class=\"axis\" x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft
    << "\" y2=\"" << kTop + ph << "\"/>\n";
  o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\">"
    << xml_escape(axis_label(x_column)) << "</text>\n";
  o << "<text x=\"16\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << kTop + ph / 2 << ")\">" << xml_escape(axis_label(y_column)) << "</text>\n";
  const int xd = xmax - xmin < 10 ? 3 : 0;
  const int yd = ymax - ymin < 10 ? 3 : 0;
  o << "<text x=\"" << kLeft << "\" y=\"" << kTop + ph + 16 << "\" text-anchor=\"start\">"
    << fixed(xmin, xd) << "</text>\n";
  o << "<text x=\"" << kLeft + pw << "\" y=\"" << kTop + ph + 16 << "\" text-anchor=\"end\">"
    << fixed(xmax, xd) << "</text>\n";
  o << "<text x=\"" << kLeft - 6 << "\" y=\"" << kTop + ph << "\" text-anchor=\"end\">"
    << fixed(ymin, yd) << "</text>\n";
  o << "<text x=\"" << kLeft - 6 << "\" y=\"" << kTop + 10 << "\" text-anchor=\"end\">"
    << fixed(ymax, yd) << "</text>\n";
  for (const auto& r : rows) {
    const auto x = column_value(r, x_column);
    const auto y = column_value(r, y_column);
    // Missing values sit on the axis as hollow markers.
    const bool missing = !x || !y;
    const double cx = x ? px(*x) : kLeft;
    const double cy = y ? py(*y) : kTop + ph;
    o << "<circle class=\"point" << (missing ? " missing" : "") << "\" cx=\"" << fixed(cx, 2)
      << "\" cy=\"" << fixed(cy, 2) << "\" r=\"4\"><title>" << xml_escape(r.config_id)
      << "</title></circle>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string emit_report(const std::vector<ReportRow>& rows, ReportKind kind) {
  if (rows.empty()) throw InvalidArgument("no rows to report");
  switch (kind) {
    case ReportKind::Csv: {
      std::string out = join(report_columns(), ",") + "\n";
      for (const auto& r : rows) out += report_row_csv(r);
      return out;
    }
    case ReportKind::Markdown: {
      std::ostringstream o;
      o << "| config | bits | jpeg | side | scale | color | gamma | k1 | images | bytes | reduction | mAP@0.5 | FPS |\n";
      o << "|---|---|---|---|---|---|---|---|---|---|---|---|---|\n";
      bool dynamic = false;
      for (const auto& r : rows) {
        const auto f = row_fields(r);
        dynamic = dynamic || r.config.gamma.kind == GammaMode::Kind::Dynamic;
        o << "| " << r.config_id << " | " << f[2] << " | " << f[3] << " | " << f[4] << " | " << f[5]
          << " | " << f[6] << " | " << f[7] << " | " << f[8] << " | " << r.images << " | "
          << r.variant_bytes << " | " << fixed(r.reduction * 100.0, 1) << " % | "
          << (r.map50 ? fixed(*r.map50, 4) : "") << " | " << (r.fps ? fixed(*r.fps, 1) : "")
          << " |\n";
      }
      if (dynamic) {
        o << "\nDynamic gamma uses a mean-luma estimator (gamma = ln 0.5 / ln(mean/255), "
             "clamped to [0.25, 4]).\n";
      }
      return o.str();
    }
    case ReportKind::Svg:
      return emit_scatter(rows, "variant_bytes", "map50");
  }
  return {};
}

std::vector<ReportRow> parse_report_csv(std::string_view text) {
  std::vector<std::string> lines;
  for (auto& l : split(text, '\n')) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
    if (!l.empty()) lines.push_back(l);
  }
  if (lines.empty()) throw SchemaError("empty report");
  const auto& cols = report_columns();
  if (split(lines[0], ',') != cols) throw SchemaError("unexpected report header");
  std::vector<ReportRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i], ',');
    if (f.size() != cols.size()) {
      throw SchemaError("report line " + std::to_string(i + 1) + ": expected " +
                        std::to_string(cols.size()) + " fields");
    }
    if (f[0] != std::to_string(kReportVersion)) throw SchemaError("unsupported report version " + f[0]);
    ReportRow r;
    for (std::size_t c = 2; c <= 8; ++c) {
      try {
        apply_config_key(r.config, KeyValue{cols[c], f[c], static_cast<int>(i + 1)});
      } catch (const InvalidArgument& e) {
        throw SchemaError(e.what());
      }
    }
    r.config_id = f[1];
    r.images = static_cast<std::size_t>(to_u64(f[9], cols[9]));
    r.baseline_bytes = to_u64(f[10], cols[10]);
    r.variant_bytes = to_u64(f[11], cols[11]);
    r.mean_bytes = to_double(f[12], cols[12]);
    r.median_bytes = to_double(f[13], cols[13]);
    r.reduction = to_double(f[14], cols[14]);
    if (!f[15].empty()) r.map50 = to_double(f[15], cols[15]);
    if (!f[16].empty()) r.fps = to_double(f[16], cols[16]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ReportRow> read_report_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_report_csv(ss.str());
}

// ---- sweep execution ------------------------------------------------------------

namespace {

void write_text_atomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot create " + tmp.string());
    out << text;
    if (!out) throw DataError("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::optional<std::string> read_text_if_exists(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs fn(i) for i in [0, n) on up to `threads` threads; rethrows the first failure.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  const int t = std::clamp<int>(threads, 1, static_cast<int>(std::max<std::size_t>(n, 1)));
  std::vector<std::thread> pool;
  for (int k = 1; k < t; ++k) pool.emplace_back(body);
  body();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

struct VariantInfo {
  std::string stem;
  fs::path path;
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 8;
  ColorModel model = ColorModel::Rgb;
  ImageFormat format = ImageFormat::Png;
};

// Transforms, encodes and writes every corpus item; verifies each written file.
std::vector<VariantInfo> materialize(const Corpus& corpus, const PipelineConfig& cfg,
                                     const fs::path& dir, int threads) {
  std::vector<VariantInfo> infos(corpus.items.size());
  parallel_for(corpus.items.size(), threads, [&](std::size_t i) {
    const CorpusItem& item = corpus.items[i];
    try {
      const ImageBuffer out = apply_config(load_corpus_item(item), cfg);
      const EncodedBlob blob = encode_for_config(out, cfg);
      VariantInfo info;
      info.stem = item.stem;
      info.path = dir / (item.stem + std::string(file_extension(blob.format)));
      info.width = out.width();
      info.height = out.height();
      info.channels = out.channels();
      info.bit_depth = out.bit_depth();
      info.model = out.color_model();
      info.format = blob.format;
      write_file(info.path, blob.bytes);
      const ImageBuffer back = decode_image(read_file(info.path), out.color_model());
      const auto violations = validate_buffer(back);
      if (!violations.empty()) {
        throw DataError("written image fails validation (" + violations.front().code + ": " +
                        violations.front().detail + ")");
      }
      if (blob.format != ImageFormat::Jpeg && !(back == out)) {
        throw DataError("lossless round trip changed the image");
      }
      infos[i] = std::move(info);
    } catch (const std::exception& e) {
      throw DataError(item.stem + ": " + e.what());
    }
  });
  return infos;
}

std::string stem_of(const std::string& file_name) { return fs::path(file_name).stem().string(); }

struct SweepContext {
  const SweepSpec& spec;
  Corpus corpus;
  std::optional<AnnotationSet> gt;
  std::map<std::string, std::int64_t> image_ids;  // stem -> ground-truth id
  fs::path baseline_dir;
  fs::path scratch_root;
  int inner_threads = 1;
};

ReportRow process_config(const SweepContext& ctx, const PipelineConfig& cfg, const fs::path& dir) {
  std::error_code ec;
  fs::remove_all(dir, ec);
  fs::create_directories(dir);
  const std::string id = config_id(cfg);
  const auto infos = materialize(ctx.corpus, cfg, dir, ctx.inner_threads);
  const SizeStats stats = compute_size_stats(ctx.baseline_dir, dir);

  ReportRow row;
  row.config = cfg;
  row.config_id = id;
  row.images = stats.entries.size();
  row.baseline_bytes = stats.baseline_total;
  row.variant_bytes = stats.variant_total;
  row.mean_bytes = stats.variant_mean;
  row.median_bytes = stats.variant_median;
  row.reduction = stats.reduction;

  const fs::path scratch = ctx.scratch_root / id;
  fs::create_directories(scratch);
  const auto& det = ctx.spec.detector;
  if (det && det->kind == DetectorContract::Kind::External && ctx.gt) {
    SizeMap sizes;
    std::vector<const VariantInfo*> targets;
    for (const auto& info : infos) {
      auto it = ctx.image_ids.find(info.stem);
      if (it == ctx.image_ids.end()) continue;
      sizes[it->second] = {info.width, info.height};
      targets.push_back(&info);
    }
    AnnotationSet gt = *ctx.gt;
    rescale_boxes(gt, sizes);
    DetectionSet dets;
    dets.images = gt.images;
    dets.categories = gt.categories;
    std::vector<std::vector<BoundingBox>> per_image(targets.size());
    parallel_for(targets.size(), ctx.inner_threads, [&](std::size_t k) {
      const VariantInfo& info = *targets[k];
      DetectorRequest req;
      req.image = info.path;
      req.image_id = ctx.image_ids.at(info.stem);
      req.stem = info.stem;
      req.width = info.width;
      req.height = info.height;
      req.channels = info.channels;
      req.bit_depth = info.bit_depth;
      req.color_model = std::string(to_string(info.model));
      req.format = std::string(to_string(info.format));
      req.config_id = id;
      try {
        per_image[k] = invoke_detector(*det, req, scratch / (info.stem + ".meta.json"));
      } catch (const std::exception& e) {
        throw DataError(info.stem + ": " + e.what());
      }
    });
    for (std::size_t k = 0; k < targets.size(); ++k) {
      const std::int64_t image_id = ctx.image_ids.at(targets[k]->stem);
      for (const auto& b : per_image[k]) {
        if (!gt.has_category(b.category_id)) {
          throw DataError(targets[k]->stem + ": detector reported unknown category " +
                          std::to_string(b.category_id));
        }
        dets.boxes.push_back({image_id, b});
      }
    }
    save_detections(dir / "detections.json", dets);
    row.map50 = evaluate(gt, dets).map50;
  }
  if (det && ctx.spec.bench_reps > 0) {
    BenchOptions opts;
    opts.reps = ctx.spec.bench_reps;
    opts.queue_capacity = ctx.spec.queue_capacity;
    opts.workers_per_stage = ctx.spec.bench_workers;
    opts.work_dir = scratch / "bench";
    opts.image_ids = ctx.image_ids;
    row.fps = run_bench(ctx.corpus, cfg, *det, opts).fps_median;
  }
  fs::remove_all(scratch, ec);
  write_text_atomic(dir / "row.csv", join(report_columns(), ",") + "\n" + report_row_csv(row));
  return row;
}

std::optional<ReportRow> completed_row(const fs::path& dir) {
  const auto text = read_text_if_exists(dir / "row.csv");
  if (!text) return std::nullopt;
  try {
    auto rows = parse_report_csv(*text);
    if (rows.size() != 1) return std::nullopt;
    return rows.front();
  } catch (const SchemaError&) {
    return std::nullopt;
  }
}

void ensure_baseline(const Corpus& corpus, const fs::path& dir, int threads) {
  const fs::path marker = dir / ".complete";
  const std::string fingerprint = corpus.fingerprint() + "\n";
  if (read_text_if_exists(marker) == fingerprint) return;
  std::error_code ec;
  fs::remove_all(dir, ec);
  fs::create_directories(dir);
  materialize(corpus, PipelineConfig{}, dir, threads);
  write_text_atomic(marker, fingerprint);
}

}  // namespace

SweepResult run_sweep(const SweepSpec& spec, const SweepOptions& options) {
  if (spec.corpus.empty()) throw InvalidArgument("sweep needs a corpus directory");
  if (spec.output.empty()) throw InvalidArgument("sweep needs an output directory");
  const auto configs = spec.expand();

  SweepContext ctx{spec, scan_corpus(spec.corpus), std::nullopt, {}, {}, {}, 1};
  if (ctx.corpus.items.empty()) throw DataError("corpus " + spec.corpus.string() + " has no images");
  if (spec.annotations) {
    ctx.gt = load_annotations(*spec.annotations);
    for (const auto& img : ctx.gt->images) ctx.image_ids[stem_of(img.file_name)] = img.id;
  }
  fs::create_directories(spec.output);
  ctx.baseline_dir = spec.output / "baseline";
  ctx.scratch_root = fs::temp_directory_path() /
                     ("acqbench-sweep-" + std::to_string(::getpid()) + "-" +
                      std::to_string(std::hash<std::string>{}(fs::absolute(spec.output).string())));

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int workers = spec.workers > 0 ? spec.workers : static_cast<int>(hw);
  ctx.inner_threads = std::max(1, static_cast<int>(hw) / std::max(1, workers));
  ensure_baseline(ctx.corpus, ctx.baseline_dir, static_cast<int>(hw));

  const std::size_t n = configs.size();
  std::vector<std::optional<ReportRow>> rows(n);
  std::vector<std::optional<std::string>> errors(n);
  std::vector<char> skipped(n, 0), pending(n, 0);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> started{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      const fs::path dir = spec.output / config_id(configs[i]);
      if (options.resume) {
        if (auto done = completed_row(dir)) {
          rows[i] = std::move(done);
          skipped[i] = 1;
          continue;
        }
      }
      if (options.limit && started++ >= *options.limit) {
        pending[i] = 1;
        continue;
      }
      try {
        rows[i] = process_config(ctx, configs[i], dir);
      } catch (const std::exception& e) {
        errors[i] = e.what();
        std::error_code ec;
        fs::remove(dir / "row.csv", ec);
      }
    }
  };
  std::vector<std::thread> pool;
  const int t = std::clamp<int>(workers, 1, static_cast<int>(std::max<std::size_t>(n, 1)));
  for (int k = 1; k < t; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  std::error_code ec;
  fs::remove_all(ctx.scratch_root, ec);

  SweepResult result;
  std::string failure_text;
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i]) result.rows.push_back(*rows[i]);
    if (errors[i]) {
      result.failures.push_back({config_id(configs[i]), *errors[i]});
      failure_text += config_id(configs[i]) + ": " + *errors[i] + "\n";
    }
    result.skipped += skipped[i];
    result.pending += pending[i];
  }

  result.csv_path = spec.output / "report.csv";
  const fs::path failures_path = spec.output / "failures.txt";
  if (failure_text.empty()) {
    fs::remove(failures_path, ec);
  } else {
    write_text_atomic(failures_path, failure_text);
  }
  if (!result.rows.empty()) {
    write_text_atomic(result.csv_path, emit_report(result.rows, ReportKind::Csv));
    write_text_atomic(spec.output / "report.md", emit_report(result.rows, ReportKind::Markdown));
    write_text_atomic(spec.output / "bytes_vs_map50.svg",
                      emit_scatter(result.rows, "variant_bytes", "map50"));
    write_text_atomic(spec.output / "fps_vs_map50.svg", emit_scatter(result.rows, "fps", "map50"));
  }
  return result;
}

}  // namespace acqbench
