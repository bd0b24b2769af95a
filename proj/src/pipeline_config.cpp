#include "acqbench/pipeline_config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "acqbench/error.hpp"

namespace acqbench {

namespace {

std::string trim(std::string_view s) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && is_space(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

[[noreturn]] void bad_value(const KeyValue& kv, const std::string& why) {
  throw InvalidArgument("line " + std::to_string(kv.line) + ": invalid value '" + kv.value +
                        "' for " + kv.key + ": " + why);
}

int parse_int(const KeyValue& kv) {
  int v = 0;
  const char* end = kv.value.data() + kv.value.size();
  auto [ptr, ec] = std::from_chars(kv.value.data(), end, v);
  if (ec != std::errc() || ptr != end) bad_value(kv, "expected an integer");
  return v;
}

double parse_real(const KeyValue& kv) {
  double v = 0;
  const char* end = kv.value.data() + kv.value.size();
  auto [ptr, ec] = std::from_chars(kv.value.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) bad_value(kv, "expected a number");
  return v;
}

}  // namespace

GammaMode GammaMode::fixed(double gamma) {
  if (!(gamma > 0.0) || gamma > 10.0) {
    throw InvalidArgument("fixed gamma must lie in (0, 10], got " + format_number(gamma));
  }
  return {Kind::Fixed, gamma};
}

bool operator==(const GammaMode& a, const GammaMode& b) {
  if (a.is_identity() || b.is_identity()) return a.is_identity() && b.is_identity();
  if (a.kind != b.kind) return false;
  return a.kind == GammaMode::Kind::Dynamic || a.gamma == b.gamma;
}

void PipelineConfig::validate() const {
  if (!is_supported_bit_depth(quant_bits)) {
    throw InvalidArgument("quant_bits must be 2, 4 or 8, got " + std::to_string(quant_bits));
  }
  if (jpeg_quality && (*jpeg_quality < 1 || *jpeg_quality > 100)) {
    throw InvalidArgument("jpeg_quality must lie in [1, 100], got " +
                          std::to_string(*jpeg_quality));
  }
  if (max_side && *max_side < 8) {
    throw InvalidArgument("max_side must be >= 8, got " + std::to_string(*max_side));
  }
  if (scale_factor && !(*scale_factor > 0.0 && *scale_factor <= 4.0)) {
    throw InvalidArgument("scale_factor must lie in (0, 4], got " + format_number(*scale_factor));
  }
  if (gamma.kind == GammaMode::Kind::Fixed && (!(gamma.gamma > 0.0) || gamma.gamma > 10.0)) {
    throw InvalidArgument("fixed gamma must lie in (0, 10]");
  }
  if (!std::isfinite(distortion_k1) || std::abs(distortion_k1) > 0.5) {
    throw InvalidArgument("distortion_k1 must satisfy |k1| <= 0.5, got " +
                          format_number(distortion_k1));
  }
  if (jpeg_quality && color_model == ColorModel::Bgrne) {
    throw InvalidArgument("JPEG storage is not available for 5-channel BGRNE buffers");
  }
}

std::string format_number(double value) {
  if (value == 0.0) return "0";  // folds -0
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) return std::to_string(value);
  return std::string(buf, ptr);
}

std::string config_id(const PipelineConfig& cfg) {
  std::string id = "q" + std::to_string(cfg.quant_bits) + "_";
  id += cfg.jpeg_quality ? "j" + std::to_string(*cfg.jpeg_quality) : std::string("lossless");
  id += "_";
  id += cfg.max_side ? "s" + std::to_string(*cfg.max_side) : std::string("full");
  if (cfg.scale_factor) id += "x" + format_number(*cfg.scale_factor);
  id += "_";
  id += to_string(cfg.color_model);
  id += "_";
  if (cfg.gamma.is_identity()) {
    id += "g1";
  } else if (cfg.gamma.kind == GammaMode::Kind::Dynamic) {
    id += "gdyn";
  } else {
    id += "g" + format_number(cfg.gamma.gamma);
  }
  id += "_k" + format_number(cfg.distortion_k1);
  return id;
}

std::vector<KeyValue> parse_key_values(std::string_view text) {
  std::vector<KeyValue> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::string body = trim(line);
    if (body.empty()) continue;
    auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("line " + std::to_string(number) + ": expected 'key = value'");
    }
    KeyValue kv{lower(trim(std::string_view(body).substr(0, eq))),
                trim(std::string_view(body).substr(eq + 1)), number};
    if (kv.key.empty()) {
      throw InvalidArgument("line " + std::to_string(number) + ": empty key");
    }
    out.push_back(std::move(kv));
  }
  return out;
}

bool apply_config_key(PipelineConfig& cfg, const KeyValue& kv) {
  const std::string v = lower(kv.value);
  if (kv.key == "quant_bits") {
    cfg.quant_bits = parse_int(kv);
    if (!is_supported_bit_depth(cfg.quant_bits)) bad_value(kv, "expected 2, 4 or 8");
  } else if (kv.key == "jpeg_quality") {
    if (v == "lossless" || v == "none") {
      cfg.jpeg_quality.reset();
    } else {
      cfg.jpeg_quality = parse_int(kv);
      if (*cfg.jpeg_quality < 1 || *cfg.jpeg_quality > 100) bad_value(kv, "expected 1..100");
    }
  } else if (kv.key == "max_side") {
    if (v == "full" || v == "none") {
      cfg.max_side.reset();
    } else {
      cfg.max_side = parse_int(kv);
      if (*cfg.max_side < 8) bad_value(kv, "expected >= 8");
    }
  } else if (kv.key == "scale_factor") {
    if (v == "none") {
      cfg.scale_factor.reset();
    } else {
      cfg.scale_factor = parse_real(kv);
      if (!(*cfg.scale_factor > 0.0 && *cfg.scale_factor <= 4.0)) bad_value(kv, "expected (0, 4]");
    }
  } else if (kv.key == "color_model") {
    try {
      cfg.color_model = parse_color_model(v);
    } catch (const InvalidArgument& e) {
      bad_value(kv, e.what());
    }
  } else if (kv.key == "gamma") {
    if (v == "none") {
      cfg.gamma = GammaMode::none();
    } else if (v == "dynamic") {
      cfg.gamma = GammaMode::dynamic();
    } else {
      double g = parse_real(kv);
      if (!(g > 0.0) || g > 10.0) bad_value(kv, "expected none, dynamic or a value in (0, 10]");
      cfg.gamma = GammaMode::fixed(g);
    }
  } else if (kv.key == "distortion_k1") {
    cfg.distortion_k1 = parse_real(kv);
    if (std::abs(cfg.distortion_k1) > 0.5) bad_value(kv, "expected |k1| <= 0.5");
  } else {
    return false;
  }
  return true;
}

PipelineConfig parse_pipeline_config(std::string_view text) {
  PipelineConfig cfg;
  std::set<std::string> seen;
  for (const auto& kv : parse_key_values(text)) {
    if (!seen.insert(kv.key).second) {
      throw InvalidArgument("line " + std::to_string(kv.line) + ": duplicate key '" + kv.key +
                            "' (lists belong in sweep specs)");
    }
    if (!apply_config_key(cfg, kv)) {
      throw InvalidArgument("line " + std::to_string(kv.line) + ": unknown key '" + kv.key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_pipeline_config(ss.str());
}

std::string to_config_text(const PipelineConfig& cfg) {
  std::string out;
  out += "quant_bits = " + std::to_string(cfg.quant_bits) + "\n";
  out += "jpeg_quality = " +
         (cfg.jpeg_quality ? std::to_string(*cfg.jpeg_quality) : std::string("lossless")) + "\n";
  out += "max_side = " + (cfg.max_side ? std::to_string(*cfg.max_side) : std::string("full")) +
         "\n";
  out += "scale_factor = " +
         (cfg.scale_factor ? format_number(*cfg.scale_factor) : std::string("none")) + "\n";
  out += "color_model = " + std::string(to_string(cfg.color_model)) + "\n";
  std::string gamma = "none";
  if (cfg.gamma.kind == GammaMode::Kind::Dynamic) gamma = "dynamic";
  if (cfg.gamma.kind == GammaMode::Kind::Fixed) gamma = format_number(cfg.gamma.gamma);
  out += "gamma = " + gamma + "\n";
  out += "distortion_k1 = " + format_number(cfg.distortion_k1) + "\n";
  return out;
}

}  // namespace acqbench
