#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "acqbench/image_buffer.hpp"

namespace acqbench {

/// Gamma treatment of a pipeline. fixed(1.0) is the same mapping as none()
/// and compares equal to it.
struct GammaMode {
  enum class Kind { None, Fixed, Dynamic };

  Kind kind = Kind::None;
  double gamma = 1.0;

  static GammaMode none() { return {}; }
  /// Throws InvalidArgument unless 0 < gamma <= 10.
  static GammaMode fixed(double gamma);
  static GammaMode dynamic() { return {Kind::Dynamic, 1.0}; }

  bool is_identity() const { return kind == Kind::None || (kind == Kind::Fixed && gamma == 1.0); }
  friend bool operator==(const GammaMode& a, const GammaMode& b);
};

// Clamp range of the dynamic gamma estimate.
inline constexpr double kDynamicGammaMin = 0.25;
inline constexpr double kDynamicGammaMax = 4.0;

/// One point of the acquisition-parameter space.
struct PipelineConfig {
  int quant_bits = 8;
  std::optional<int> jpeg_quality;  // absent: lossless storage
  std::optional<int> max_side;
  std::optional<double> scale_factor;
  ColorModel color_model = ColorModel::Rgb;
  GammaMode gamma;
  double distortion_k1 = 0.0;

  /// Throws InvalidArgument on the first out-of-range field.
  void validate() const;

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

/// Canonical row key / directory name, e.g. "q4_j90_full_gray_g1_k0".
///
/// Layout: q<bits>_<lossless|j<q>>_<full|s<side>>[x<factor>]_<color>_<g1|g<gamma>|gdyn>_k<k1>.
/// Reals use the shortest round-trip decimal form, so the mapping is injective.
std::string config_id(const PipelineConfig& cfg);

/// Shortest decimal text that parses back to the same double ("0.5", "-0.2", "2").
std::string format_number(double value);

/// One `key = value` line of a config or sweep-spec file.
struct KeyValue {
  std::string key;
  std::string value;
  int line = 0;
};

/// Splits config text into key/value pairs. `#` starts a comment; blank lines
/// are skipped; keys are lower-cased. Throws InvalidArgument on lines without '='.
std::vector<KeyValue> parse_key_values(std::string_view text);

/// Applies one key to `cfg`. Returns false when the key is not a pipeline key.
/// Throws InvalidArgument when the key is known but the value is invalid.
bool apply_config_key(PipelineConfig& cfg, const KeyValue& kv);

/// Parses a single-configuration file. Every key may appear at most once.
PipelineConfig parse_pipeline_config(std::string_view text);
PipelineConfig load_pipeline_config(const std::string& path);

/// Renders `cfg` in the same grammar parse_pipeline_config() accepts.
std::string to_config_text(const PipelineConfig& cfg);

}  // namespace acqbench
