#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "acqbench/bench.hpp"
#include "acqbench/pipeline_config.hpp"

namespace acqbench {

/// Parameter grid plus the inputs and knobs of one sweep.
///
/// Spec files use the key/value grammar of pipeline configs; list keys may be
/// repeated and/or hold comma-separated values:
///
///   preset = baseline | optimized | full-grid   (fills lists left empty)
///   preset_gray = true | false                   (optimized preset only)
///   quant_bits = 8, 4, 2
///   jpeg_quality = lossless          # repeated key appends
///   jpeg_quality = 90
///   max_side | scale_factor | color_model | gamma | distortion_k1 = ...
///   corpus = <dir>        annotations = <json>     output = <dir>
///   detector = stub:... | cmd:...
///   bench_reps = N        (0 disables throughput measurement)
///   queue_capacity = N    bench_workers = N        workers = N
///   cap = N               (largest accepted grid, default 512)
///
/// Relative paths are resolved against the spec file's directory.
struct SweepSpec {
  std::vector<int> quant_bits;
  std::vector<std::optional<int>> jpeg_quality;
  std::vector<std::optional<int>> max_side;
  std::vector<std::optional<double>> scale_factor;
  std::vector<ColorModel> color_model;
  std::vector<GammaMode> gamma;
  std::vector<double> distortion_k1;

  std::filesystem::path corpus;
  std::optional<std::filesystem::path> annotations;
  std::optional<DetectorContract> detector;
  std::filesystem::path output;

  std::size_t cap = 512;
  int bench_reps = 0;
  std::size_t queue_capacity = 4;
  int bench_workers = 1;
  int workers = 0;  // 0: available parallelism

  /// Number of configurations in the cross product (empty lists count as the default value).
  std::size_t grid_size() const;
  /// Cross product in a fixed order (quant_bits varies slowest). Throws
  /// InvalidArgument when the grid exceeds `cap` or a value is invalid.
  std::vector<PipelineConfig> expand() const;
};

/// Parameter lists of a named preset. `gray` selects the gray variant of `optimized`.
SweepSpec preset(std::string_view name, bool gray = false);

SweepSpec parse_sweep_spec(std::string_view text, const std::filesystem::path& base_dir = {});
SweepSpec load_sweep_spec(const std::filesystem::path& path);

inline constexpr int kReportVersion = 1;

struct ReportRow {
  PipelineConfig config;
  std::string config_id;
  std::size_t images = 0;
  std::uint64_t baseline_bytes = 0;
  std::uint64_t variant_bytes = 0;
  double mean_bytes = 0;
  double median_bytes = 0;
  double reduction = 0;
  std::optional<double> map50;
  std::optional<double> fps;  // timing column
};

/// Column names of the CSV report, in order. The first column carries the
/// report format version.
const std::vector<std::string>& report_columns();

enum class ReportKind { Csv, Markdown, Svg };
ReportKind parse_report_kind(std::string_view name);

/// Renders a report. Absent values (no mAP, no FPS) are left empty, never 0.
/// Throws InvalidArgument for an empty row list.
std::string emit_report(const std::vector<ReportRow>& rows, ReportKind kind);

/// SVG scatter of two numeric columns ("variant_bytes", "fps" or "map50" on
/// either axis); rows lacking a value are skipped.
std::string emit_scatter(const std::vector<ReportRow>& rows, std::string_view x_column,
                         std::string_view y_column);

std::string report_row_csv(const ReportRow& row);
std::vector<ReportRow> parse_report_csv(std::string_view text);
std::vector<ReportRow> read_report_csv(const std::filesystem::path& path);

struct SweepOptions {
  bool resume = false;
  /// Stop after this many configurations were processed (simulated interruption).
  std::optional<std::size_t> limit;
};

struct SweepFailure {
  std::string config_id;
  std::string message;
};

struct SweepResult {
  std::vector<ReportRow> rows;  // completed configs, grid order
  std::vector<SweepFailure> failures;
  std::size_t skipped = 0;      // already complete on resume
  std::size_t pending = 0;      // not attempted because of `limit`
  std::filesystem::path csv_path;
};

/// Runs the grid. Each config is written to output/<config_id>/ and finished by
/// a one-line row.csv; with `resume`, configs that have one are not redone.
/// The default configuration is materialized in output/baseline/ as the size
/// reference. Report files (report.csv, report.md, bytes_vs_map50.svg,
/// fps_vs_map50.svg, failures.txt) are rewritten from all completed rows.
SweepResult run_sweep(const SweepSpec& spec, const SweepOptions& options = {});

}  // namespace acqbench
