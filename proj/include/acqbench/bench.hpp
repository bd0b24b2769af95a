#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "acqbench/boxes.hpp"
#include "acqbench/corpus.hpp"
#include "acqbench/pipeline_config.hpp"

namespace acqbench {

enum class Stage { Read, Decode, Transform, Encode, TransferModel, Detect, Post };

inline constexpr std::array<Stage, 7> kStages{Stage::Read,          Stage::Decode, Stage::Transform,
                                              Stage::Encode,        Stage::TransferModel,
                                              Stage::Detect,        Stage::Post};

std::string_view to_string(Stage stage);

struct StageTiming {
  Stage stage = Stage::Read;
  std::int64_t wall_ns = 0;
  std::uint64_t bytes_in = 0;
  std::uint64_t bytes_out = 0;
};

/// Simulated inference latency t = a + b * pixels + c * payload_bytes.
struct StubLatencyModel {
  double fixed_ms = 0;        // a
  double ns_per_pixel = 0;    // b
  double ns_per_byte = 0;     // c

  std::chrono::nanoseconds latency(std::uint64_t pixels, std::uint64_t payload_bytes) const;
};

/// How detection is performed during a benchmark.
///
/// Textual forms accepted by parse():
///   stub:small | stub:large | stub:a=<ms>,b=<ns/pixel>,c=<ns/byte>
///   cmd:<command>   (invoked as `<command> --image <path> --meta <json-path>`)
struct DetectorContract {
  enum class Kind { Stub, External };

  Kind kind = Kind::Stub;
  StubLatencyModel stub;
  std::string command;
  std::chrono::milliseconds timeout{30000};

  static DetectorContract parse(std::string_view spec);
  /// Payload-dominated model (small, I/O-bound detector).
  static DetectorContract small_model_stub();
  /// Compute-dominated model (large detector).
  static DetectorContract large_model_stub();
  std::string descriptor() const;
};

/// What an external detector is told about the image it receives.
struct DetectorRequest {
  std::filesystem::path image;
  std::int64_t image_id = 0;
  std::string stem;
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 8;
  std::string color_model;
  std::string format;
  std::string config_id;
};

/// Writes the request metadata to `meta_path`, runs the external detector and
/// parses its standard output. Entries without "image_id" get the request's id.
/// Throws DataError on timeout, non-zero exit, or malformed output.
std::vector<BoundingBox> invoke_detector(const DetectorContract& detector,
                                         const DetectorRequest& request,
                                         const std::filesystem::path& meta_path,
                                         std::uint64_t* output_bytes = nullptr);

struct StageSummary {
  Stage stage = Stage::Read;
  double mean_ms = 0;
  double p50_ms = 0;
  double p95_ms = 0;
  std::uint64_t bytes_in = 0;   // per pass
  std::uint64_t bytes_out = 0;  // per pass
};

struct BenchOptions {
  int reps = 3;
  std::size_t queue_capacity = 4;
  int workers_per_stage = 1;
  /// Scratch directory for encoded payloads and detector metadata; a unique
  /// temporary directory is used (and removed) when empty.
  std::filesystem::path work_dir;
  /// Ground-truth image ids by stem, forwarded to external detectors.
  std::map<std::string, std::int64_t> image_ids;
  /// Run aborts when more than this fraction of images fail.
  double max_error_fraction = 0.10;
};

struct BenchReport {
  std::string config_id;
  std::string corpus_fingerprint;
  std::size_t corpus_size = 0;
  std::string detector;
  int reps = 0;
  std::vector<StageSummary> stages;
  std::vector<double> fps_per_rep;
  double fps_median = 0;  // end-to-end N / pass wall time, median over reps
  double fps_mean = 0;    // N * reps / total measured wall time
  double total_wall_s = 0;
  std::size_t image_errors = 0;  // per pass, worst pass
  /// Post-processed detections of the first measured pass, one entry per corpus item.
  std::vector<std::vector<BoundingBox>> detections;
  bool detections_stable = true;  // identical across reps
  /// Raw per-image timings of every measured pass ([rep][item][stage]).
  std::vector<std::vector<std::array<StageTiming, 7>>> timings;
};

/// Streams one warm-up pass plus `reps` measured passes over the corpus through
/// the staged pipeline read -> decode -> transform -> encode -> transfer_model
/// -> detect -> post, with stages connected by bounded queues. A measured pass
/// spans from the last completion of the previous pass to its own last
/// completion, so the warm-up also absorbs pipeline fill.
BenchReport run_bench(const Corpus& corpus, const PipelineConfig& cfg,
                      const DetectorContract& detector, const BenchOptions& options = {});

/// Relative change rendered like a results-table cell: "+12 %", "-7 %", "0 %".
std::string format_delta(double before, double after);

struct DeltaRow {
  std::string metric;
  double before = 0;
  double after = 0;
  double delta_percent = 0;
  std::string formatted;
};

/// Per-stage mean latency and end-to-end FPS deltas from `a` to `b`. Both
/// reports must come from the same corpus and detector.
std::vector<DeltaRow> compare_reports(const BenchReport& a, const BenchReport& b);

std::string bench_report_to_json(const BenchReport& report);
BenchReport bench_report_from_json(const std::string& json);

}  // namespace acqbench
