// acqbench command-line front end.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 partial sweep failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "acqbench/annotations_io.hpp"
#include "acqbench/bench.hpp"
#include "acqbench/codec.hpp"
#include "acqbench/corpus.hpp"
#include "acqbench/error.hpp"
#include "acqbench/eval.hpp"
#include "acqbench/pipeline_config.hpp"
#include "acqbench/sweep.hpp"
#include "acqbench/transforms.hpp"

namespace fs = std::filesystem;
using namespace acqbench;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitPartial = 3;

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_or_print(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot create " + out);
  f << text;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

int cmd_transform(const std::string& config_path, const fs::path& in, const fs::path& out) {
  const PipelineConfig cfg = load_pipeline_config(config_path);
  const Corpus corpus = scan_corpus(in);
  if (corpus.items.empty()) throw DataError("no images in " + in.string());
  fs::create_directories(out);
  std::uint64_t bytes_in = 0;
  std::uint64_t bytes_out = 0;
  for (const auto& item : corpus.items) {
    const ImageBuffer img = apply_config(load_corpus_item(item), cfg);
    const EncodedBlob blob = encode_for_config(img, cfg);
    write_file(out / (item.stem + std::string(file_extension(blob.format))), blob.bytes);
    bytes_in += item.bytes_on_disk();
    bytes_out += blob.bytes.size();
  }
  std::cout << config_id(cfg) << ": " << corpus.items.size() << " images, " << bytes_in << " -> "
            << bytes_out << " bytes\n";
  return 0;
}

int cmd_eval(const fs::path& gt_path, const fs::path& det_path, bool per_class, double iou_thr) {
  const AnnotationSet gt = load_annotations(gt_path);
  const DetectionSet det = load_detections(det_path, gt);
  EvalOptions opts;
  opts.iou_threshold = iou_thr;
  std::cout << eval_result_to_json(evaluate(gt, det, opts), gt, per_class);
  return 0;
}

void print_bench(const BenchReport& r) {
  std::cout << "config " << r.config_id << ", " << r.corpus_size << " images, detector " << r.detector
            << ", " << r.reps << " reps\n";
  std::cout << "stage            mean ms    p50 ms    p95 ms   bytes in/pass  bytes out/pass\n";
  for (const auto& s : r.stages) {
    char line[160];
    std::snprintf(line, sizeof line, "%-14s %9.3f %9.3f %9.3f %15llu %15llu\n",
                  std::string(to_string(s.stage)).c_str(), s.mean_ms, s.p50_ms, s.p95_ms,
                  static_cast<unsigned long long>(s.bytes_in),
                  static_cast<unsigned long long>(s.bytes_out));
    std::cout << line;
  }
  std::cout << "fps median " << fixed(r.fps_median, 2) << ", mean " << fixed(r.fps_mean, 2)
            << ", image errors " << r.image_errors
            << (r.detections_stable ? "" : ", detections differ across reps") << "\n";
}

int cmd_bench(const std::string& config_path, const std::string& preset_name, bool gray,
              const fs::path& corpus_dir, const std::string& detector, const BenchOptions& opts,
              const std::string& json_out) {
  PipelineConfig cfg;
  if (!config_path.empty() && !preset_name.empty()) {
    throw InvalidArgument("--config and --preset are mutually exclusive");
  }
  if (!config_path.empty()) {
    cfg = load_pipeline_config(config_path);
  } else if (!preset_name.empty()) {
    const auto configs = preset(preset_name, gray).expand();
    cfg = configs.front();
  }
  const Corpus corpus = scan_corpus(corpus_dir);
  const BenchReport report = run_bench(corpus, cfg, DetectorContract::parse(detector), opts);
  print_bench(report);
  if (!json_out.empty()) write_or_print(bench_report_to_json(report), json_out);
  return 0;
}

int cmd_compare(const fs::path& before, const fs::path& after) {
  const auto rows = compare_reports(bench_report_from_json(slurp(before)),
                                    bench_report_from_json(slurp(after)));
  std::cout << "metric               before       after   delta\n";
  for (const auto& r : rows) {
    char line[160];
    std::snprintf(line, sizeof line, "%-16s %11.3f %11.3f   (%s)\n", r.metric.c_str(), r.before,
                  r.after, r.formatted.c_str());
    std::cout << line;
  }
  return 0;
}

int cmd_sweep(const fs::path& spec_path, const std::string& out, bool resume,
              std::optional<std::size_t> cap, std::optional<std::size_t> limit,
              std::optional<int> workers) {
  SweepSpec spec = load_sweep_spec(spec_path);
  if (!out.empty()) spec.output = out;
  if (cap) spec.cap = *cap;
  if (workers) spec.workers = *workers;
  SweepOptions opts;
  opts.resume = resume;
  opts.limit = limit;
  const SweepResult result = run_sweep(spec, opts);
  std::cout << result.rows.size() << " configurations complete (" << result.skipped
            << " reused), " << result.failures.size() << " failed, " << result.pending
            << " pending\n";
  for (const auto& f : result.failures) std::cerr << "failed " << f.config_id << ": " << f.message << "\n";
  if (!result.rows.empty()) std::cout << "report: " << result.csv_path.string() << "\n";
  if (!result.failures.empty()) return kExitPartial;
  return 0;
}

int cmd_report(const fs::path& rows_path, const std::string& kind, const std::string& x,
               const std::string& y, const std::string& out) {
  const auto rows = read_report_csv(rows_path);
  const ReportKind k = parse_report_kind(kind);
  std::string text;
  if (k == ReportKind::Svg && (!x.empty() || !y.empty())) {
    text = emit_scatter(rows, x.empty() ? "variant_bytes" : x, y.empty() ? "map50" : y);
  } else {
    text = emit_report(rows, k);
  }
  write_or_print(text, out);
  return 0;
}

int cmd_distort(double k1, bool invert, const fs::path& in, const fs::path& out) {
  const DistortionParams params{k1};
  params.validate();
  const Corpus corpus = scan_corpus(in);
  if (corpus.items.empty()) throw DataError("no images in " + in.string());
  fs::create_directories(out);
  std::uint64_t failures = 0;
  std::uint64_t outside = 0;
  for (const auto& item : corpus.items) {
    const ImageBuffer img = load_corpus_item(item);
    ImageBuffer result;
    if (invert) {
      result = undistort(img, params);
    } else {
      auto d = distort(img, params);
      failures += d.newton_failures;
      outside += d.out_of_bounds;
      result = std::move(d.image);
    }
    const EncodedBlob blob = result.channels() == 5 ? encode_qraw(result) : encode_png(result);
    write_file(out / (item.stem + std::string(file_extension(blob.format))), blob.bytes);
  }
  std::cout << corpus.items.size() << " images " << (invert ? "undistorted" : "distorted")
            << " with k1 = " << format_number(k1);
  if (!invert) std::cout << ", newton failures " << failures << ", pixels without source " << outside;
  std::cout << "\n";
  return failures == 0 ? 0 : kExitData;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Image-acquisition parameter benchmark for object-detection pipelines"};
  app.require_subcommand(1);

  auto* transform = app.add_subcommand("transform", "Apply one configuration to a directory of images");
  std::string t_config;
  std::string t_in, t_out;
  transform->add_option("--config", t_config, "Pipeline config file")->required();
  transform->add_option("--in", t_in, "Input image directory")->required();
  transform->add_option("--out", t_out, "Output directory")->required();

  auto* eval = app.add_subcommand("eval", "Score detections against ground truth (mAP@0.5)");
  std::string e_gt, e_det;
  bool e_per_class = false;
  double e_iou = 0.5;
  eval->add_option("--gt", e_gt, "Ground-truth annotations JSON")->required();
  eval->add_option("--det", e_det, "Detections JSON")->required();
  eval->add_flag("--per-class", e_per_class, "Include per-class AP and counts");
  eval->add_option("--iou", e_iou, "IoU threshold")->check(CLI::Range(0.0, 1.0));

  auto* bench = app.add_subcommand("bench", "Time the staged pipeline for one configuration");
  std::string b_config, b_preset, b_corpus, b_detector = "stub:small", b_json;
  bool b_gray = false;
  BenchOptions b_opts;
  bench->add_option("--config", b_config, "Pipeline config file");
  bench->add_option("--preset", b_preset, "baseline or optimized");
  bench->add_flag("--gray", b_gray, "Gray variant of the optimized preset");
  bench->add_option("--corpus", b_corpus, "Corpus directory")->required();
  bench->add_option("--detector", b_detector, "stub:small|stub:large|stub:a=..,b=..,c=..|cmd:<command>");
  bench->add_option("--reps", b_opts.reps, "Measured passes")->check(CLI::Range(3, 1000));
  bench->add_option("--queue-capacity", b_opts.queue_capacity, "Hand-off queue capacity")
      ->check(CLI::Range(1, 4096));
  bench->add_option("--workers", b_opts.workers_per_stage, "Workers per stage")->check(CLI::Range(1, 64));
  bench->add_option("--work-dir", b_opts.work_dir, "Scratch directory for encoded payloads");
  bench->add_option("--json", b_json, "Write the report as JSON to this file");

  auto* compare = app.add_subcommand("compare", "Delta table between two bench JSON reports");
  std::string c_before, c_after;
  compare->add_option("before", c_before, "Reference report")->required();
  compare->add_option("after", c_after, "Compared report")->required();

  auto* sweep = app.add_subcommand("sweep", "Run a parameter grid");
  std::string s_spec, s_out;
  bool s_resume = false;
  std::optional<std::size_t> s_cap, s_limit;
  std::optional<int> s_workers;
  sweep->add_option("--spec", s_spec, "Sweep spec file")->required();
  sweep->add_option("--out", s_out, "Output directory (overrides the spec)");
  sweep->add_flag("--resume", s_resume, "Keep configurations that already have a row");
  sweep->add_option("--cap", s_cap, "Largest accepted grid");
  sweep->add_option("--limit", s_limit, "Stop after this many configurations");
  sweep->add_option("--workers", s_workers, "Concurrent configurations");

  auto* report = app.add_subcommand("report", "Render a sweep CSV as csv, markdown or svg");
  std::string r_rows, r_kind = "markdown", r_x, r_y, r_out;
  report->add_option("--rows", r_rows, "Sweep CSV")->required();
  report->add_option("--kind", r_kind, "csv, markdown or svg");
  report->add_option("--x", r_x, "SVG x column (variant_bytes, mean_bytes, reduction, map50, fps)");
  report->add_option("--y", r_y, "SVG y column");
  report->add_option("--out", r_out, "Output file (default stdout)");

  auto* distort_cmd = app.add_subcommand("distort", "Apply or remove radial lens distortion");
  double d_k1 = 0;
  bool d_invert = false;
  std::string d_in, d_out;
  distort_cmd->add_option("--k1", d_k1, "Radial coefficient, |k1| <= 0.5")->required();
  distort_cmd->add_flag("--invert", d_invert, "Undistort instead of distort");
  distort_cmd->add_option("--in", d_in, "Input image directory")->required();
  distort_cmd->add_option("--out", d_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*transform) return cmd_transform(t_config, t_in, t_out);
    if (*eval) return cmd_eval(e_gt, e_det, e_per_class, e_iou);
    if (*bench) return cmd_bench(b_config, b_preset, b_gray, b_corpus, b_detector, b_opts, b_json);
    if (*compare) return cmd_compare(c_before, c_after);
    if (*sweep) return cmd_sweep(s_spec, s_out, s_resume, s_cap, s_limit, s_workers);
    if (*report) return cmd_report(r_rows, r_kind, r_x, r_y, r_out);
    if (*distort_cmd) return cmd_distort(d_k1, d_invert, d_in, d_out);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
