#include "acqbench/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <memory>
#include <thread>

#include <unistd.h>

#include <json.hpp>

#include "acqbench/annotations_io.hpp"
#include "acqbench/bounded_queue.hpp"
#include "acqbench/codec.hpp"
#include "acqbench/error.hpp"
#include "acqbench/process.hpp"
#include "acqbench/transforms.hpp"

namespace acqbench {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::Read: return "read";
    case Stage::Decode: return "decode";
    case Stage::Transform: return "transform";
    case Stage::Encode: return "encode";
    case Stage::TransferModel: return "transfer_model";
    case Stage::Detect: return "detect";
    case Stage::Post: return "post";
  }
  return "?";
}

namespace {

Stage parse_stage(std::string_view s) {
  for (Stage st : kStages) {
    if (to_string(st) == s) return st;
  }
  throw SchemaError("unknown stage \"" + std::string(s) + "\"");
}

double parse_double(std::string_view s, std::string_view what) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v) || v < 0) {
    throw InvalidArgument("bad " + std::string(what) + " value \"" + std::string(s) + "\"");
  }
  return v;
}

}  // namespace

std::chrono::nanoseconds StubLatencyModel::latency(std::uint64_t pixels,
                                                   std::uint64_t payload_bytes) const {
  const double ns = fixed_ms * 1e6 + ns_per_pixel * static_cast<double>(pixels) +
                    ns_per_byte * static_cast<double>(payload_bytes);
  return std::chrono::nanoseconds(static_cast<std::int64_t>(std::llround(ns)));
}

DetectorContract DetectorContract::small_model_stub() {
  DetectorContract d;
  d.stub = {1.0, 0.0, 40.0};
  return d;
}

DetectorContract DetectorContract::large_model_stub() {
  DetectorContract d;
  d.stub = {250.0, 0.0, 0.05};
  return d;
}

DetectorContract DetectorContract::parse(std::string_view spec) {
  if (spec == "stub:small") return small_model_stub();
  if (spec == "stub:large") return large_model_stub();
  if (spec.starts_with("cmd:")) {
    DetectorContract d;
    d.kind = Kind::External;
    d.command = std::string(spec.substr(4));
    if (d.command.empty()) throw InvalidArgument("empty detector command");
    return d;
  }
  if (spec.starts_with("stub:")) {
    DetectorContract d;
    d.stub = {};
    std::string_view rest = spec.substr(5);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view part = rest.substr(0, comma);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      const auto eq = part.find('=');
      if (eq == std::string_view::npos) throw InvalidArgument("bad stub parameter \"" + std::string(part) + "\"");
      const std::string_view key = part.substr(0, eq);
      const double v = parse_double(part.substr(eq + 1), key);
      if (key == "a") {
        d.stub.fixed_ms = v;
      } else if (key == "b") {
        d.stub.ns_per_pixel = v;
      } else if (key == "c") {
        d.stub.ns_per_byte = v;
      } else {
        throw InvalidArgument("unknown stub parameter \"" + std::string(key) + "\"");
      }
    }
    return d;
  }
  throw InvalidArgument("detector must be stub:small, stub:large, stub:a=..,b=..,c=.. or cmd:<command>");
}

std::string DetectorContract::descriptor() const {
  if (kind == Kind::External) return "cmd:" + command;
  return "stub:a=" + format_number(stub.fixed_ms) + ",b=" + format_number(stub.ns_per_pixel) +
         ",c=" + format_number(stub.ns_per_byte);
}

std::vector<BoundingBox> invoke_detector(const DetectorContract& detector,
                                         const DetectorRequest& request,
                                         const fs::path& meta_path, std::uint64_t* output_bytes) {
  if (detector.kind != DetectorContract::Kind::External) {
    throw InvalidArgument("stub detectors produce no detections");
  }
  const json meta = {{"image_id", request.image_id},   {"stem", request.stem},
                     {"width", request.width},         {"height", request.height},
                     {"channels", request.channels},   {"bit_depth", request.bit_depth},
                     {"color_model", request.color_model}, {"format", request.format},
                     {"config_id", request.config_id}};
  const std::string text = meta.dump();
  write_file(meta_path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  const ProcessResult r = run_command(
      detector.command, {"--image", request.image.string(), "--meta", meta_path.string()},
      detector.timeout);
  if (r.timed_out) throw DataError("detector timed out");
  if (r.exit_code != 0) throw DataError("detector exited with status " + std::to_string(r.exit_code));
  std::vector<BoundingBox> boxes;
  try {
    for (const auto& ib : parse_detection_list(r.standard_output, request.image_id)) {
      boxes.push_back(ib.box);
    }
  } catch (const SchemaError& e) {
    throw DataError(std::string("detector output: ") + e.what());
  }
  if (output_bytes != nullptr) *output_bytes = r.standard_output.size();
  return boxes;
}

namespace {

struct Job {
  int pass = 0;
  std::size_t index = 0;
  std::vector<std::vector<std::uint8_t>> files;
  ImageBuffer image;
  EncodedBlob blob;
  fs::path payload_path;
  ImageBuffer model_input;
  std::vector<BoundingBox> detections;
  std::array<StageTiming, 7> timing{};
  std::string error;
};

using JobPtr = std::unique_ptr<Job>;

struct PassResult {
  std::vector<JobPtr> jobs;
  std::chrono::steady_clock::time_point end;  // last completion of this pass
  std::size_t errors = 0;
};

class ScratchDir {
 public:
  explicit ScratchDir(fs::path requested) {
    if (!requested.empty()) {
      path_ = std::move(requested);
    } else {
      static std::atomic<int> counter{0};
      path_ = fs::temp_directory_path() /
              ("acqbench-bench-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
      owned_ = true;
    }
    std::error_code ec;
    fs::create_directories(path_, ec);
    if (ec) throw DataError("cannot create work directory " + path_.string());
  }
  ~ScratchDir() {
    if (owned_) {
      std::error_code ec;
      fs::remove_all(path_, ec);
    }
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
  bool owned_ = false;
};

class Pipeline {
 public:
  Pipeline(const Corpus& corpus, const PipelineConfig& cfg, const DetectorContract& detector,
           const BenchOptions& options, const fs::path& work_dir)
      : corpus_(corpus), cfg_(cfg), detector_(detector), options_(options), work_dir_(work_dir) {}

  // Streams `passes` consecutive passes over the corpus through the stages so
  // that later passes see a filled pipeline.
  std::vector<PassResult> run(int passes) {
    const std::size_t n_stages = kStages.size();
    const std::size_t n = corpus_.items.size();
    std::vector<std::unique_ptr<BoundedQueue<JobPtr>>> queues;
    for (std::size_t i = 0; i <= n_stages; ++i) {
      queues.push_back(std::make_unique<BoundedQueue<JobPtr>>(options_.queue_capacity));
    }
    const int workers = std::max(1, options_.workers_per_stage);
    std::vector<std::unique_ptr<std::atomic<int>>> remaining;
    for (std::size_t i = 0; i < n_stages; ++i) {
      remaining.push_back(std::make_unique<std::atomic<int>>(workers));
    }

    std::vector<PassResult> results(static_cast<std::size_t>(passes));
    for (auto& r : results) r.jobs.resize(n);

    std::vector<std::thread> threads;
    threads.emplace_back([&] {
      for (int p = 0; p < passes; ++p) {
        for (std::size_t i = 0; i < n; ++i) {
          auto job = std::make_unique<Job>();
          job->pass = p;
          job->index = i;
          if (!queues[0]->push(std::move(job))) break;
        }
      }
      queues[0]->close();
    });
    for (std::size_t s = 0; s < n_stages; ++s) {
      for (int w = 0; w < workers; ++w) {
        threads.emplace_back([&, s] {
          while (auto job = queues[s]->pop()) {
            Job& j = **job;
            StageTiming& t = j.timing[s];
            t.stage = kStages[s];
            if (j.error.empty()) {
              const auto t0 = std::chrono::steady_clock::now();
              try {
                run_stage(kStages[s], j);
              } catch (const std::exception& e) {
                j.error = std::string(to_string(kStages[s])) + ": " + e.what();
              }
              t.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
            }
            queues[s + 1]->push(std::move(*job));
          }
          if (remaining[s]->fetch_sub(1) == 1) queues[s + 1]->close();
        });
      }
    }
    while (auto job = queues[n_stages]->pop()) {
      const auto now = std::chrono::steady_clock::now();
      PassResult& r = results[static_cast<std::size_t>((*job)->pass)];
      if (!(*job)->error.empty()) ++r.errors;
      r.end = std::max(r.end, now);
      r.jobs[(*job)->index] = std::move(*job);
    }
    for (auto& t : threads) t.join();
    return results;
  }

 private:
  void run_stage(Stage stage, Job& j) {
    const CorpusItem& item = corpus_.items[j.index];
    StageTiming& t = j.timing[static_cast<std::size_t>(stage)];
    switch (stage) {
      case Stage::Read: {
        j.files.clear();
        for (const auto& f : item.files) {
          j.files.push_back(read_file(f));
          t.bytes_out += j.files.back().size();
        }
        t.bytes_in = t.bytes_out;
        break;
      }
      case Stage::Decode: {
        for (const auto& f : j.files) t.bytes_in += f.size();
        j.image = decode_corpus_item(item, j.files);
        j.files.clear();
        t.bytes_out = j.image.samples().size();
        break;
      }
      case Stage::Transform: {
        t.bytes_in = j.image.samples().size();
        j.image = apply_config(j.image, cfg_);
        t.bytes_out = j.image.samples().size();
        break;
      }
      case Stage::Encode: {
        t.bytes_in = j.image.samples().size();
        j.blob = encode_for_config(j.image, cfg_);
        j.payload_path = work_dir_ / (item.stem + "." + std::to_string(j.pass) +
                                     std::string(file_extension(j.blob.format)));
        write_file(j.payload_path, j.blob.bytes);
        t.bytes_out = j.blob.bytes.size();
        break;
      }
      case Stage::TransferModel: {
        const auto bytes = read_file(j.payload_path);
        t.bytes_in = bytes.size();
        j.model_input = decode_image(bytes, j.image.color_model());
        t.bytes_out = j.model_input.samples().size();
        break;
      }
      case Stage::Detect: {
        t.bytes_in = j.blob.bytes.size();
        if (detector_.kind == DetectorContract::Kind::Stub) {
          const auto begin = std::chrono::steady_clock::now();
          const auto pixels = static_cast<std::uint64_t>(j.model_input.pixel_count());
          std::this_thread::sleep_until(begin + detector_.stub.latency(pixels, j.blob.bytes.size()));
          j.detections.clear();
        } else {
          t.bytes_out = run_external(item, j);
        }
        break;
      }
      case Stage::Post: {
        std::stable_sort(j.detections.begin(), j.detections.end(),
                         [](const BoundingBox& a, const BoundingBox& b) {
                           return a.score.value_or(0.0) > b.score.value_or(0.0);
                         });
        t.bytes_in = j.detections.size() * sizeof(BoundingBox);
        t.bytes_out = t.bytes_in;
        std::error_code ec;
        fs::remove(j.payload_path, ec);
        break;
      }
    }
  }

  std::uint64_t run_external(const CorpusItem& item, Job& j) {
    DetectorRequest req;
    req.image = j.payload_path;
    req.image_id = static_cast<std::int64_t>(j.index) + 1;
    if (auto it = options_.image_ids.find(item.stem); it != options_.image_ids.end()) {
      req.image_id = it->second;
    }
    req.stem = item.stem;
    req.width = j.model_input.width();
    req.height = j.model_input.height();
    req.channels = j.model_input.channels();
    req.bit_depth = j.model_input.bit_depth();
    req.color_model = std::string(to_string(j.model_input.color_model()));
    req.format = std::string(to_string(j.blob.format));
    req.config_id = config_id(cfg_);
    std::uint64_t bytes = 0;
    j.detections = invoke_detector(detector_, req, work_dir_ / (item.stem + "." + std::to_string(j.pass) + ".meta.json"), &bytes);
    return bytes;
  }

  const Corpus& corpus_;
  const PipelineConfig& cfg_;
  const DetectorContract& detector_;
  const BenchOptions& options_;
  fs::path work_dir_;
};

double percentile(std::vector<double> v, double p) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  // Nearest-rank.
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(v.size())));
  return v[std::clamp<std::size_t>(rank, 1, v.size()) - 1];
}

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

bool same_boxes(const std::vector<BoundingBox>& a, const std::vector<BoundingBox>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].x != b[i].x || a[i].y != b[i].y || a[i].w != b[i].w || a[i].h != b[i].h ||
        a[i].category_id != b[i].category_id || a[i].score != b[i].score) {
      return false;
    }
  }
  return true;
}

}  // namespace

BenchReport run_bench(const Corpus& corpus, const PipelineConfig& cfg,
                      const DetectorContract& detector, const BenchOptions& options) {
  cfg.validate();
  if (options.reps < 1) throw InvalidArgument("reps must be at least 1");
  if (options.workers_per_stage < 1) throw InvalidArgument("workers per stage must be at least 1");
  if (corpus.items.empty()) throw DataError("corpus is empty");

  ScratchDir scratch(options.work_dir);
  Pipeline pipeline(corpus, cfg, detector, options, scratch.path());
  const std::size_t n = corpus.items.size();
  const auto limit = static_cast<std::size_t>(std::floor(options.max_error_fraction * static_cast<double>(n)));

  auto check_errors = [&](const PassResult& pass) {
    if (pass.errors > limit) {
      std::string first;
      for (const auto& j : pass.jobs) {
        if (j && !j->error.empty()) {
          first = corpus.items[j->index].stem + ": " + j->error;
          break;
        }
      }
      throw DataError("benchmark aborted: " + std::to_string(pass.errors) + " of " +
                      std::to_string(n) + " images failed (" + first + ")");
    }
  };

  // Pass 0 is the warm-up; it also fills the pipeline.
  std::vector<PassResult> passes = pipeline.run(options.reps + 1);
  for (const auto& pass : passes) check_errors(pass);

  BenchReport report;
  report.config_id = config_id(cfg);
  report.corpus_fingerprint = corpus.fingerprint();
  report.corpus_size = n;
  report.detector = detector.descriptor();
  report.reps = options.reps;

  std::array<std::vector<double>, 7> stage_ms;
  for (int rep = 0; rep < options.reps; ++rep) {
    PassResult& pass = passes[static_cast<std::size_t>(rep) + 1];
    const double wall_s =
        std::chrono::duration<double>(pass.end - passes[static_cast<std::size_t>(rep)].end).count();
    report.image_errors = std::max(report.image_errors, pass.errors);
    report.total_wall_s += wall_s;
    report.fps_per_rep.push_back(static_cast<double>(n) / wall_s);

    std::vector<std::array<StageTiming, 7>> timings;
    std::vector<std::vector<BoundingBox>> detections;
    for (const auto& j : pass.jobs) {
      timings.push_back(j->timing);
      detections.push_back(j->detections);
      if (!j->error.empty()) continue;
      for (std::size_t s = 0; s < kStages.size(); ++s) {
        stage_ms[s].push_back(static_cast<double>(j->timing[s].wall_ns) / 1e6);
      }
    }
    if (rep == 0) {
      report.stages.clear();
      for (std::size_t s = 0; s < kStages.size(); ++s) {
        StageSummary sum;
        sum.stage = kStages[s];
        for (const auto& t : timings) {
          sum.bytes_in += t[s].bytes_in;
          sum.bytes_out += t[s].bytes_out;
        }
        report.stages.push_back(sum);
      }
      report.detections = std::move(detections);
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        if (!same_boxes(detections[i], report.detections[i])) report.detections_stable = false;
      }
    }
    report.timings.push_back(std::move(timings));
  }

  for (std::size_t s = 0; s < kStages.size(); ++s) {
    const auto& v = stage_ms[s];
    double total = 0;
    for (double x : v) total += x;
    report.stages[s].mean_ms = v.empty() ? 0 : total / static_cast<double>(v.size());
    report.stages[s].p50_ms = percentile(v, 50);
    report.stages[s].p95_ms = percentile(v, 95);
  }
  report.fps_median = median(report.fps_per_rep);
  report.fps_mean = static_cast<double>(n) * options.reps / report.total_wall_s;
  return report;
}

std::string format_delta(double before, double after) {
  if (before == 0.0) return after == 0.0 ? "0 %" : "n/a";
  const long r = std::lround((after - before) / before * 100.0);
  if (r == 0) return "0 %";
  return (r > 0 ? "+" : "") + std::to_string(r) + " %";
}

std::vector<DeltaRow> compare_reports(const BenchReport& a, const BenchReport& b) {
  if (a.corpus_fingerprint != b.corpus_fingerprint) {
    throw InvalidArgument("reports were produced on different corpora");
  }
  if (a.detector != b.detector) {
    throw InvalidArgument("reports use different detectors (" + a.detector + " vs " + b.detector + ")");
  }
  auto row = [](std::string metric, double before, double after) {
    DeltaRow r;
    r.metric = std::move(metric);
    r.before = before;
    r.after = after;
    r.delta_percent = before == 0.0 ? 0.0 : (after - before) / before * 100.0;
    r.formatted = format_delta(before, after);
    return r;
  };
  std::vector<DeltaRow> rows;
  rows.push_back(row("fps", a.fps_median, b.fps_median));
  for (Stage st : kStages) {
    auto find = [&](const BenchReport& r) -> double {
      for (const auto& s : r.stages) {
        if (s.stage == st) return s.mean_ms;
      }
      return 0.0;
    };
    rows.push_back(row(std::string(to_string(st)) + "_ms", find(a), find(b)));
  }
  return rows;
}

std::string bench_report_to_json(const BenchReport& report) {
  json stages = json::array();
  for (const auto& s : report.stages) {
    stages.push_back({{"stage", std::string(to_string(s.stage))},
                      {"mean_ms", s.mean_ms},
                      {"p50_ms", s.p50_ms},
                      {"p95_ms", s.p95_ms},
                      {"bytes_in", s.bytes_in},
                      {"bytes_out", s.bytes_out}});
  }
  std::size_t n_det = 0;
  for (const auto& d : report.detections) n_det += d.size();
  const json doc = {{"config_id", report.config_id},
                    {"corpus_fingerprint", report.corpus_fingerprint},
                    {"corpus_size", report.corpus_size},
                    {"detector", report.detector},
                    {"reps", report.reps},
                    {"stages", stages},
                    {"fps_per_rep", report.fps_per_rep},
                    {"fps_median", report.fps_median},
                    {"fps_mean", report.fps_mean},
                    {"total_wall_s", report.total_wall_s},
                    {"image_errors", report.image_errors},
                    {"detection_count", n_det},
                    {"detections_stable", report.detections_stable}};
  return doc.dump(2) + "\n";
}

BenchReport bench_report_from_json(const std::string& text) {
  BenchReport r;
  try {
    const json doc = json::parse(text);
    r.config_id = doc.at("config_id").get<std::string>();
    r.corpus_fingerprint = doc.at("corpus_fingerprint").get<std::string>();
    r.corpus_size = doc.at("corpus_size").get<std::size_t>();
    r.detector = doc.at("detector").get<std::string>();
    r.reps = doc.at("reps").get<int>();
    for (const auto& s : doc.at("stages")) {
      StageSummary sum;
      sum.stage = parse_stage(s.at("stage").get<std::string>());
      sum.mean_ms = s.at("mean_ms").get<double>();
      sum.p50_ms = s.at("p50_ms").get<double>();
      sum.p95_ms = s.at("p95_ms").get<double>();
      sum.bytes_in = s.at("bytes_in").get<std::uint64_t>();
      sum.bytes_out = s.at("bytes_out").get<std::uint64_t>();
      r.stages.push_back(sum);
    }
    r.fps_per_rep = doc.at("fps_per_rep").get<std::vector<double>>();
    r.fps_median = doc.at("fps_median").get<double>();
    r.fps_mean = doc.at("fps_mean").get<double>();
    r.total_wall_s = doc.at("total_wall_s").get<double>();
    r.image_errors = doc.at("image_errors").get<std::size_t>();
    r.detections_stable = doc.value("detections_stable", true);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed bench report: ") + e.what());
  }
  return r;
}

}  // namespace acqbench
