#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "acqbench/bench.hpp"
#include "acqbench/bounded_queue.hpp"
#include "acqbench/codec.hpp"
#include "acqbench/error.hpp"
#include "acqbench/transforms.hpp"
#include "support.hpp"

using namespace acqbench;
using namespace testing_support;
namespace fs = std::filesystem;

namespace {

// Small corpus copied from the bundled images.
Corpus mini_corpus(const TempDir& dir, std::initializer_list<const char*> names) {
  for (const char* n : names) fs::copy_file(corpus_dir() / n, dir.path() / n);
  return scan_corpus(dir.path());
}

std::size_t stage_index(Stage s) {
  return static_cast<std::size_t>(std::find(kStages.begin(), kStages.end(), s) - kStages.begin());
}

}  // namespace

TEST(DetectorContract, ParseForms) {
  const auto small = DetectorContract::parse("stub:small");
  EXPECT_EQ(small.kind, DetectorContract::Kind::Stub);
  EXPECT_EQ(small.descriptor(), DetectorContract::small_model_stub().descriptor());
  const auto custom = DetectorContract::parse("stub:a=2.5,b=1,c=0");
  EXPECT_EQ(custom.stub.fixed_ms, 2.5);
  EXPECT_EQ(custom.stub.ns_per_pixel, 1.0);
  EXPECT_EQ(DetectorContract::parse(custom.descriptor()).descriptor(), custom.descriptor());
  const auto cmd = DetectorContract::parse("cmd:/usr/bin/det --fast");
  EXPECT_EQ(cmd.kind, DetectorContract::Kind::External);
  EXPECT_EQ(cmd.command, "/usr/bin/det --fast");
  EXPECT_THROW(DetectorContract::parse("stub:medium"), InvalidArgument);
  EXPECT_THROW(DetectorContract::parse("stub:a=1,z=2"), InvalidArgument);
  EXPECT_THROW(DetectorContract::parse("cmd:"), InvalidArgument);
  EXPECT_THROW(DetectorContract::parse("yolo"), InvalidArgument);
}

TEST(StubLatency, Formula) {
  const StubLatencyModel m{2.0, 3.0, 0.5};
  EXPECT_EQ(m.latency(1000, 4000).count(), 2'000'000 + 3'000 + 2'000);
}

TEST(FormatDelta, TableCells) {
  EXPECT_EQ(format_delta(25, 28), "+12 %");
  EXPECT_EQ(format_delta(14, 16), "+14 %");
  EXPECT_EQ(format_delta(100, 93), "-7 %");
  EXPECT_EQ(format_delta(50, 50), "0 %");
  EXPECT_EQ(format_delta(0, 5), "n/a");
}

TEST(BoundedQueue, FifoAndClose) {
  BoundedQueue<int> q(2);
  EXPECT_TRUE(q.push(1));
  EXPECT_TRUE(q.push(2));
  q.close();
  EXPECT_FALSE(q.push(3));
  EXPECT_EQ(q.pop(), 1);
  EXPECT_EQ(q.pop(), 2);
  EXPECT_FALSE(q.pop());
}

TEST(Bench, StubLatencyHonoured) {
  TempDir t;
  const auto corpus = mini_corpus(t, {"photo_coffee.png", "photo_rocket.png", "photo_chelsea.png"});
  TempDir work;
  BenchOptions opt;
  opt.work_dir = work.path();
  const auto r = run_bench(corpus, PipelineConfig{}, DetectorContract::parse("stub:a=40,b=0,c=0"), opt);
  const auto& det = r.stages[stage_index(Stage::Detect)];
  EXPECT_NEAR(det.mean_ms, 40.0, 2.0);
  EXPECT_EQ(r.fps_per_rep.size(), 3u);
  EXPECT_EQ(r.reps, 3);
  EXPECT_EQ(r.image_errors, 0u);
  EXPECT_EQ(r.timings.size(), 3u);
  EXPECT_EQ(r.timings[0].size(), 3u);
  // Scratch payloads are cleaned up by the post stage.
  EXPECT_EQ(std::distance(fs::directory_iterator(work.path()), fs::directory_iterator{}), 0);
}

TEST(Bench, ByteAccountingAndWallTime) {
  TempDir t;
  const auto corpus = mini_corpus(t, {"photo_coffee.png", "photo_rocket.png", "photo_astronaut.png"});
  PipelineConfig cfg;
  cfg.quant_bits = 4;
  cfg.color_model = ColorModel::Gray;
  const auto r = run_bench(corpus, cfg, DetectorContract::small_model_stub());

  std::uint64_t files = 0, encoded = 0, samples = 0;
  for (const auto& item : corpus.items) {
    files += item.bytes_on_disk();
    const auto out = apply_config(load_corpus_item(item), cfg);
    samples += out.samples().size();
    encoded += encode_for_config(out, cfg).bytes.size();
  }
  EXPECT_EQ(r.stages[stage_index(Stage::Read)].bytes_in, files);
  EXPECT_EQ(r.stages[stage_index(Stage::Transform)].bytes_out, samples);
  EXPECT_EQ(r.stages[stage_index(Stage::Encode)].bytes_out, encoded);
  EXPECT_EQ(r.stages[stage_index(Stage::TransferModel)].bytes_in, encoded);

  // Pipelined passes cannot beat the slowest stage.
  double bottleneck = 0;
  for (const auto& s : r.stages) bottleneck = std::max(bottleneck, s.mean_ms);
  EXPECT_GE(r.total_wall_s * 1e3, bottleneck * 3 * r.reps * 0.9);
  EXPECT_GT(r.fps_median, 0);
  EXPECT_NEAR(r.fps_mean, 3.0 * r.reps / r.total_wall_s, 1e-9);
  for (const auto& s : r.stages) EXPECT_LE(s.p50_ms, s.p95_ms);
}

TEST(Bench, ToyDetectorOutputsStableAcrossWorkers) {
  TempDir t;
  const auto corpus = mini_corpus(t, {"aerial_00.png", "aerial_01.png", "aerial_02.png"});
  const auto det = DetectorContract::parse("cmd:" + toy_detector());
  BenchOptions one;
  BenchOptions two;
  two.workers_per_stage = 2;
  two.queue_capacity = 1;
  const auto a = run_bench(corpus, PipelineConfig{}, det, one);
  const auto b = run_bench(corpus, PipelineConfig{}, det, two);
  EXPECT_TRUE(a.detections_stable);
  EXPECT_TRUE(b.detections_stable);
  ASSERT_EQ(a.detections.size(), 3u);
  EXPECT_EQ(a.detections, b.detections);
  std::size_t total = 0;
  for (const auto& d : a.detections) {
    total += d.size();
    EXPECT_TRUE(std::is_sorted(d.begin(), d.end(),
                               [](const auto& x, const auto& y) { return *x.score > *y.score; }));
  }
  EXPECT_GT(total, 0u);
}

TEST(Bench, FailingDetectorAborts) {
  TempDir t;
  const auto corpus = mini_corpus(t, {"photo_coffee.png", "photo_rocket.png"});
  EXPECT_THROW(run_bench(corpus, PipelineConfig{}, DetectorContract::parse("cmd:/bin/false")), DataError);
  EXPECT_THROW(run_bench(corpus, PipelineConfig{}, DetectorContract::parse("cmd:/bin/echo not-json")),
               DataError);
}

TEST(Bench, CorruptImageAborts) {
  TempDir t;
  const auto good = read_file(corpus_dir() / "photo_coffee.png");
  write_file(t / "a.png", good);
  write_file(t / "b.png", std::span(good).first(good.size() / 2));
  EXPECT_THROW(run_bench(scan_corpus(t.path()), PipelineConfig{}, DetectorContract::small_model_stub()),
               DataError);
}

TEST(Bench, ReportJsonAndCompare) {
  TempDir t;
  const auto corpus = mini_corpus(t, {"photo_coffee.png", "photo_rocket.png"});
  const auto r = run_bench(corpus, PipelineConfig{}, DetectorContract::parse("stub:a=5,b=0,c=0"));
  const auto back = bench_report_from_json(bench_report_to_json(r));
  EXPECT_EQ(back.config_id, r.config_id);
  EXPECT_EQ(back.corpus_fingerprint, r.corpus_fingerprint);
  EXPECT_EQ(back.fps_per_rep, r.fps_per_rep);
  EXPECT_EQ(back.stages.size(), 7u);

  const auto rows = compare_reports(r, r);
  ASSERT_EQ(rows.size(), 8u);
  EXPECT_EQ(rows[0].metric, "fps");
  for (const auto& row : rows) EXPECT_EQ(row.formatted, "0 %");

  auto other = r;
  other.detector = "stub:small";
  EXPECT_THROW(compare_reports(r, other), InvalidArgument);
  other = r;
  other.corpus_fingerprint = "elsewhere";
  EXPECT_THROW(compare_reports(r, other), InvalidArgument);
}

TEST(Bench, RejectsBadOptions) {
  TempDir t;
  const auto corpus = mini_corpus(t, {"photo_coffee.png"});
  BenchOptions o;
  o.reps = 0;
  EXPECT_THROW(run_bench(corpus, PipelineConfig{}, DetectorContract::small_model_stub(), o), InvalidArgument);
  TempDir empty;
  EXPECT_THROW(run_bench(scan_corpus(empty.path()), PipelineConfig{}, DetectorContract::small_model_stub()),
               DataError);
}
