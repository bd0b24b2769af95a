#pragma once

// Shared fixtures and independent reference implementations for the tests.
// Nothing here calls into the library code it is used to check.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "acqbench/boxes.hpp"
#include "acqbench/image_buffer.hpp"

namespace testing_support {

namespace fs = std::filesystem;

inline fs::path data_dir() { return fs::path(ACQBENCH_DATA_DIR); }
inline fs::path corpus_dir() { return data_dir() / "corpus"; }
inline std::string toy_detector() { return ACQBENCH_TOYDET; }
inline std::string cli_binary() { return ACQBENCH_CLI; }

/// Unique scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> n{0};
    path_ = fs::temp_directory_path() /
            ("acqbench-test-" + std::to_string(::getpid()) + "-" + std::to_string(n++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& s) const { return path_ / s; }

 private:
  fs::path path_;
};

inline acqbench::ImageBuffer random_image(std::mt19937_64& rng, int w, int h,
                                          acqbench::ColorModel model = acqbench::ColorModel::Rgb) {
  const int c = acqbench::channels_for(model);
  std::vector<std::uint8_t> s(static_cast<std::size_t>(w) * h * c);
  std::uniform_int_distribution<int> d(0, 255);
  for (auto& v : s) v = static_cast<std::uint8_t>(d(rng));
  return acqbench::ImageBuffer(w, h, c, 8, model, std::move(s));
}

/// Planar RGB buffer from interleaved pixels.
inline acqbench::ImageBuffer rgb_pixels(int w, int h, const std::vector<std::array<int, 3>>& px) {
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<std::uint8_t> s(n * 3);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) s[c * n + i] = static_cast<std::uint8_t>(px[i][c]);
  }
  return acqbench::ImageBuffer(w, h, 3, 8, acqbench::ColorModel::Rgb, std::move(s));
}

// ---- oracles -----------------------------------------------------------------

/// Level of the bin containing v, found by scanning every lower bin edge
/// i*256/2^b in exact integer arithmetic.
inline int oracle_quantize(int v, int bits) {
  const int levels = 1 << bits;
  int bin = 0;
  for (int i = 0; i < levels; ++i) {
    if (static_cast<long>(v) * levels >= static_cast<long>(i) * 256) bin = i;
  }
  return static_cast<int>(std::floor(bin * 255.0 / (levels - 1) + 0.5));
}

inline int oracle_gamma(int v, double gamma) {
  const long double x = static_cast<long double>(v) / 255.0L;
  return static_cast<int>(std::floor(255.0L * std::pow(x, static_cast<long double>(gamma)) + 0.5L));
}

/// Intersection over union from explicit corner arithmetic.
inline double oracle_iou(const acqbench::BoundingBox& a, const acqbench::BoundingBox& b) {
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return uni <= 0 ? 0.0 : inter / uni;
}

/// Naive mAP@thr: per class, detections sorted by (score desc, input index),
/// greedy matching by rescanning all ground truth, AP as the sum over recall
/// steps of the best precision at that recall or beyond.
inline double oracle_map(const acqbench::AnnotationSet& gt, const acqbench::DetectionSet& det,
                         double thr = 0.5) {
  std::vector<int> classes;
  for (const auto& c : gt.categories) classes.push_back(c.id);
  double sum = 0;
  int counted = 0;
  for (int cls : classes) {
    std::vector<std::size_t> gts;
    for (std::size_t i = 0; i < gt.boxes.size(); ++i) {
      if (gt.boxes[i].box.category_id == cls) gts.push_back(i);
    }
    if (gts.empty()) continue;
    std::vector<std::size_t> dets;
    for (std::size_t i = 0; i < det.boxes.size(); ++i) {
      if (det.boxes[i].box.category_id == cls) dets.push_back(i);
    }
    // insertion sort: stable by construction
    for (std::size_t i = 1; i < dets.size(); ++i) {
      for (std::size_t j = i; j > 0; --j) {
        if (*det.boxes[dets[j]].box.score > *det.boxes[dets[j - 1]].box.score) {
          std::swap(dets[j], dets[j - 1]);
        } else {
          break;
        }
      }
    }
    std::vector<bool> used(gt.boxes.size(), false);
    std::vector<int> tp;
    for (std::size_t d : dets) {
      double best = -1;
      std::size_t best_g = 0;
      for (std::size_t g : gts) {
        if (used[g] || gt.boxes[g].image_id != det.boxes[d].image_id) continue;
        const double v = oracle_iou(gt.boxes[g].box, det.boxes[d].box);
        if (v >= thr && v > best) {
          best = v;
          best_g = g;
        }
      }
      if (best >= 0) {
        used[best_g] = true;
        tp.push_back(1);
      } else {
        tp.push_back(0);
      }
    }
    std::vector<double> prec, rec;
    int ctp = 0;
    for (std::size_t i = 0; i < tp.size(); ++i) {
      ctp += tp[i];
      prec.push_back(static_cast<double>(ctp) / static_cast<double>(i + 1));
      rec.push_back(static_cast<double>(ctp) / static_cast<double>(gts.size()));
    }
    double ap = 0;
    double prev_r = 0;
    for (std::size_t i = 0; i < tp.size(); ++i) {
      if (!tp[i]) continue;
      double pmax = 0;
      for (std::size_t j = i; j < tp.size(); ++j) pmax = std::max(pmax, prec[j]);
      ap += (rec[i] - prev_r) * pmax;
      prev_r = rec[i];
    }
    sum += ap;
    ++counted;
  }
  return counted == 0 ? 0.0 : sum / counted;
}

/// Random small evaluation instance: up to `max_images` images with up to
/// `max_boxes` ground-truth boxes each, detections jittered from ground truth
/// plus random false positives.
struct EvalInstance {
  acqbench::AnnotationSet gt;
  acqbench::DetectionSet det;
};

inline EvalInstance random_eval_instance(std::mt19937_64& rng, int max_images = 10, int max_boxes = 5,
                                         bool distinct_scores = false) {
  EvalInstance inst;
  std::uniform_int_distribution<int> n_img(1, max_images);
  std::uniform_int_distribution<int> n_box(0, max_boxes);
  std::uniform_int_distribution<int> cls(1, 3);
  std::uniform_real_distribution<double> pos(0.0, 80.0);
  std::uniform_real_distribution<double> size(4.0, 30.0);
  std::uniform_real_distribution<double> jitter(-4.0, 4.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> coarse(0, 10);
  inst.gt.categories = {{1, "a"}, {2, "b"}, {3, "c"}};
  const int images = n_img(rng);
  for (int i = 1; i <= images; ++i) {
    inst.gt.images.push_back({i, "img" + std::to_string(i) + ".png", 128, 128});
    const int boxes = n_box(rng);
    for (int k = 0; k < boxes; ++k) {
      acqbench::BoundingBox b{pos(rng), pos(rng), size(rng), size(rng), cls(rng), std::nullopt};
      inst.gt.boxes.push_back({i, b});
    }
  }
  inst.det.images = inst.gt.images;
  inst.det.categories = inst.gt.categories;
  auto score = [&] {
    // Coarse scores force ties unless distinct scores are requested.
    return distinct_scores ? unit(rng) : coarse(rng) / 10.0;
  };
  for (const auto& g : inst.gt.boxes) {
    if (unit(rng) < 0.8) {
      acqbench::BoundingBox b = g.box;
      b.x += jitter(rng);
      b.y += jitter(rng);
      b.w = std::max(1.0, b.w + jitter(rng));
      b.h = std::max(1.0, b.h + jitter(rng));
      if (unit(rng) < 0.1) b.category_id = cls(rng);
      b.score = score();
      inst.det.boxes.push_back({g.image_id, b});
    }
    if (unit(rng) < 0.2) {  // duplicate
      acqbench::BoundingBox b = g.box;
      b.x += jitter(rng);
      b.score = score();
      inst.det.boxes.push_back({g.image_id, b});
    }
  }
  const int fps = std::uniform_int_distribution<int>(0, images * 2)(rng);
  for (int k = 0; k < fps; ++k) {
    const int img = std::uniform_int_distribution<int>(1, images)(rng);
    acqbench::BoundingBox b{pos(rng), pos(rng), size(rng), size(rng), cls(rng), score()};
    inst.det.boxes.push_back({img, b});
  }
  std::shuffle(inst.det.boxes.begin(), inst.det.boxes.end(), rng);
  return inst;
}

/// Checkerboard with squares of `cell` pixels whose edges are softened by a
/// linear ramp of `ramp` pixels (keeps bilinear resampling error small).
inline acqbench::ImageBuffer soft_checkerboard(int w, int h, int cell, double ramp) {
  std::vector<std::uint8_t> s(static_cast<std::size_t>(w) * h);
  auto edge = [&](double t) {
    // signed distance to the nearest cell border, positive inside even cells
    const double m = std::fmod(t, 2.0 * cell);
    const double d = std::min({m, std::abs(cell - m), 2.0 * cell - m});
    return std::clamp(d / ramp, 0.0, 1.0) * (m < cell ? 1.0 : -1.0);
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double v = edge(x + 0.5) * edge(y + 0.5);  // in [-1, 1]
      s[static_cast<std::size_t>(y) * w + x] =
          static_cast<std::uint8_t>(std::lround(127.5 + 100.0 * v));
    }
  }
  return acqbench::ImageBuffer(w, h, 1, 8, acqbench::ColorModel::Gray, std::move(s));
}

}  // namespace testing_support
