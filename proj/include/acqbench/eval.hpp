#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "acqbench/boxes.hpp"

namespace acqbench {

inline constexpr double kIouThreshold = 0.5;

/// Intersection over union of two axis-aligned boxes (continuous geometry).
double iou(const BoundingBox& a, const BoundingBox& b);

/// Greedy score-ordered assignment within one image and class.
struct Matching {
  std::vector<int> det_to_gt;  // -1 for false positives; indexed like the input detections
  std::vector<int> gt_to_det;  // -1 for missed ground truth
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
};

/// Detections are visited by descending score (ties keep input order); each one
/// takes the unmatched ground-truth box with the highest IoU >= threshold
/// (ties keep ground-truth order).
Matching match_detections(std::span<const BoundingBox> gt, std::span<const BoundingBox> det,
                          double threshold = kIouThreshold);

/// One ranked detection of a class across the corpus.
struct RankedDetection {
  double score = 0;
  bool true_positive = false;
  std::size_t order = 0;  // tie-break: lower first
};

/// All-point interpolated AP: precision envelope integrated over recall.
/// Returns nullopt when the class has no ground truth.
std::optional<double> average_precision(std::vector<RankedDetection> ranked,
                                        std::size_t num_ground_truth);

struct ClassCounts {
  std::size_t ground_truth = 0;
  std::size_t detections = 0;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
};

struct MatchedPair {
  std::int64_t image_id = 0;
  std::size_t detection_index = 0;  // into DetectionSet::boxes
  std::size_t ground_truth_index = 0;  // into AnnotationSet::boxes
  double iou = 0;
};

struct EvalResult {
  std::map<int, double> per_class_ap;  // classes with at least one ground-truth box
  std::map<int, ClassCounts> counts;   // every category
  double map50 = 0;
  std::vector<MatchedPair> matched_pairs;  // filled when requested
};

struct EvalOptions {
  double iou_threshold = kIouThreshold;
  bool record_pairs = false;
};

/// Per-class AP and their mean over classes that have ground truth. Every
/// detection must carry a score and resolve against the ground-truth tables.
EvalResult evaluate(const AnnotationSet& gt, const DetectionSet& det, const EvalOptions& options = {});

/// JSON dump: {"map50", "classes", ["per_class": [...]]}.
std::string eval_result_to_json(const EvalResult& result, const AnnotationSet& gt, bool per_class);

}  // namespace acqbench
