#include "acqbench/eval.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include <json.hpp>

#include "acqbench/error.hpp"

namespace acqbench {

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

namespace {

std::vector<std::size_t> score_order(std::span<const BoundingBox> det) {
  std::vector<std::size_t> order(det.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return det[a].score.value_or(0.0) > det[b].score.value_or(0.0);
  });
  return order;
}

}  // namespace

Matching match_detections(std::span<const BoundingBox> gt, std::span<const BoundingBox> det,
                          double threshold) {
  Matching m;
  m.det_to_gt.assign(det.size(), -1);
  m.gt_to_det.assign(gt.size(), -1);
  for (std::size_t d : score_order(det)) {
    int best = -1;
    double best_iou = threshold;
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (m.gt_to_det[g] >= 0) continue;
      const double v = iou(det[d], gt[g]);
      if (v >= best_iou && (best < 0 || v > best_iou)) {
        best = static_cast<int>(g);
        best_iou = v;
      }
    }
    if (best >= 0) {
      m.det_to_gt[d] = best;
      m.gt_to_det[static_cast<std::size_t>(best)] = static_cast<int>(d);
      ++m.true_positives;
    } else {
      ++m.false_positives;
    }
  }
  m.false_negatives = gt.size() - m.true_positives;
  return m;
}

std::optional<double> average_precision(std::vector<RankedDetection> ranked,
                                        std::size_t num_ground_truth) {
  if (num_ground_truth == 0) return std::nullopt;
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.order < b.order;
  });
  const std::size_t n = ranked.size();
  std::vector<double> precision(n), recall(n);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (ranked[i].true_positive) ++tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / static_cast<double>(num_ground_truth);
  }
  // Monotone envelope from the right.
  for (std::size_t i = n; i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (recall[i] > prev_recall) {
      ap += (recall[i] - prev_recall) * precision[i];
      prev_recall = recall[i];
    }
  }
  return ap;
}

EvalResult evaluate(const AnnotationSet& gt, const DetectionSet& det, const EvalOptions& options) {
  for (std::size_t i = 0; i < det.boxes.size(); ++i) {
    const auto& ib = det.boxes[i];
    if (!ib.box.score) {
      throw SchemaError("detection " + std::to_string(i) + " has no score");
    }
    if (gt.find_image(ib.image_id) == nullptr) {
      throw DataError("detection " + std::to_string(i) + ": unknown image_id " +
                      std::to_string(ib.image_id));
    }
    if (!gt.has_category(ib.box.category_id)) {
      throw DataError("detection " + std::to_string(i) + ": unknown category_id " +
                      std::to_string(ib.box.category_id));
    }
  }

  // (image, class) -> indices into the box lists, in input order.
  using Key = std::pair<std::int64_t, int>;
  std::map<Key, std::vector<std::size_t>> gt_groups, det_groups;
  for (std::size_t i = 0; i < gt.boxes.size(); ++i) {
    gt_groups[{gt.boxes[i].image_id, gt.boxes[i].box.category_id}].push_back(i);
  }
  for (std::size_t i = 0; i < det.boxes.size(); ++i) {
    det_groups[{det.boxes[i].image_id, det.boxes[i].box.category_id}].push_back(i);
  }

  EvalResult result;
  std::map<int, std::vector<RankedDetection>> ranked;
  for (const auto& c : gt.categories) result.counts[c.id];

  std::set<Key> keys;
  for (const auto& [k, _] : gt_groups) keys.insert(k);
  for (const auto& [k, _] : det_groups) keys.insert(k);
  for (const auto& key : keys) {
    const auto& gi = gt_groups[key];
    const auto& di = det_groups[key];
    std::vector<BoundingBox> gboxes, dboxes;
    for (auto i : gi) gboxes.push_back(gt.boxes[i].box);
    for (auto i : di) dboxes.push_back(det.boxes[i].box);
    const Matching m = match_detections(gboxes, dboxes, options.iou_threshold);

    auto& counts = result.counts[key.second];
    counts.ground_truth += gboxes.size();
    counts.detections += dboxes.size();
    counts.true_positives += m.true_positives;
    counts.false_positives += m.false_positives;
    counts.false_negatives += m.false_negatives;
    auto& list = ranked[key.second];
    for (std::size_t d = 0; d < dboxes.size(); ++d) {
      list.push_back({*dboxes[d].score, m.det_to_gt[d] >= 0, di[d]});
      if (options.record_pairs && m.det_to_gt[d] >= 0) {
        const auto g = static_cast<std::size_t>(m.det_to_gt[d]);
        result.matched_pairs.push_back({key.first, di[d], gi[g], iou(dboxes[d], gboxes[g])});
      }
    }
  }

  double sum = 0.0;
  for (const auto& [cls, counts] : result.counts) {
    auto ap = average_precision(ranked[cls], counts.ground_truth);
    if (!ap) continue;
    result.per_class_ap[cls] = *ap;
    sum += *ap;
  }
  result.map50 =
      result.per_class_ap.empty() ? 0.0 : sum / static_cast<double>(result.per_class_ap.size());
  return result;
}

std::string eval_result_to_json(const EvalResult& result, const AnnotationSet& gt, bool per_class) {
  nlohmann::json doc;
  doc["map50"] = result.map50;
  doc["classes"] = result.per_class_ap.size();
  if (per_class) {
    auto arr = nlohmann::json::array();
    for (const auto& [cls, counts] : result.counts) {
      std::string name;
      for (const auto& c : gt.categories) {
        if (c.id == cls) name = c.name;
      }
      nlohmann::json entry = {{"category_id", cls},
                              {"name", name},
                              {"ground_truth", counts.ground_truth},
                              {"detections", counts.detections},
                              {"tp", counts.true_positives},
                              {"fp", counts.false_positives},
                              {"fn", counts.false_negatives}};
      auto it = result.per_class_ap.find(cls);
      entry["ap"] = it == result.per_class_ap.end() ? nlohmann::json(nullptr) : nlohmann::json(it->second);
      arr.push_back(entry);
    }
    doc["per_class"] = arr;
  }
  return doc.dump(2) + "\n";
}

}  // namespace acqbench
