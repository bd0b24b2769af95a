#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace acqbench {

/// Axis-aligned box with top-left origin, in pixels of the image it refers to.
struct BoundingBox {
  double x = 0;
  double y = 0;
  double w = 0;
  double h = 0;
  int category_id = 0;
  std::optional<double> score;  // detections only

  double right() const { return x + w; }
  double bottom() const { return y + h; }
  double area() const { return w * h; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct ImageInfo {
  std::int64_t id = 0;
  std::string file_name;
  int width = 0;
  int height = 0;

  friend bool operator==(const ImageInfo&, const ImageInfo&) = default;
};

struct Category {
  int id = 0;
  std::string name;

  friend bool operator==(const Category&, const Category&) = default;
};

struct ImageBox {
  std::int64_t image_id = 0;
  BoundingBox box;

  friend bool operator==(const ImageBox&, const ImageBox&) = default;
};

/// Images, categories and boxes of one labelled collection. Box order is
/// significant: it is the tie-break order for equal detection scores.
struct BoxCollection {
  std::vector<ImageInfo> images;
  std::vector<Category> categories;
  std::vector<ImageBox> boxes;

  const ImageInfo* find_image(std::int64_t id) const;
  const ImageInfo* find_image_by_name(const std::string& file_name) const;
  bool has_category(int id) const;

  friend bool operator==(const BoxCollection&, const BoxCollection&) = default;
};

/// Ground truth; boxes carry no score.
struct AnnotationSet : BoxCollection {};

/// Detector output; every box carries a score in [0, 1].
struct DetectionSet : BoxCollection {};

}  // namespace acqbench
