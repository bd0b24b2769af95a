#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "acqbench/boxes.hpp"

namespace acqbench {

struct ImageSize {
  int width = 0;
  int height = 0;
};

/// Target dimensions of processed variants, keyed by image id.
using SizeMap = std::map<std::int64_t, ImageSize>;

// Ground truth uses a COCO subset:
//   {"images": [{"id", "file_name", "width", "height"}],
//    "categories": [{"id", "name"}],
//    "annotations": [{"image_id", "category_id", "bbox": [x, y, w, h]}]}
// Detections are a flat list of {"image_id", "category_id", "bbox", "score"},
// either bare or as {"images": [...], "detections": [...]} where "images"
// declares the frame the boxes were produced in. Unknown members are ignored.
// The JSON Schema files under schemas/ describe both documents.

/// Parses and validates ground truth; boxes of images listed in `variant_sizes`
/// are rescaled linearly from the declared image size to the variant size.
AnnotationSet parse_annotations(std::string_view json, const SizeMap& variant_sizes = {});
AnnotationSet load_annotations(const std::filesystem::path& path,
                               const SizeMap& variant_sizes = {});

/// Schema-checks a detection document without resolving ids (used for raw
/// detector output). `default_image_id` fills entries without "image_id".
std::vector<ImageBox> parse_detection_list(std::string_view json,
                                           std::optional<std::int64_t> default_image_id = std::nullopt);

/// Parses detections and resolves their ids against `reference` (normally the
/// ground truth). Boxes are rescaled when the document declares an image size
/// that differs from `variant_sizes` (or, absent an entry, from the reference).
/// `default_image_id` fills entries that omit "image_id".
DetectionSet parse_detections(std::string_view json, const AnnotationSet& reference,
                              const SizeMap& variant_sizes = {},
                              std::optional<std::int64_t> default_image_id = std::nullopt);
DetectionSet load_detections(const std::filesystem::path& path, const AnnotationSet& reference,
                             const SizeMap& variant_sizes = {});

/// Linear rescale of every box whose image has an entry in `sizes`; the image
/// records take the new dimensions.
void rescale_boxes(BoxCollection& set, const SizeMap& sizes);

std::string annotations_to_json(const AnnotationSet& set);
/// Detections with their image and category tables.
std::string detections_to_json(const DetectionSet& set);
void save_annotations(const std::filesystem::path& path, const AnnotationSet& set);
void save_detections(const std::filesystem::path& path, const DetectionSet& set);

}  // namespace acqbench
