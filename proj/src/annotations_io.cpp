#include "acqbench/annotations_io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "acqbench/error.hpp"

namespace acqbench {

namespace {

using nlohmann::json;

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot create " + path.string());
  out << text;
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("malformed JSON: ") + e.what());
  }
}

const json& member(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw SchemaError(where + ": missing \"" + key + "\"");
  }
  return obj.at(key);
}

std::int64_t get_int(const json& obj, const char* key, const std::string& where) {
  const json& v = member(obj, key, where);
  if (!v.is_number_integer()) throw SchemaError(where + ": \"" + key + "\" must be an integer");
  return v.get<std::int64_t>();
}

double get_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw SchemaError(where + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SchemaError(where + " must be finite");
  return d;
}

BoundingBox parse_box(const json& entry, const std::string& where) {
  const json& bbox = member(entry, "bbox", where);
  if (!bbox.is_array() || bbox.size() != 4) {
    throw SchemaError(where + ": \"bbox\" must be [x, y, w, h]");
  }
  BoundingBox b;
  b.x = get_number(bbox[0], where + ".bbox[0]");
  b.y = get_number(bbox[1], where + ".bbox[1]");
  b.w = get_number(bbox[2], where + ".bbox[2]");
  b.h = get_number(bbox[3], where + ".bbox[3]");
  if (!(b.w > 0.0) || !(b.h > 0.0)) {
    throw SchemaError(where + ": box extents must be positive");
  }
  b.category_id = static_cast<int>(get_int(entry, "category_id", where));
  return b;
}

std::vector<ImageInfo> parse_images(const json& arr, const std::string& where) {
  if (!arr.is_array()) throw SchemaError(where + " must be an array");
  std::vector<ImageInfo> images;
  std::set<std::int64_t> ids;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    ImageInfo info;
    info.id = get_int(arr[i], "id", w);
    if (arr[i].contains("file_name")) {
      if (!arr[i]["file_name"].is_string()) throw SchemaError(w + ": \"file_name\" must be a string");
      info.file_name = arr[i]["file_name"].get<std::string>();
    }
    info.width = static_cast<int>(get_int(arr[i], "width", w));
    info.height = static_cast<int>(get_int(arr[i], "height", w));
    if (info.width < 1 || info.height < 1) throw SchemaError(w + ": image size must be positive");
    if (!ids.insert(info.id).second) {
      throw SchemaError(w + ": duplicate image id " + std::to_string(info.id));
    }
    images.push_back(std::move(info));
  }
  return images;
}

std::vector<Category> parse_categories(const json& arr) {
  if (!arr.is_array()) throw SchemaError("\"categories\" must be an array");
  std::vector<Category> cats;
  std::set<int> ids;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string w = "categories[" + std::to_string(i) + "]";
    Category c;
    c.id = static_cast<int>(get_int(arr[i], "id", w));
    if (arr[i].contains("name") && arr[i]["name"].is_string()) c.name = arr[i]["name"].get<std::string>();
    if (!ids.insert(c.id).second) throw SchemaError(w + ": duplicate category id");
    cats.push_back(std::move(c));
  }
  return cats;
}

void resolve(const BoxCollection& ref, const ImageBox& ib, const std::string& where) {
  if (ref.find_image(ib.image_id) == nullptr) {
    throw DataError(where + ": unknown image_id " + std::to_string(ib.image_id));
  }
  if (!ref.has_category(ib.box.category_id)) {
    throw DataError(where + ": unknown category_id " + std::to_string(ib.box.category_id));
  }
}

json images_json(const std::vector<ImageInfo>& images) {
  json arr = json::array();
  for (const auto& i : images) {
    arr.push_back({{"id", i.id}, {"file_name", i.file_name}, {"width", i.width}, {"height", i.height}});
  }
  return arr;
}

json categories_json(const std::vector<Category>& cats) {
  json arr = json::array();
  for (const auto& c : cats) arr.push_back({{"id", c.id}, {"name", c.name}});
  return arr;
}

}  // namespace

void rescale_boxes(BoxCollection& set, const SizeMap& sizes) {
  std::map<std::int64_t, std::pair<double, double>> factors;
  for (auto& img : set.images) {
    auto it = sizes.find(img.id);
    if (it == sizes.end()) continue;
    if (it->second.width == img.width && it->second.height == img.height) continue;
    factors[img.id] = {static_cast<double>(it->second.width) / img.width,
                       static_cast<double>(it->second.height) / img.height};
    img.width = it->second.width;
    img.height = it->second.height;
  }
  for (auto& ib : set.boxes) {
    auto it = factors.find(ib.image_id);
    if (it == factors.end()) continue;
    ib.box.x *= it->second.first;
    ib.box.w *= it->second.first;
    ib.box.y *= it->second.second;
    ib.box.h *= it->second.second;
  }
}

AnnotationSet parse_annotations(std::string_view text, const SizeMap& variant_sizes) {
  const json doc = parse_json(text);
  if (!doc.is_object()) throw SchemaError("annotation document must be an object");
  AnnotationSet set;
  set.images = parse_images(member(doc, "images", "annotations file"), "images");
  set.categories = parse_categories(member(doc, "categories", "annotations file"));
  const json& anns = member(doc, "annotations", "annotations file");
  if (!anns.is_array()) throw SchemaError("\"annotations\" must be an array");
  for (std::size_t i = 0; i < anns.size(); ++i) {
    const std::string w = "annotations[" + std::to_string(i) + "]";
    ImageBox ib{get_int(anns[i], "image_id", w), parse_box(anns[i], w)};
    if (anns[i].contains("score")) throw SchemaError(w + ": ground truth must not carry a score");
    resolve(set, ib, w);
    set.boxes.push_back(ib);
  }
  rescale_boxes(set, variant_sizes);
  return set;
}

AnnotationSet load_annotations(const std::filesystem::path& path, const SizeMap& variant_sizes) {
  return parse_annotations(read_text(path), variant_sizes);
}

namespace {

struct DetectionDocument {
  std::vector<ImageBox> boxes;
  std::vector<ImageInfo> declared;
};

DetectionDocument parse_detection_document(std::string_view text,
                                           std::optional<std::int64_t> default_image_id) {
  const json doc = parse_json(text);
  const json* list = &doc;
  DetectionDocument out;
  if (doc.is_object()) {
    list = &member(doc, "detections", "detections file");
    if (doc.contains("images")) out.declared = parse_images(doc["images"], "images");
  }
  if (!list->is_array()) throw SchemaError("detections must be an array");
  for (std::size_t i = 0; i < list->size(); ++i) {
    const json& entry = (*list)[i];
    const std::string w = "detections[" + std::to_string(i) + "]";
    ImageBox ib;
    if (entry.is_object() && !entry.contains("image_id") && default_image_id) {
      ib.image_id = *default_image_id;
    } else {
      ib.image_id = get_int(entry, "image_id", w);
    }
    ib.box = parse_box(entry, w);
    const double score = get_number(member(entry, "score", w), w + ".score");
    if (score < 0.0 || score > 1.0) throw SchemaError(w + ": score must lie in [0, 1]");
    ib.box.score = score;
    out.boxes.push_back(ib);
  }
  return out;
}

}  // namespace

std::vector<ImageBox> parse_detection_list(std::string_view text,
                                           std::optional<std::int64_t> default_image_id) {
  return parse_detection_document(text, default_image_id).boxes;
}

DetectionSet parse_detections(std::string_view text, const AnnotationSet& reference,
                              const SizeMap& variant_sizes,
                              std::optional<std::int64_t> default_image_id) {
  auto parsed = parse_detection_document(text, default_image_id);
  const auto& declared = parsed.declared;
  DetectionSet set;
  set.images = reference.images;
  set.categories = reference.categories;
  for (std::size_t i = 0; i < parsed.boxes.size(); ++i) {
    resolve(reference, parsed.boxes[i], "detections[" + std::to_string(i) + "]");
  }
  set.boxes = std::move(parsed.boxes);

  // Boxes are in the declared frame; bring them to the variant frame.
  if (!declared.empty()) {
    SizeMap targets;
    for (auto& img : set.images) {
      const ImageInfo* d = nullptr;
      for (const auto& candidate : declared) {
        if (candidate.id == img.id) d = &candidate;
      }
      auto v = variant_sizes.find(img.id);
      const ImageSize target = v != variant_sizes.end() ? v->second : ImageSize{img.width, img.height};
      if (d != nullptr) {
        img.width = d->width;
        img.height = d->height;
      }
      targets[img.id] = target;
    }
    rescale_boxes(set, targets);
  } else {
    for (auto& img : set.images) {
      if (auto v = variant_sizes.find(img.id); v != variant_sizes.end()) {
        img.width = v->second.width;
        img.height = v->second.height;
      }
    }
  }
  return set;
}

DetectionSet load_detections(const std::filesystem::path& path, const AnnotationSet& reference,
                             const SizeMap& variant_sizes) {
  return parse_detections(read_text(path), reference, variant_sizes);
}

std::string annotations_to_json(const AnnotationSet& set) {
  json anns = json::array();
  std::int64_t id = 1;
  for (const auto& ib : set.boxes) {
    anns.push_back({{"id", id++},
                    {"image_id", ib.image_id},
                    {"category_id", ib.box.category_id},
                    {"bbox", {ib.box.x, ib.box.y, ib.box.w, ib.box.h}}});
  }
  json doc = {{"images", images_json(set.images)},
              {"categories", categories_json(set.categories)},
              {"annotations", anns}};
  return doc.dump(1) + "\n";
}

std::string detections_to_json(const DetectionSet& set) {
  json dets = json::array();
  for (const auto& ib : set.boxes) {
    dets.push_back({{"image_id", ib.image_id},
                    {"category_id", ib.box.category_id},
                    {"bbox", {ib.box.x, ib.box.y, ib.box.w, ib.box.h}},
                    {"score", ib.box.score.value_or(0.0)}});
  }
  json doc = {{"images", images_json(set.images)}, {"detections", dets}};
  return doc.dump(1) + "\n";
}

void save_annotations(const std::filesystem::path& path, const AnnotationSet& set) {
  write_text(path, annotations_to_json(set));
}

void save_detections(const std::filesystem::path& path, const DetectionSet& set) {
  write_text(path, detections_to_json(set));
}

}  // namespace acqbench
