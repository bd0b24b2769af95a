#include "acqbench/boxes.hpp"

#include <algorithm>

namespace acqbench {

const ImageInfo* BoxCollection::find_image(std::int64_t id) const {
  auto it = std::find_if(images.begin(), images.end(), [id](const auto& i) { return i.id == id; });
  return it == images.end() ? nullptr : &*it;
}

const ImageInfo* BoxCollection::find_image_by_name(const std::string& file_name) const {
  auto it = std::find_if(images.begin(), images.end(),
                         [&](const auto& i) { return i.file_name == file_name; });
  return it == images.end() ? nullptr : &*it;
}

bool BoxCollection::has_category(int id) const {
  return std::any_of(categories.begin(), categories.end(),
                     [id](const auto& c) { return c.id == id; });
}

}  // namespace acqbench
