// Toy blob detector speaking the external-detector protocol:
//   acqbench-toydet --image <path> --meta <json-path>
// Prints a JSON list of detections on standard output.
//
// Pixels that differ strongly from a local box-filtered background are grouped
// into 4-connected components; compact components become boxes, classed by size.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "acqbench/codec.hpp"
#include "acqbench/error.hpp"
#include "acqbench/transforms.hpp"

using namespace acqbench;
using nlohmann::json;

namespace {

constexpr int kWindow = 41;
constexpr double kThreshold = 38.0;
constexpr int kMinArea = 12;
constexpr int kMaxSide = 48;
constexpr double kMinFill = 0.45;
constexpr double kMaxAspect = 4.0;
constexpr int kVehicleSide = 12;

struct Plane {
  int w = 0, h = 0;
  std::vector<double> v;
};

// Mean over a kWindow x kWindow box clipped to the image.
Plane box_mean(const Plane& p) {
  const int w = p.w, h = p.h;
  std::vector<double> integral(static_cast<std::size_t>(w + 1) * (h + 1), 0.0);
  auto at = [&](int x, int y) -> double& { return integral[static_cast<std::size_t>(y) * (w + 1) + x]; };
  for (int y = 0; y < h; ++y) {
    double row = 0;
    for (int x = 0; x < w; ++x) {
      row += p.v[static_cast<std::size_t>(y) * w + x];
      at(x + 1, y + 1) = at(x + 1, y) + row;
    }
  }
  Plane out{w, h, std::vector<double>(p.v.size())};
  const int r = kWindow / 2;
  for (int y = 0; y < h; ++y) {
    const int y0 = std::max(0, y - r), y1 = std::min(h, y + r + 1);
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - r), x1 = std::min(w, x + r + 1);
      const double sum = at(x1, y1) - at(x0, y1) - at(x1, y0) + at(x0, y0);
      out.v[static_cast<std::size_t>(y) * w + x] = sum / ((x1 - x0) * (y1 - y0));
    }
  }
  return out;
}

ImageBuffer to_displayable(const ImageBuffer& img) {
  switch (img.color_model()) {
    case ColorModel::Gray:
    case ColorModel::Rgb:
      return img;
    default:
      return convert_color(img, ColorModel::Rgb);
  }
}

json detect(const ImageBuffer& input, std::int64_t image_id) {
  const ImageBuffer img = to_displayable(input);
  const int w = img.width(), h = img.height(), c = img.channels();
  const std::size_t n = static_cast<std::size_t>(w) * h;

  std::vector<double> contrast(n, 0.0);
  for (int ch = 0; ch < c; ++ch) {
    Plane p{w, h, std::vector<double>(n)};
    const auto plane = img.plane(ch);
    for (std::size_t i = 0; i < n; ++i) p.v[i] = plane[i];
    const Plane bg = box_mean(p);
    for (std::size_t i = 0; i < n; ++i) contrast[i] = std::max(contrast[i], std::abs(p.v[i] - bg.v[i]));
  }

  std::vector<int> label(n, 0);
  std::vector<std::size_t> stack;
  json out = json::array();
  int next = 0;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (label[seed] != 0 || contrast[seed] <= kThreshold) continue;
    ++next;
    label[seed] = next;
    stack.assign(1, seed);
    int x0 = w, y0 = h, x1 = -1, y1 = -1;
    int area = 0;
    double sum = 0;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      const int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
      ++area;
      sum += contrast[i];
      const int nx[4] = {x - 1, x + 1, x, x};
      const int ny[4] = {y, y, y - 1, y + 1};
      for (int k = 0; k < 4; ++k) {
        if (nx[k] < 0 || ny[k] < 0 || nx[k] >= w || ny[k] >= h) continue;
        const std::size_t j = static_cast<std::size_t>(ny[k]) * w + nx[k];
        if (label[j] == 0 && contrast[j] > kThreshold) {
          label[j] = next;
          stack.push_back(j);
        }
      }
    }
    const int bw = x1 - x0 + 1, bh = y1 - y0 + 1;
    const double fill = static_cast<double>(area) / (bw * bh);
    const double aspect = static_cast<double>(std::max(bw, bh)) / std::min(bw, bh);
    if (area < kMinArea || bw > kMaxSide || bh > kMaxSide || fill < kMinFill || aspect > kMaxAspect) {
      continue;
    }
    const int category = std::max(bw, bh) >= kVehicleSide ? 1 : 2;
    const double strength = std::min(1.0, sum / area / 128.0);
    const double score = std::clamp(std::round(strength * fill * 1e6) / 1e6, 0.0, 1.0);
    out.push_back({{"image_id", image_id},
                   {"category_id", category},
                   {"bbox", {x0, y0, bw, bh}},
                   {"score", score}});
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Toy blob detector"};
  std::string image_path, meta_path;
  app.add_option("--image", image_path, "Encoded image")->required();
  app.add_option("--meta", meta_path, "Request metadata JSON");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  try {
    std::int64_t image_id = 0;
    std::optional<ColorModel> tag;
    if (!meta_path.empty()) {
      std::ifstream in(meta_path);
      if (!in) throw DataError("cannot open " + meta_path);
      const json meta = json::parse(in);
      image_id = meta.value("image_id", std::int64_t{0});
      if (meta.contains("color_model")) tag = parse_color_model(meta["color_model"].get<std::string>());
    }
    const ImageBuffer img = decode_image(read_file(image_path), tag);
    std::cout << detect(img, image_id).dump() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "toydet: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
