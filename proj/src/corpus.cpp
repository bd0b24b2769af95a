#include "acqbench/corpus.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <set>

#include "acqbench/codec.hpp"
#include "acqbench/error.hpp"
#include "acqbench/transforms.hpp"

namespace acqbench {

namespace fs = std::filesystem;

std::uint64_t CorpusItem::bytes_on_disk() const {
  std::uint64_t total = 0;
  for (const auto& f : files) total += fs::file_size(f);
  return total;
}

std::string Corpus::fingerprint() const {
  // FNV-1a over "stem:size;" records.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
  };
  for (const auto& item : items) mix(item.stem + ":" + std::to_string(item.bytes_on_disk()) + ";");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::to_string(items.size()) + "-" + buf;
}

Corpus scan_corpus(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("corpus directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  // Band groups: stem -> five slots.
  std::map<std::string, std::array<fs::path, 5>> bands;
  for (const auto& f : files) {
    if (f.extension() != ".png") continue;
    const std::string stem = f.stem().string();
    for (std::size_t b = 0; b < 5; ++b) {
      const std::string suffix = kBandSuffixes[b];
      if (stem.size() > suffix.size() && stem.ends_with(suffix)) {
        bands[stem.substr(0, stem.size() - suffix.size())][b] = f;
        break;
      }
    }
  }
  std::set<fs::path> grouped;
  Corpus corpus{dir, {}};
  for (const auto& [stem, slots] : bands) {
    if (std::any_of(slots.begin(), slots.end(), [](const auto& p) { return p.empty(); })) continue;
    grouped.insert(slots.begin(), slots.end());
    corpus.items.push_back({stem, {slots.begin(), slots.end()}, true});
  }
  std::set<std::string> stems;
  for (const auto& item : corpus.items) stems.insert(item.stem);
  for (const auto& f : files) {
    if (grouped.contains(f)) continue;
    const std::string stem = f.stem().string();
    if (!stems.insert(stem).second) {
      throw DataError("corpus has two images with stem '" + stem + "'");
    }
    corpus.items.push_back({stem, {f}, false});
  }
  std::sort(corpus.items.begin(), corpus.items.end(),
            [](const auto& a, const auto& b) { return a.stem < b.stem; });
  return corpus;
}

ImageBuffer decode_corpus_item(const CorpusItem& item,
                               const std::vector<std::vector<std::uint8_t>>& file_bytes) {
  if (file_bytes.size() != item.files.size()) throw DataError("file count mismatch for " + item.stem);
  auto decode = [&](std::size_t i) {
    try {
      return decode_image(file_bytes[i]);
    } catch (const DecodeError& e) {
      throw DecodeError(e.offset(), item.files[i].string() + ": " + e.detail());
    }
  };
  if (!item.multispectral) return decode(0);
  std::array<ImageBuffer, 5> planes;
  for (std::size_t b = 0; b < 5; ++b) {
    ImageBuffer band = decode(b);
    if (band.channels() != 1) band = convert_color(band, ColorModel::Gray);
    planes[b] = std::move(band);
  }
  return fuse_multispectral(planes);
}

ImageBuffer load_corpus_item(const CorpusItem& item) {
  std::vector<std::vector<std::uint8_t>> bytes;
  for (const auto& f : item.files) bytes.push_back(read_file(f));
  return decode_corpus_item(item, bytes);
}

}  // namespace acqbench
