#include "acqbench/size_stats.hpp"

#include <algorithm>
#include <map>

#include "acqbench/codec.hpp"
#include "acqbench/error.hpp"

namespace acqbench {

namespace fs = std::filesystem;

namespace {

double median(std::vector<std::uint64_t> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return static_cast<double>(values[mid]);
  return (static_cast<double>(values[mid - 1]) + static_cast<double>(values[mid])) / 2.0;
}

std::map<std::string, std::uint64_t> sizes_by_stem(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  std::map<std::string, std::uint64_t> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || !is_image_file(entry.path())) continue;
    const std::string stem = entry.path().stem().string();
    if (!out.emplace(stem, entry.file_size()).second) {
      throw DataError("two images share stem '" + stem + "' in " + dir.string());
    }
  }
  return out;
}

}  // namespace

SizeStats summarize_sizes(std::vector<SizeEntry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.stem < b.stem; });
  SizeStats s;
  std::vector<std::uint64_t> base, var;
  for (const auto& e : entries) {
    s.baseline_total += e.baseline_bytes;
    s.variant_total += e.variant_bytes;
    base.push_back(e.baseline_bytes);
    var.push_back(e.variant_bytes);
  }
  if (!entries.empty()) {
    const auto n = static_cast<double>(entries.size());
    s.baseline_mean = static_cast<double>(s.baseline_total) / n;
    s.variant_mean = static_cast<double>(s.variant_total) / n;
  }
  s.baseline_median = median(std::move(base));
  s.variant_median = median(std::move(var));
  s.reduction = s.baseline_total == 0
                    ? 0.0
                    : 1.0 - static_cast<double>(s.variant_total) /
                                static_cast<double>(s.baseline_total);
  s.entries = std::move(entries);
  return s;
}

SizeStats compute_size_stats(const fs::path& baseline_dir, const fs::path& variant_dir) {
  const auto base = sizes_by_stem(baseline_dir);
  const auto var = sizes_by_stem(variant_dir);
  std::vector<SizeEntry> entries;
  for (const auto& [stem, bytes] : base) {
    auto it = var.find(stem);
    if (it == var.end()) {
      throw DataError("no counterpart for '" + stem + "' in " + variant_dir.string());
    }
    entries.push_back({stem, bytes, it->second});
  }
  for (const auto& [stem, bytes] : var) {
    if (!base.contains(stem)) {
      throw DataError("no counterpart for '" + stem + "' in " + baseline_dir.string());
    }
  }
  return summarize_sizes(std::move(entries));
}

}  // namespace acqbench
