#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace acqbench {

struct SizeEntry {
  std::string stem;
  std::uint64_t baseline_bytes = 0;
  std::uint64_t variant_bytes = 0;
};

/// Byte accounting of a variant directory against its baseline.
struct SizeStats {
  std::vector<SizeEntry> entries;  // sorted by stem
  std::uint64_t baseline_total = 0;
  std::uint64_t variant_total = 0;
  double baseline_mean = 0;
  double variant_mean = 0;
  double baseline_median = 0;
  double variant_median = 0;
  /// 1 - variant_total / baseline_total.
  double reduction = 0;
};

/// Aggregates per-image entries (sorted by stem on return).
SizeStats summarize_sizes(std::vector<SizeEntry> entries);

/// Pairs image files of both directories by stem (extensions may differ).
/// Throws DataError when a stem has no counterpart or appears twice in a directory.
SizeStats compute_size_stats(const std::filesystem::path& baseline_dir,
                             const std::filesystem::path& variant_dir);

}  // namespace acqbench
