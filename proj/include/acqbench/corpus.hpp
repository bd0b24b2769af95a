#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "acqbench/image_buffer.hpp"

namespace acqbench {

/// One logical corpus image: a single file, or five band files
/// <stem>_B/_G/_R/_RE/_NIR.png that are fused into a BGRNE buffer.
struct CorpusItem {
  std::string stem;
  std::vector<std::filesystem::path> files;  // one file, or the five bands in BGRNE order
  bool multispectral = false;

  std::uint64_t bytes_on_disk() const;
};

struct Corpus {
  std::filesystem::path root;
  std::vector<CorpusItem> items;  // sorted by stem

  /// Stable identity of the corpus contents (stems and file sizes).
  std::string fingerprint() const;
};

/// Band suffixes in fused plane order.
inline constexpr const char* kBandSuffixes[5] = {"_B", "_G", "_R", "_RE", "_NIR"};

/// Lists the images of a directory (non-recursive). Complete band groups become
/// multispectral items; everything else is a single-file item.
Corpus scan_corpus(const std::filesystem::path& dir);

/// Decodes one item (fusing band groups).
ImageBuffer load_corpus_item(const CorpusItem& item);
/// Decodes already-read file contents of an item.
ImageBuffer decode_corpus_item(const CorpusItem& item,
                               const std::vector<std::vector<std::uint8_t>>& file_bytes);

}  // namespace acqbench
