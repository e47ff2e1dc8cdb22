// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "layoutprior/types.hpp"

namespace layoutprior {

/// A collection of layouts over one vocabulary. `source` records where the
/// corpus came from and takes no part in equality.
struct Corpus {
  ClassVocabulary vocabulary;
  std::vector<LayoutDocument> layouts;
  std::string source;

  explicit Corpus(ClassVocabulary vocab, std::vector<LayoutDocument> docs = {},
                  std::string src = {})
      : vocabulary(std::move(vocab)), layouts(std::move(docs)), source(std::move(src)) {}

  /// Checks unique ids, class ids in range, positive canvases and in-canvas boxes.
  void validate() const;
  const LayoutDocument* find(std::string_view id) const;
  std::size_t component_count() const;

  bool operator==(const Corpus& other) const {
    return vocabulary == other.vocabulary && layouts == other.layouts;
  }
};

// Native corpus JSON:
// {"classes": [...], "layouts": [{"id", "width", "height",
//   "components": [{"bbox": [x1,y1,x2,y2], "class": name, "score"?}]}]}
Corpus corpus_from_native_json(const nlohmann::json& j, std::string source = {});
nlohmann::json corpus_to_native_json(const Corpus& corpus);
Corpus load_native(const std::filesystem::path& path);
void save_native(const Corpus& corpus, const std::filesystem::path& path);

/// COCO-style detection JSON. `images` are read from the first file,
/// `annotations`/`categories` from the second (either may hold all three, and
/// both arguments may name the same file). An annotations file that is a
/// bare array is treated as a detection-results list.
Corpus load_coco(const std::filesystem::path& images_path,
                 const std::filesystem::path& annotations_path);
Corpus corpus_from_coco_json(const nlohmann::json& images_doc,
                             const nlohmann::json& annotations_doc, std::string source = {});

/// Layouts whose id is listed (in corpus order) and the rest.
std::pair<Corpus, Corpus> split_by_ids(const Corpus& corpus, std::span<const std::string> ids);
/// Seeded shuffle split; the first corpus receives round(fraction * n) layouts.
std::pair<Corpus, Corpus> random_split(const Corpus& corpus, double fraction, std::uint64_t seed);

}  // namespace layoutprior
