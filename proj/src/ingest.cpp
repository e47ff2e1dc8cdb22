// SPDX-License-Identifier: Apache-2.0
#include "layoutprior/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "json_util.hpp"
#include "layoutprior/error.hpp"
#include "layoutprior/file_io.hpp"
#include "layoutprior/rng.hpp"

namespace layoutprior {

using detail::as_array;
using detail::as_number;
using detail::as_string;
using detail::require;

namespace {

void check_canvas(const std::string& id, double width, double height) {
  if (!(width > 0.0) || !(height > 0.0) || !std::isfinite(width) || !std::isfinite(height)) {
    throw ParseError("layout '" + id + "': width and height must be positive");
  }
}

std::optional<double> parse_score(const nlohmann::json& c, const std::string& ctx) {
  auto it = c.find("score");
  if (it == c.end() || it->is_null()) return std::nullopt;
  const double s = as_number(*it, ctx + ".score");
  if (!(s >= 0.0 && s <= 1.0)) throw ParseError(ctx + ": score " + std::to_string(s) + " outside [0,1]");
  return s;
}

void check_unique_ids(const std::vector<LayoutDocument>& layouts) {
  std::unordered_set<std::string> seen;
  for (const auto& doc : layouts) {
    if (!seen.insert(doc.id).second) throw ParseError("duplicate layout id '" + doc.id + "'");
  }
}

}  // namespace

void Corpus::validate() const {
  std::unordered_set<std::string> seen;
  for (const auto& doc : layouts) {
    if (!seen.insert(doc.id).second) throw ValidationError("duplicate layout id '" + doc.id + "'");
    if (!(doc.width > 0.0) || !(doc.height > 0.0)) {
      throw ValidationError("layout '" + doc.id + "': non-positive canvas");
    }
    for (const auto& c : doc.components) {
      if (c.class_id >= vocabulary.size()) {
        throw ValidationError("layout '" + doc.id + "': class id " + std::to_string(c.class_id) +
                              " out of range");
      }
      const auto& b = c.bbox;
      if (!b.valid() || b.x1 < 0.0 || b.y1 < 0.0 || b.x2 > doc.width || b.y2 > doc.height) {
        throw ValidationError("layout '" + doc.id + "': box outside canvas");
      }
    }
  }
}

const LayoutDocument* Corpus::find(std::string_view id) const {
  for (const auto& doc : layouts) {
    if (doc.id == id) return &doc;
  }
  return nullptr;
}

std::size_t Corpus::component_count() const {
  std::size_t n = 0;
  for (const auto& doc : layouts) n += doc.components.size();
  return n;
}

Corpus corpus_from_native_json(const nlohmann::json& j, std::string source) {
  std::vector<std::string> names;
  for (const auto& n : as_array(require(j, "classes", "corpus"), "corpus.classes")) {
    names.push_back(as_string(n, "corpus.classes"));
  }
  ClassVocabulary vocab = [&] {
    try {
      return ClassVocabulary(std::move(names));
    } catch (const ValidationError& e) {
      throw ParseError(std::string("corpus.classes: ") + e.what());
    }
  }();

  std::vector<LayoutDocument> layouts;
  for (const auto& l : as_array(require(j, "layouts", "corpus"), "corpus.layouts")) {
    LayoutDocument doc;
    doc.id = as_string(require(l, "id", "layout"), "layout.id");
    const std::string ctx = "layout '" + doc.id + "'";
    doc.width = as_number(require(l, "width", ctx), ctx + ".width");
    doc.height = as_number(require(l, "height", ctx), ctx + ".height");
    check_canvas(doc.id, doc.width, doc.height);
    for (const auto& c : as_array(require(l, "components", ctx), ctx + ".components")) {
      const auto& bb = require(c, "bbox", ctx);
      if (!bb.is_array() || bb.size() != 4) throw ParseError(ctx + ": bbox must be [x1,y1,x2,y2]");
      BBox box{as_number(bb[0], ctx), as_number(bb[1], ctx), as_number(bb[2], ctx),
               as_number(bb[3], ctx)};
      if (!box.valid()) throw ParseError(ctx + ": malformed box (x2<x1 or y2<y1)");
      const std::string cls = as_string(require(c, "class", ctx), ctx + ".class");
      auto id = vocab.index_of(cls);
      if (!id) throw ParseError(ctx + ": unknown class '" + cls + "'");
      doc.components.push_back(
          Component{clamp_to_canvas(box, doc.width, doc.height), *id, parse_score(c, ctx)});
    }
    layouts.push_back(std::move(doc));
  }
  check_unique_ids(layouts);
  return Corpus(std::move(vocab), std::move(layouts), std::move(source));
}

nlohmann::json corpus_to_native_json(const Corpus& corpus) {
  nlohmann::json j;
  j["classes"] = corpus.vocabulary.names();
  j["layouts"] = nlohmann::json::array();
  for (const auto& doc : corpus.layouts) {
    nlohmann::json l;
    l["id"] = doc.id;
    l["width"] = doc.width;
    l["height"] = doc.height;
    l["components"] = nlohmann::json::array();
    for (const auto& c : doc.components) {
      nlohmann::json cj;
      cj["bbox"] = {c.bbox.x1, c.bbox.y1, c.bbox.x2, c.bbox.y2};
      cj["class"] = corpus.vocabulary.name(c.class_id);
      if (c.score) cj["score"] = *c.score;
      l["components"].push_back(std::move(cj));
    }
    j["layouts"].push_back(std::move(l));
  }
  return j;
}

Corpus load_native(const std::filesystem::path& path) {
  return corpus_from_native_json(read_json_file(path), path.string());
}

void save_native(const Corpus& corpus, const std::filesystem::path& path) {
  write_json_file(path, corpus_to_native_json(corpus));
}

Corpus corpus_from_coco_json(const nlohmann::json& images_doc,
                             const nlohmann::json& annotations_doc, std::string source) {
  auto section = [&](std::string_view key) -> const nlohmann::json& {
    if (annotations_doc.is_object() && annotations_doc.contains(key)) return annotations_doc[key];
    if (images_doc.is_object() && images_doc.contains(key)) return images_doc[key];
    throw ParseError("coco: missing '" + std::string(key) + "' section");
  };

  std::map<long long, std::string> category_names;
  for (const auto& c : as_array(section("categories"), "coco.categories")) {
    const long long id = detail::as_integer(require(c, "id", "category"), "category.id");
    if (!category_names.emplace(id, as_string(require(c, "name", "category"), "category.name"))
             .second) {
      throw ParseError("coco: duplicate category id " + std::to_string(id));
    }
  }
  std::vector<std::string> names;
  std::unordered_map<long long, std::size_t> class_of_category;
  for (const auto& [id, name] : category_names) {
    class_of_category[id] = names.size();
    names.push_back(name);
  }
  ClassVocabulary vocab = [&] {
    try {
      return ClassVocabulary(std::move(names));
    } catch (const ValidationError& e) {
      throw ParseError(std::string("coco.categories: ") + e.what());
    }
  }();

  const nlohmann::json& images =
      images_doc.is_object() && images_doc.contains("images") ? images_doc["images"]
                                                              : section("images");
  std::vector<LayoutDocument> layouts;
  std::unordered_map<long long, std::size_t> layout_of_image;
  for (const auto& im : as_array(images, "coco.images")) {
    const long long id = detail::as_integer(require(im, "id", "image"), "image.id");
    LayoutDocument doc;
    doc.id = std::to_string(id);
    doc.width = as_number(require(im, "width", "image"), "image.width");
    doc.height = as_number(require(im, "height", "image"), "image.height");
    check_canvas(doc.id, doc.width, doc.height);
    if (!layout_of_image.emplace(id, layouts.size()).second) {
      throw ParseError("coco: duplicate image id " + std::to_string(id));
    }
    layouts.push_back(std::move(doc));
  }

  const nlohmann::json& annotations =
      annotations_doc.is_array() ? annotations_doc : section("annotations");
  for (const auto& a : as_array(annotations, "coco.annotations")) {
    const long long image_id =
        detail::as_integer(require(a, "image_id", "annotation"), "annotation.image_id");
    const long long category_id =
        detail::as_integer(require(a, "category_id", "annotation"), "annotation.category_id");
    auto li = layout_of_image.find(image_id);
    if (li == layout_of_image.end()) {
      throw ParseError("coco: annotation references unknown image_id " + std::to_string(image_id));
    }
    auto ci = class_of_category.find(category_id);
    if (ci == class_of_category.end()) {
      throw ParseError("coco: annotation references unknown category_id " +
                       std::to_string(category_id));
    }
    const auto& bb = require(a, "bbox", "annotation");
    if (!bb.is_array() || bb.size() != 4) throw ParseError("coco: bbox must be [x,y,w,h]");
    const double x = as_number(bb[0], "bbox"), y = as_number(bb[1], "bbox");
    const double w = as_number(bb[2], "bbox"), h = as_number(bb[3], "bbox");
    if (w < 0.0 || h < 0.0) throw ParseError("coco: negative bbox width or height");
    auto& doc = layouts[li->second];
    doc.components.push_back(Component{clamp_to_canvas(BBox{x, y, x + w, y + h}, doc.width,
                                                        doc.height),
                                       ci->second, parse_score(a, "coco.annotation")});
  }
  return Corpus(std::move(vocab), std::move(layouts), std::move(source));
}

Corpus load_coco(const std::filesystem::path& images_path,
                 const std::filesystem::path& annotations_path) {
  const auto images = read_json_file(images_path);
  const auto annotations =
      annotations_path == images_path ? images : read_json_file(annotations_path);
  return corpus_from_coco_json(images, annotations,
                               images_path.string() + "+" + annotations_path.string());
}

std::pair<Corpus, Corpus> split_by_ids(const Corpus& corpus, std::span<const std::string> ids) {
  std::unordered_set<std::string> wanted(ids.begin(), ids.end());
  Corpus in(corpus.vocabulary, {}, corpus.source);
  Corpus out(corpus.vocabulary, {}, corpus.source);
  for (const auto& doc : corpus.layouts) {
    (wanted.count(doc.id) ? in : out).layouts.push_back(doc);
  }
  return {std::move(in), std::move(out)};
}

std::pair<Corpus, Corpus> random_split(const Corpus& corpus, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw ValidationError("split fraction must lie in [0,1]");
  }
  const std::size_t n = corpus.layouts.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  const auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < take; ++i) ids.push_back(corpus.layouts[order[i]].id);
  return split_by_ids(corpus, ids);
}

}  // namespace layoutprior
