// SPDX-License-Identifier: Apache-2.0
#include "layoutprior/types.hpp"

#include <cmath>

#include "json_util.hpp"
#include "layoutprior/error.hpp"
#include "layoutprior/file_io.hpp"

namespace layoutprior {

ClassVocabulary::ClassVocabulary(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) throw ValidationError("class vocabulary must not be empty");
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i].empty()) throw ValidationError("class name " + std::to_string(i) + " is empty");
    if (!index_.emplace(names_[i], i).second) {
      throw ValidationError("duplicate class name '" + names_[i] + "'");
    }
  }
}

std::optional<std::size_t> ClassVocabulary::index_of(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const ClassVocabulary& rico_vocabulary() {
  static const ClassVocabulary vocab({
      "Advertisement", "Background Image", "Bottom Navigation", "Button Bar", "Card",
      "Checkbox", "Date Picker", "Drawer", "Icon", "Image", "Input", "List Item", "Map View",
      "Modal", "Multi-Tab", "Number Stepper", "On/Off Switch", "Pager Indicator",
      "Radio Button", "Slider", "Text", "Text Button", "Toolbar", "Video", "Web View",
  });
  return vocab;
}

void ProposalBatch::validate() const {
  if (!(layout_height > 0.0) || !std::isfinite(layout_height)) {
    throw ValidationError("proposals '" + layout_id + "': layout height must be positive");
  }
  if (logits.rows() != boxes.size()) {
    throw ShapeError("proposals '" + layout_id + "': logits " + logits.shape() + " vs " +
                     std::to_string(boxes.size()) + " boxes");
  }
  if (features && features->rows() != boxes.size()) {
    throw ShapeError("proposals '" + layout_id + "': features " + features->shape() + " vs " +
                     std::to_string(boxes.size()) + " boxes");
  }
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    if (!boxes[i].valid()) {
      throw ValidationError("proposals '" + layout_id + "': box " + std::to_string(i) +
                            " has x2<x1 or y2<y1");
    }
  }
}

nlohmann::json proposals_to_json(const ProposalBatch& batch) {
  nlohmann::json j;
  j["layout_id"] = batch.layout_id;
  j["height"] = batch.layout_height;
  j["boxes"] = nlohmann::json::array();
  for (const auto& b : batch.boxes) j["boxes"].push_back({b.x1, b.y1, b.x2, b.y2});
  j["logits"] = matrix_to_json(batch.logits);
  if (batch.features) j["features"] = matrix_to_json(*batch.features);
  return j;
}

ProposalBatch proposals_from_json(const nlohmann::json& j) {
  using namespace detail;
  ProposalBatch batch;
  batch.layout_id = j.contains("layout_id") ? as_string(j["layout_id"], "layout_id") : "";
  batch.layout_height = as_number(require(j, "height", "proposals"), "proposals.height");
  for (const auto& b : as_array(require(j, "boxes", "proposals"), "proposals.boxes")) {
    if (!b.is_array() || b.size() != 4) throw ParseError("proposals.boxes: expected [x1,y1,x2,y2]");
    batch.boxes.push_back(BBox{as_number(b[0], "box"), as_number(b[1], "box"),
                               as_number(b[2], "box"), as_number(b[3], "box")});
  }
  batch.logits = matrix_from_json(require(j, "logits", "proposals"), "proposals.logits");
  if (j.contains("features") && !j["features"].is_null()) {
    batch.features = matrix_from_json(j["features"], "proposals.features");
  }
  try {
    batch.validate();
  } catch (const ValidationError& e) {
    throw ParseError(e.what());
  }
  return batch;
}

ProposalBatch load_proposals(const std::filesystem::path& path) {
  return proposals_from_json(read_json_file(path));
}

void save_proposals(const ProposalBatch& batch, const std::filesystem::path& path) {
  write_json_file(path, proposals_to_json(batch));
}

}  // namespace layoutprior
