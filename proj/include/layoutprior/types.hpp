// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "layoutprior/geometry.hpp"
#include "layoutprior/matrix.hpp"

namespace layoutprior {

/// Ordered, unique, non-empty class names. The order is authoritative: every
/// C-sized matrix in the library indexes classes by it.
class ClassVocabulary {
 public:
  explicit ClassVocabulary(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t id) const { return names_.at(id); }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<std::size_t> index_of(std::string_view name) const;

  bool operator==(const ClassVocabulary& other) const { return names_ == other.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// The 25 semantic component classes of the RICO annotations.
const ClassVocabulary& rico_vocabulary();

struct Component {
  BBox bbox;
  std::size_t class_id = 0;
  std::optional<double> score;

  bool operator==(const Component&) const = default;
};

/// One annotated screen: ground truth or detections.
struct LayoutDocument {
  std::string id;
  double width = 0.0;
  double height = 0.0;
  std::vector<Component> components;

  bool operator==(const LayoutDocument&) const = default;
};

/// Region proposals (or detections) of one layout with their class logits and
/// optional appearance features.
struct ProposalBatch {
  std::string layout_id;
  double layout_height = 0.0;
  std::vector<BBox> boxes;
  Matrix logits;                   // N_r x C
  std::optional<Matrix> features;  // N_r x D

  std::size_t size() const { return boxes.size(); }

  /// Throws ShapeError / ValidationError when the invariants do not hold.
  void validate() const;

  bool operator==(const ProposalBatch&) const = default;
};

nlohmann::json proposals_to_json(const ProposalBatch& batch);
ProposalBatch proposals_from_json(const nlohmann::json& j);
ProposalBatch load_proposals(const std::filesystem::path& path);
void save_proposals(const ProposalBatch& batch, const std::filesystem::path& path);

}  // namespace layoutprior
