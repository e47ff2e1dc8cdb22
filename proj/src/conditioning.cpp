// SPDX-License-Identifier: Apache-2.0
#include "layoutprior/conditioning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "layoutprior/error.hpp"

namespace layoutprior {

void AssociationPolicy::validate() const {
  if (kind == Kind::Gaussian && !(sigma > 0.0 && std::isfinite(sigma))) {
    throw ValidationError("gaussian association needs sigma > 0");
  }
  if (kind == Kind::Gaussian && !std::isfinite(mu)) {
    throw ValidationError("gaussian association needs a finite mu");
  }
}

AssociationMatrix band_association(const ProposalBatch& proposals, const BandSet& bands,
                                   const AssociationPolicy& policy) {
  policy.validate();
  if (!(proposals.layout_height > 0.0)) {
    throw ValidationError("association: layout height must be positive");
  }
  if (bands.size() == 0) throw ValidationError("association: no bands");

  const std::size_t nb = bands.size();
  Matrix alpha(proposals.size(), nb);
  std::vector<double> delta(nb);
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const double yc = proposals.boxes[i].center_y() / proposals.layout_height;
    for (std::size_t j = 0; j < nb; ++j) delta[j] = yc - bands.centroids[j];
    auto row = alpha.row(i);

    switch (policy.kind) {
      case AssociationPolicy::Kind::Gaussian: {
        // Evaluated in the log domain: with a small sigma every density can
        // underflow to zero before normalization.
        const double log_prefactor =
            -0.5 * std::log(2.0 * std::numbers::pi * policy.sigma * policy.sigma);
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < nb; ++j) {
          const double z = (delta[j] - policy.mu) / policy.sigma;
          row[j] = log_prefactor - 0.5 * z * z;
          best = std::max(best, row[j]);
        }
        double sum = 0.0;
        for (double& v : row) {
          v = std::exp(v - best);
          sum += v;
        }
        for (double& v : row) v /= sum;
        break;
      }
      case AssociationPolicy::Kind::Single: {
        std::size_t nearest = 0;
        for (std::size_t j = 1; j < nb; ++j) {
          if (std::abs(delta[j]) < std::abs(delta[nearest])) nearest = j;
        }
        row[nearest] = 1.0;
        break;
      }
      case AssociationPolicy::Kind::Equal:
        std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(nb));
        break;
    }
  }
  return AssociationMatrix{std::move(alpha)};
}

Matrix soft_mapping(const Matrix& logits, MappingPolicy policy) {
  if (policy == MappingPolicy::Soft) return row_softmax(logits);
  Matrix out(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    auto in = logits.row(r);
    if (in.empty()) continue;
    const auto best = std::max_element(in.begin(), in.end()) - in.begin();
    out(r, static_cast<std::size_t>(best)) = 1.0;
  }
  return out;
}

NodeFeatures classifier_node_features(Matrix weights) {
  return NodeFeatures{std::move(weights), NodeFeatures::Kind::ClassifierWeights};
}

NodeFeatures proposal_node_features(const Matrix& features, const Matrix& mapping) {
  if (features.rows() != mapping.rows()) {
    throw ShapeError("proposal node features: features " + features.shape() + " vs mapping " +
                     mapping.shape() + " row counts differ");
  }
  Matrix p = matmul(transpose(mapping), features);
  for (std::size_t c = 0; c < mapping.cols(); ++c) {
    double mass = 0.0;
    for (std::size_t i = 0; i < mapping.rows(); ++i) mass += mapping(i, c);
    for (double& v : p.row(c)) v = mass > 0.0 ? v / mass : 0.0;
  }
  return NodeFeatures{std::move(p), NodeFeatures::Kind::ProposalDerived};
}

Matrix condition_features(const Matrix& mapping, const AssociationMatrix& alpha,
                          const CoOccurrenceGraphSet& graphs, const NodeFeatures& nodes,
                          const Matrix& embed) {
  const std::size_t c = graphs.vocabulary.size();
  const std::string edge_shape = std::to_string(c) + "x" + std::to_string(c);
  if (mapping.cols() != c) {
    throw ShapeError("condition: S (" + mapping.shape() + ") x E_j (" + edge_shape + ")");
  }
  if (nodes.matrix.rows() != c) {
    throw ShapeError("condition: E_j (" + edge_shape + ") x nodes (" + nodes.matrix.shape() + ")");
  }
  if (embed.rows() != nodes.matrix.cols()) {
    throw ShapeError("condition: nodes (" + nodes.matrix.shape() + ") x embed (" + embed.shape() +
                     ")");
  }
  if (alpha.proposals() != mapping.rows() || alpha.bands() != graphs.n_graphs()) {
    throw ShapeError("condition: alpha (" + alpha.alpha.shape() + ") vs S (" + mapping.shape() +
                     ") and " + std::to_string(graphs.n_graphs()) + " graphs");
  }

  const Matrix node_embed = matmul(nodes.matrix, embed);  // C x D'
  Matrix out(mapping.rows(), embed.cols());
  for (std::size_t j = 0; j < graphs.n_graphs(); ++j) {
    const Matrix& e = graphs.edges[j];
    if (e.rows() != c || e.cols() != c) {
      throw ShapeError("condition: E_" + std::to_string(j) + " is " + e.shape() + ", expected " +
                       edge_shape);
    }
    const Matrix band = matmul(mapping, matmul(e, node_embed));  // N_r x D'
    for (std::size_t i = 0; i < out.rows(); ++i) {
      const double w = alpha.alpha(i, j);
      auto dst = out.row(i);
      auto src = band.row(i);
      for (std::size_t d = 0; d < dst.size(); ++d) dst[d] += w * src[d];
    }
  }
  return out;
}

Matrix concat_features(const Matrix& features, const Matrix& conditioned) {
  return hconcat(features, conditioned);
}

Matrix condition_proposals(const ProposalBatch& proposals, const CoOccurrenceGraphSet& graphs,
                           const NodeFeatures& nodes, const Matrix& embed,
                           const ConditioningConfig& config, bool concat) {
  proposals.validate();
  if (embed.cols() != config.d_prime) {
    throw ShapeError("condition: embed (" + embed.shape() + ") does not produce D'=" +
                     std::to_string(config.d_prime));
  }
  const AssociationMatrix alpha = band_association(proposals, graphs.bands(), config.association);
  const Matrix mapping = soft_mapping(proposals.logits, config.mapping);
  Matrix conditioned = condition_features(mapping, alpha, graphs, nodes, embed);
  if (!concat) return conditioned;
  if (!proposals.features) {
    throw ShapeError("condition: concatenation requested but proposals carry no features");
  }
  return concat_features(*proposals.features, conditioned);
}

std::string to_string(AssociationPolicy::Kind kind) {
  switch (kind) {
    case AssociationPolicy::Kind::Gaussian: return "gauss";
    case AssociationPolicy::Kind::Single: return "single";
    case AssociationPolicy::Kind::Equal: return "equal";
  }
  return "?";
}

std::string to_string(MappingPolicy policy) {
  return policy == MappingPolicy::Soft ? "soft" : "hard";
}

}  // namespace layoutprior
