// SPDX-License-Identifier: Apache-2.0
//
// Conditioning of proposal features on the co-occurrence graphs.
//
// Each proposal i is tied to every band j by a weight alpha(i, j) computed from
// the vertical offset between the proposal center and the band centroid (in
// units of layout height). Class-level node features are propagated through
// every band graph, mapped back to proposals through their class distribution
// S, and mixed with the alpha weights:
//
//   F'[i] = sum_j alpha(i, j) * (S E_j N Z)[i]
//
// where N is the C x K node-feature matrix and Z the K x D' embedding.
#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "layoutprior/matrix.hpp"
#include "layoutprior/prior.hpp"
#include "layoutprior/types.hpp"

namespace layoutprior {

struct AssociationPolicy {
  enum class Kind { Gaussian, Single, Equal };

  Kind kind = Kind::Gaussian;
  double mu = 0.0;
  double sigma = 0.3;

  static AssociationPolicy gaussian(double mu = 0.0, double sigma = 0.3) {
    return {Kind::Gaussian, mu, sigma};
  }
  static AssociationPolicy single() { return {Kind::Single, 0.0, 0.3}; }
  static AssociationPolicy equal() { return {Kind::Equal, 0.0, 0.3}; }

  void validate() const;
};

enum class MappingPolicy { Soft, Hard };

/// N_r x N_g proposal-to-band weights; non-negative rows summing to one.
struct AssociationMatrix {
  Matrix alpha;

  std::size_t proposals() const { return alpha.rows(); }
  std::size_t bands() const { return alpha.cols(); }
};

AssociationMatrix band_association(const ProposalBatch& proposals, const BandSet& bands,
                                   const AssociationPolicy& policy);

/// Soft: row softmax of the logits. Hard: one-hot argmax, ties to the lower class.
Matrix soft_mapping(const Matrix& logits, MappingPolicy policy);

struct NodeFeatures {
  enum class Kind { ClassifierWeights, ProposalDerived };

  Matrix matrix;  // C x K
  Kind kind = Kind::ClassifierWeights;
};

/// Wraps classifier-head weights (C x (D+1), bias column included).
NodeFeatures classifier_node_features(Matrix weights);

/// Class-averaged proposal features: row c of S^T F divided by the mass of
/// column c of S; classes without mass get zero rows.
NodeFeatures proposal_node_features(const Matrix& features, const Matrix& mapping);

Matrix condition_features(const Matrix& mapping, const AssociationMatrix& alpha,
                          const CoOccurrenceGraphSet& graphs, const NodeFeatures& nodes,
                          const Matrix& embed);

/// [f | f'], original features first.
Matrix concat_features(const Matrix& features, const Matrix& conditioned);

struct ConditioningConfig {
  AssociationPolicy association = AssociationPolicy::gaussian();
  MappingPolicy mapping = MappingPolicy::Soft;
  std::size_t d_prime = 512;
};

/// Association, mapping and conditioning in one call, optionally concatenated
/// with the batch's own features. The embedding must be K x d_prime.
Matrix condition_proposals(const ProposalBatch& proposals, const CoOccurrenceGraphSet& graphs,
                           const NodeFeatures& nodes, const Matrix& embed,
                           const ConditioningConfig& config, bool concat = false);

std::string to_string(AssociationPolicy::Kind kind);
std::string to_string(MappingPolicy policy);

}  // namespace layoutprior
