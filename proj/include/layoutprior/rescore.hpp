// SPDX-License-Identifier: Apache-2.0
//
// Training-free use of the co-occurrence prior: every detection's class
// distribution is blended with a prior propagated from the other detections
// that share its bands.
//
// For detection i and band j the context c_j is the alpha(k, j)-weighted mean
// of the distributions s_k of all other detections k != i (uniform when that
// weight mass is below epsilon). The prior is
//   q_i = normalize(sum_j alpha(i, j) * E_j c_j), floored at epsilon,
// and the output distribution is s'_i proportional to s_i^(1-lambda) * q_i^lambda.
// A detection with no context in any of its bands (alone in the layout) gets
// q_i = s_i, so it passes through unchanged whatever lambda is.
#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "layoutprior/conditioning.hpp"
#include "layoutprior/ingest.hpp"
#include "layoutprior/prior.hpp"

namespace layoutprior {

struct RescoreConfig {
  double lambda = 0.5;
  AssociationPolicy association = AssociationPolicy::gaussian();
  double epsilon = 1e-6;

  void validate() const;
};

/// Leave-one-out prior q (N x C, rows sum to one) for distributions s (N x C).
Matrix propagated_prior(const Matrix& distributions, const AssociationMatrix& alpha,
                        const CoOccurrenceGraphSet& graphs, double epsilon);

/// Row-wise geometric blend s^(1-lambda) * q^lambda, renormalized.
Matrix blend_distributions(const Matrix& distributions, const Matrix& prior, double lambda);

/// Logits whose softmax is the given distribution; zero probabilities map to
/// log(DBL_MIN) so the matrix stays finite.
Matrix logits_from_distributions(const Matrix& distributions);

/// Same boxes, new logits.
ProposalBatch rescore(const ProposalBatch& detections, const CoOccurrenceGraphSet& graphs,
                      const RescoreConfig& config);

/// Per-layout logits keyed by layout id: {"<id>": MTX-JSON, ...}.
using LogitsSidecar = std::map<std::string, Matrix>;

LogitsSidecar load_sidecar(const std::filesystem::path& path);
void save_sidecar(const LogitsSidecar& sidecar, const std::filesystem::path& path);

/// Fallback when a layout has no logits: the labeled class gets its score
/// (1 when absent) and the remaining mass is spread uniformly.
Matrix logits_from_labels(const LayoutDocument& layout, std::size_t n_classes);

struct RescoredCorpus {
  Corpus corpus;  // class := argmax, score := max of the re-scored distribution
  LogitsSidecar logits;
};

RescoredCorpus rescore_corpus(const Corpus& detections, const CoOccurrenceGraphSet& graphs,
                              const RescoreConfig& config, const LogitsSidecar* sidecar = nullptr);

}  // namespace layoutprior
