// SPDX-License-Identifier: Apache-2.0
#include "layoutprior/rescore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "layoutprior/error.hpp"
#include "layoutprior/file_io.hpp"

namespace layoutprior {

void RescoreConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValidationError("rescore: lambda must lie in [0,1]");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("rescore: epsilon must lie in (0,1)");
  association.validate();
}

Matrix propagated_prior(const Matrix& distributions, const AssociationMatrix& alpha,
                        const CoOccurrenceGraphSet& graphs, double epsilon) {
  const std::size_t n = distributions.rows();
  const std::size_t c = distributions.cols();
  if (c != graphs.vocabulary.size()) {
    throw ShapeError("rescore: distributions " + distributions.shape() + " vs " +
                     std::to_string(graphs.vocabulary.size()) + "-class graphs");
  }
  if (alpha.proposals() != n || alpha.bands() != graphs.n_graphs()) {
    throw ShapeError("rescore: alpha " + alpha.alpha.shape() + " vs " + std::to_string(n) +
                     " detections and " + std::to_string(graphs.n_graphs()) + " graphs");
  }

  Matrix prior(n, c);
  std::vector<double> context(c);
  for (std::size_t i = 0; i < n; ++i) {
    auto q = prior.row(i);
    bool informed = false;
    for (std::size_t j = 0; j < graphs.n_graphs(); ++j) {
      const double weight = alpha.alpha(i, j);
      if (weight == 0.0) continue;

      std::fill(context.begin(), context.end(), 0.0);
      double mass = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i) continue;
        const double a = alpha.alpha(k, j);
        mass += a;
        auto s = distributions.row(k);
        for (std::size_t m = 0; m < c; ++m) context[m] += a * s[m];
      }
      informed = informed || mass >= epsilon;
      if (mass < epsilon) {
        std::fill(context.begin(), context.end(), 1.0 / static_cast<double>(c));
      } else {
        for (double& v : context) v /= mass;
      }

      const Matrix& e = graphs.edges[j];
      for (std::size_t m = 0; m < c; ++m) {
        double acc = 0.0;
        for (std::size_t k = 0; k < c; ++k) acc += e(m, k) * context[k];
        q[m] += weight * acc;
      }
    }
    if (!informed) {
      std::copy(distributions.row(i).begin(), distributions.row(i).end(), q.begin());
      continue;
    }
    double total = 0.0;
    for (double v : q) total += v;
    for (double& v : q) v /= total;
    total = 0.0;
    for (double& v : q) {
      v = std::max(v, epsilon);
      total += v;
    }
    for (double& v : q) v /= total;
  }
  return prior;
}

Matrix blend_distributions(const Matrix& distributions, const Matrix& prior, double lambda) {
  if (distributions.rows() != prior.rows() || distributions.cols() != prior.cols()) {
    throw ShapeError("blend: " + distributions.shape() + " vs " + prior.shape());
  }
  Matrix out(distributions.rows(), distributions.cols());
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto dst = out.row(i);
    double total = 0.0;
    for (std::size_t m = 0; m < dst.size(); ++m) {
      dst[m] = std::pow(distributions(i, m), 1.0 - lambda) * std::pow(prior(i, m), lambda);
      total += dst[m];
    }
    for (double& v : dst) v /= total;
  }
  return out;
}

Matrix logits_from_distributions(const Matrix& distributions) {
  Matrix out(distributions.rows(), distributions.cols());
  for (std::size_t i = 0; i < out.rows(); ++i) {
    for (std::size_t m = 0; m < out.cols(); ++m) {
      out(i, m) = std::log(std::max(distributions(i, m), std::numeric_limits<double>::min()));
    }
  }
  return out;
}

ProposalBatch rescore(const ProposalBatch& detections, const CoOccurrenceGraphSet& graphs,
                      const RescoreConfig& config) {
  config.validate();
  detections.validate();
  if (detections.logits.cols() != graphs.vocabulary.size()) {
    throw ShapeError("rescore: logits have " + std::to_string(detections.logits.cols()) +
                     " classes, graphs have " + std::to_string(graphs.vocabulary.size()));
  }
  const Matrix s = row_softmax(detections.logits);
  const AssociationMatrix alpha = band_association(detections, graphs.bands(), config.association);
  const Matrix q = propagated_prior(s, alpha, graphs, config.epsilon);
  ProposalBatch out = detections;
  out.logits = logits_from_distributions(blend_distributions(s, q, config.lambda));
  return out;
}

LogitsSidecar load_sidecar(const std::filesystem::path& path) {
  const auto j = read_json_file(path);
  if (!j.is_object()) throw ParseError(path.string() + ": logits sidecar must be a JSON object");
  LogitsSidecar out;
  for (const auto& [id, m] : j.items()) out.emplace(id, matrix_from_json(m, "logits '" + id + "'"));
  return out;
}

void save_sidecar(const LogitsSidecar& sidecar, const std::filesystem::path& path) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [id, m] : sidecar) j[id] = matrix_to_json(m);
  write_json_file(path, j);
}

Matrix logits_from_labels(const LayoutDocument& layout, std::size_t n_classes) {
  Matrix probs(layout.components.size(), n_classes);
  for (std::size_t i = 0; i < layout.components.size(); ++i) {
    const auto& c = layout.components[i];
    if (c.class_id >= n_classes) throw ValidationError("layout '" + layout.id + "': class id out of range");
    const double p = n_classes == 1 ? 1.0 : c.score.value_or(1.0);
    const double rest = n_classes == 1 ? 0.0 : (1.0 - p) / static_cast<double>(n_classes - 1);
    for (std::size_t m = 0; m < n_classes; ++m) probs(i, m) = m == c.class_id ? p : rest;
  }
  return logits_from_distributions(probs);
}

RescoredCorpus rescore_corpus(const Corpus& detections, const CoOccurrenceGraphSet& graphs,
                              const RescoreConfig& config, const LogitsSidecar* sidecar) {
  config.validate();
  if (!(detections.vocabulary == graphs.vocabulary)) {
    throw ShapeError("rescore: detection and graph vocabularies differ");
  }
  const std::size_t c = graphs.vocabulary.size();
  RescoredCorpus out{Corpus(detections.vocabulary, {}, detections.source), {}};
  for (const auto& layout : detections.layouts) {
    ProposalBatch batch;
    batch.layout_id = layout.id;
    batch.layout_height = layout.height;
    for (const auto& comp : layout.components) batch.boxes.push_back(comp.bbox);

    const Matrix* given = nullptr;
    if (sidecar) {
      auto it = sidecar->find(layout.id);
      if (it != sidecar->end()) given = &it->second;
    }
    if (given) {
      if (given->rows() != layout.components.size() || given->cols() != c) {
        throw ShapeError("rescore: logits for '" + layout.id + "' are " + given->shape() +
                         ", expected " + std::to_string(layout.components.size()) + "x" +
                         std::to_string(c));
      }
      batch.logits = *given;
    } else {
      batch.logits = logits_from_labels(layout, c);
    }

    const ProposalBatch rescored = rescore(batch, graphs, config);
    const Matrix probs = row_softmax(rescored.logits);
    LayoutDocument doc = layout;
    for (std::size_t i = 0; i < doc.components.size(); ++i) {
      auto row = probs.row(i);
      auto best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
      // a tie with the incoming label keeps it
      const std::size_t original = doc.components[i].class_id;
      if (original < c && row[original] == row[best]) best = original;
      doc.components[i].class_id = best;
      doc.components[i].score = std::clamp(row[best], 0.0, 1.0);
    }
    out.corpus.layouts.push_back(std::move(doc));
    out.logits.emplace(layout.id, rescored.logits);
  }
  return out;
}

}  // namespace layoutprior
