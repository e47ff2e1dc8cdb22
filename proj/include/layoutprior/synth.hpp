// SPDX-License-Identifier: Apache-2.0
//
// Synthetic layouts drawn from planted per-band compatibility graphs.
//
// For every layout and every band j, k components are placed (k uniform in
// boxes_per_band). The first class is drawn from the band marginal, each
// further class with weight sum_{m in placed} planted_j[c, m]. Centers are
// uniform inside the band, sizes uniform inside the configured ranges and
// shrunk symmetrically to stay on the canvas. The noisy copy resamples each
// label uniformly over all classes with probability `noise`.
//
// Layout l draws from Rng(derive_seed(seed, l, 0)) for geometry and labels and
// from Rng(derive_seed(seed, l, 1)) for label noise.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include <json.hpp>

#include "layoutprior/ingest.hpp"
#include "layoutprior/matrix.hpp"
#include "layoutprior/prior.hpp"

namespace layoutprior {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct GeneratorSpec {
  ClassVocabulary vocabulary;
  std::vector<Matrix> planted_graphs;                // per band, C x C, symmetric, unit diagonal
  std::vector<std::vector<double>> class_marginals;  // per band, sums to 1
  std::size_t boxes_min = 1;
  std::size_t boxes_max = 3;
  double canvas_width = 1440.0;
  double canvas_height = 2560.0;
  Range box_width{100.0, 600.0};
  Range box_height{40.0, 160.0};
  double noise = 0.0;
  std::uint64_t seed = 0;

  std::size_t n_bands() const { return planted_graphs.size(); }
  /// The bands generated boxes are placed in: disjoint, one per planted graph.
  BandConfig band_config() const { return BandConfig::non_overlapping(n_bands()); }
  void validate() const;
};

struct GeneratedCorpora {
  Corpus clean;
  Corpus noisy;
};

GeneratedCorpora generate(const GeneratorSpec& spec, std::size_t n_layouts);

/// Copy of a noisy corpus with every score set to the posterior of the
/// observed label under uniform label noise: (1 - noise) + noise / C.
Corpus as_detections(const Corpus& noisy, double noise);

/// Planted graphs as a graph set (for comparison with a recovered prior).
CoOccurrenceGraphSet planted_graph_set(const GeneratorSpec& spec);

/// Mean over bands of the cosine similarity of off-diagonal entries; bands
/// where either side is all-zero are skipped; -1 when every band is skipped.
double recovery_score(const CoOccurrenceGraphSet& planted, const CoOccurrenceGraphSet& recovered);

/// Two bands over six classes: a top band favouring {0,1,2} and a bottom band
/// favouring {3,4,5}, seed 42.
GeneratorSpec two_band_reference_spec();

nlohmann::json spec_to_json(const GeneratorSpec& spec);
GeneratorSpec spec_from_json(const nlohmann::json& j);
GeneratorSpec load_generator_spec(const std::filesystem::path& path);
void save_generator_spec(const GeneratorSpec& spec, const std::filesystem::path& path);

}  // namespace layoutprior
