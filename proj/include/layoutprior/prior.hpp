// SPDX-License-Identifier: Apache-2.0
//
// Band-partitioned class co-occurrence graphs.
//
// A layout is cut into N_b horizontal bands in normalized height units. Band j
// spans [j/N_b, j/N_b + w_b), clipped to the canvas bottom; a band that reaches
// the bottom is closed there so a center at exactly y == H is still counted.
// For every layout, bands holding fewer than two components are dropped, and
// every ordered pair (i, k) of components sharing a surviving band j adds one
// to E_j[class(i), class(k)] (i == k included). Each E_j is then divided
// entry-wise by sqrt(row sum * column sum) and its diagonal set to 1.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "layoutprior/ingest.hpp"
#include "layoutprior/matrix.hpp"
#include "layoutprior/types.hpp"

namespace layoutprior {

inline constexpr int kGraphSchemaVersion = 1;

struct BandConfig {
  std::size_t n_bands = 10;
  double band_width_frac = 0.1;  // as a fraction of layout height

  /// Disjoint bands tiling the canvas: width 1/n.
  static BandConfig non_overlapping(std::size_t n) {
    return BandConfig{n, 1.0 / static_cast<double>(n)};
  }

  void validate() const;
  bool operator==(const BandConfig&) const = default;
};

/// Band bounds in normalized height units, ascending by upper bound.
struct BandSet {
  std::vector<double> upper;
  std::vector<double> lower;
  std::vector<double> centroids;

  std::size_t size() const { return upper.size(); }
  /// Membership of a normalized center y (clamped into [0,1]).
  bool contains(std::size_t band, double y) const;
};

BandSet make_bands(const BandConfig& config);

/// N components x N_b bands, 0/1.
class MembershipMatrix {
 public:
  MembershipMatrix(std::size_t boxes, std::size_t bands)
      : boxes_(boxes), bands_(bands), bits_(boxes * bands, 0) {}

  std::size_t boxes() const { return boxes_; }
  std::size_t bands() const { return bands_; }
  bool operator()(std::size_t i, std::size_t j) const { return bits_[i * bands_ + j] != 0; }
  void set(std::size_t i, std::size_t j) { bits_[i * bands_ + j] = 1; }
  std::size_t band_population(std::size_t j) const;
  std::size_t bands_of(std::size_t i) const;

 private:
  std::size_t boxes_;
  std::size_t bands_;
  std::vector<std::uint8_t> bits_;
};

MembershipMatrix band_membership(const LayoutDocument& layout, const BandConfig& config);

/// Square matrix of exact co-occurrence counts.
class CountMatrix {
 public:
  CountMatrix() = default;
  explicit CountMatrix(std::size_t n) : n_(n), data_(n * n, 0) {}

  std::size_t size() const { return n_; }
  std::uint64_t operator()(std::size_t r, std::size_t c) const { return data_[r * n_ + c]; }
  std::uint64_t& operator()(std::size_t r, std::size_t c) { return data_[r * n_ + c]; }
  const std::vector<std::uint64_t>& data() const { return data_; }
  CountMatrix& operator+=(const CountMatrix& other);

  bool operator==(const CountMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> data_;
};

using RawCounts = std::vector<CountMatrix>;

/// Raw per-band counts. With threads > 1 layouts are split into contiguous
/// chunks whose private counts are summed afterwards; integer addition makes
/// the result identical to the sequential pass.
RawCounts accumulate(const Corpus& corpus, const BandConfig& config, unsigned threads = 1);

/// Row-column normalization of one count matrix with 0/0 := 0 and unit diagonal.
Matrix normalize_counts(const CountMatrix& counts);

struct CoOccurrenceGraphSet {
  ClassVocabulary vocabulary;
  BandConfig band_config;
  std::vector<Matrix> edges;  // one C x C matrix per band
  std::optional<RawCounts> raw_counts;

  std::size_t n_graphs() const { return edges.size(); }
  BandSet bands() const { return make_bands(band_config); }
  /// Symmetric within tol, exact unit diagonal, entries in [0,1], shapes agree.
  void validate(double tol = 1e-9) const;

  bool operator==(const CoOccurrenceGraphSet&) const = default;
};

CoOccurrenceGraphSet normalize(const RawCounts& raw, const ClassVocabulary& vocabulary,
                               const BandConfig& config, bool keep_raw = true);

struct BuildOptions {
  bool keep_raw = true;
  unsigned threads = 1;
};

CoOccurrenceGraphSet build_prior(const Corpus& corpus, const BandConfig& config,
                                 const BuildOptions& options = {});

nlohmann::json graphs_to_json(const CoOccurrenceGraphSet& graphs);
CoOccurrenceGraphSet graphs_from_json(const nlohmann::json& j);
void save_graphs(const CoOccurrenceGraphSet& graphs, const std::filesystem::path& path);
CoOccurrenceGraphSet load_graphs(const std::filesystem::path& path);

/// Number of class pairs m < n whose edge weight exceeds threshold.
std::size_t edge_count(const Matrix& edges, double threshold = 0.0);

/// Graphviz export: one cluster per band, undirected edges above threshold.
std::string graphs_to_dot(const CoOccurrenceGraphSet& graphs, double threshold);

}  // namespace layoutprior
