// SPDX-License-Identifier: Apache-2.0
#include "layoutprior/prior.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "json_util.hpp"
#include "layoutprior/error.hpp"
#include "layoutprior/file_io.hpp"

namespace layoutprior {

void BandConfig::validate() const {
  if (n_bands < 1) throw ValidationError("band config: n_bands must be >= 1");
  if (!(band_width_frac > 0.0 && band_width_frac <= 1.0)) {
    throw ValidationError("band config: band width fraction must lie in (0, 1]");
  }
}

BandSet make_bands(const BandConfig& config) {
  config.validate();
  const auto n = static_cast<double>(config.n_bands);
  // Band width in units of the band stride. Snapping the tiling case to exactly
  // one stride makes lower_j and upper_{j+1} the same double.
  double span = config.band_width_frac * n;
  if (std::abs(span - 1.0) <= 1e-9) span = 1.0;

  BandSet set;
  for (std::size_t j = 0; j < config.n_bands; ++j) {
    const auto jd = static_cast<double>(j);
    const double upper = jd / n;
    const double lower = std::min((jd + span) / n, 1.0);
    set.upper.push_back(upper);
    set.lower.push_back(lower);
    set.centroids.push_back((upper + lower) / 2.0);
  }
  return set;
}

bool BandSet::contains(std::size_t band, double y) const {
  y = std::clamp(y, 0.0, 1.0);
  if (y < upper[band]) return false;
  return y < lower[band] || lower[band] >= 1.0;
}

std::size_t MembershipMatrix::band_population(std::size_t j) const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < boxes_; ++i) n += (*this)(i, j) ? 1 : 0;
  return n;
}

std::size_t MembershipMatrix::bands_of(std::size_t i) const {
  std::size_t n = 0;
  for (std::size_t j = 0; j < bands_; ++j) n += (*this)(i, j) ? 1 : 0;
  return n;
}

MembershipMatrix band_membership(const LayoutDocument& layout, const BandConfig& config) {
  if (!(layout.height > 0.0)) {
    throw ValidationError("layout '" + layout.id + "': height must be positive");
  }
  const BandSet bands = make_bands(config);
  MembershipMatrix m(layout.components.size(), bands.size());
  for (std::size_t i = 0; i < layout.components.size(); ++i) {
    const double y = layout.components[i].bbox.center_y() / layout.height;
    for (std::size_t j = 0; j < bands.size(); ++j) {
      if (bands.contains(j, y)) m.set(i, j);
    }
  }
  return m;
}

CountMatrix& CountMatrix::operator+=(const CountMatrix& other) {
  if (other.n_ != n_) throw ShapeError("count matrix size mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

namespace {

void accumulate_layout(const LayoutDocument& layout, const BandConfig& config, std::size_t n_classes,
                       RawCounts& counts) {
  for (const auto& c : layout.components) {
    if (c.class_id >= n_classes) {
      throw ValidationError("layout '" + layout.id + "': class id " + std::to_string(c.class_id) +
                            " out of range for " + std::to_string(n_classes) + " classes");
    }
  }
  const MembershipMatrix m = band_membership(layout, config);
  std::vector<std::size_t> members;
  for (std::size_t j = 0; j < m.bands(); ++j) {
    members.clear();
    for (std::size_t i = 0; i < m.boxes(); ++i) {
      if (m(i, j)) members.push_back(i);
    }
    if (members.size() < 2) continue;
    CountMatrix& e = counts[j];
    for (std::size_t i : members) {
      const std::size_t li = layout.components[i].class_id;
      for (std::size_t k : members) ++e(li, layout.components[k].class_id);
    }
  }
}

RawCounts zero_counts(std::size_t bands, std::size_t classes) {
  return RawCounts(bands, CountMatrix(classes));
}

}  // namespace

RawCounts accumulate(const Corpus& corpus, const BandConfig& config, unsigned threads) {
  config.validate();
  const std::size_t n_classes = corpus.vocabulary.size();
  const std::size_t n_layouts = corpus.layouts.size();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n_layouts, 1))));

  if (threads == 1) {
    RawCounts counts = zero_counts(config.n_bands, n_classes);
    for (const auto& layout : corpus.layouts) accumulate_layout(layout, config, n_classes, counts);
    return counts;
  }

  std::vector<RawCounts> partial(threads, zero_counts(config.n_bands, n_classes));
  std::vector<std::exception_ptr> failures(threads);
  {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n_layouts + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          const std::size_t begin = t * chunk;
          const std::size_t end = std::min(n_layouts, begin + chunk);
          for (std::size_t i = begin; i < end; ++i) {
            accumulate_layout(corpus.layouts[i], config, n_classes, partial[t]);
          }
        } catch (...) {
          failures[t] = std::current_exception();
        }
      });
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  RawCounts counts = zero_counts(config.n_bands, n_classes);
  for (const auto& p : partial) {
    for (std::size_t j = 0; j < counts.size(); ++j) counts[j] += p[j];
  }
  return counts;
}

Matrix normalize_counts(const CountMatrix& counts) {
  const std::size_t n = counts.size();
  std::vector<double> row_sum(n, 0.0), col_sum(n, 0.0);
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t k = 0; k < n; ++k) {
      row_sum[m] += static_cast<double>(counts(m, k));
      col_sum[k] += static_cast<double>(counts(m, k));
    }
  }
  Matrix out(n, n);
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t k = 0; k < n; ++k) {
      const auto e = static_cast<double>(counts(m, k));
      if (e != 0.0) out(m, k) = e / std::sqrt(row_sum[m] * col_sum[k]);
    }
    out(m, m) = 1.0;
  }
  return out;
}

CoOccurrenceGraphSet normalize(const RawCounts& raw, const ClassVocabulary& vocabulary,
                               const BandConfig& config, bool keep_raw) {
  config.validate();
  if (raw.size() != config.n_bands) {
    throw ShapeError("normalize: " + std::to_string(raw.size()) + " count matrices for " +
                     std::to_string(config.n_bands) + " bands");
  }
  CoOccurrenceGraphSet g{vocabulary, config, {}, std::nullopt};
  for (const auto& counts : raw) {
    if (counts.size() != vocabulary.size()) {
      throw ShapeError("normalize: count matrix is " + std::to_string(counts.size()) +
                       "-square, vocabulary has " + std::to_string(vocabulary.size()) + " classes");
    }
    g.edges.push_back(normalize_counts(counts));
  }
  if (keep_raw) g.raw_counts = raw;
  return g;
}

CoOccurrenceGraphSet build_prior(const Corpus& corpus, const BandConfig& config,
                                 const BuildOptions& options) {
  return normalize(accumulate(corpus, config, options.threads), corpus.vocabulary, config,
                   options.keep_raw);
}

void CoOccurrenceGraphSet::validate(double tol) const {
  band_config.validate();
  const std::size_t c = vocabulary.size();
  if (edges.size() != band_config.n_bands) {
    throw ValidationError("graph set: " + std::to_string(edges.size()) + " graphs for " +
                          std::to_string(band_config.n_bands) + " bands");
  }
  for (std::size_t j = 0; j < edges.size(); ++j) {
    const Matrix& e = edges[j];
    const std::string ctx = "graph " + std::to_string(j);
    if (e.rows() != c || e.cols() != c) {
      throw ShapeError(ctx + ": shape " + e.shape() + ", expected " + std::to_string(c) + "x" +
                       std::to_string(c));
    }
    for (std::size_t m = 0; m < c; ++m) {
      if (e(m, m) != 1.0) throw ValidationError(ctx + ": diagonal entry is not 1");
      for (std::size_t n = 0; n < c; ++n) {
        if (!(e(m, n) >= 0.0 && e(m, n) <= 1.0)) {
          throw ValidationError(ctx + ": entry outside [0,1]");
        }
        if (std::abs(e(m, n) - e(n, m)) > tol) throw ValidationError(ctx + ": not symmetric");
      }
    }
  }
  if (raw_counts) {
    if (raw_counts->size() != edges.size()) {
      throw ValidationError("graph set: raw count matrices do not match graph count");
    }
    for (const auto& counts : *raw_counts) {
      if (counts.size() != c) throw ShapeError("graph set: raw count matrix has wrong size");
    }
  }
}

nlohmann::json graphs_to_json(const CoOccurrenceGraphSet& graphs) {
  nlohmann::json j;
  j["version"] = kGraphSchemaVersion;
  j["classes"] = graphs.vocabulary.names();
  j["n_bands"] = graphs.band_config.n_bands;
  j["band_width_frac"] = graphs.band_config.band_width_frac;
  j["edges"] = nlohmann::json::array();
  for (const auto& e : graphs.edges) j["edges"].push_back(matrix_to_json(e));
  if (graphs.raw_counts) {
    j["raw_counts"] = nlohmann::json::array();
    for (const auto& counts : *graphs.raw_counts) {
      j["raw_counts"].push_back(
          {{"rows", counts.size()}, {"cols", counts.size()}, {"data", counts.data()}});
    }
  }
  return j;
}

CoOccurrenceGraphSet graphs_from_json(const nlohmann::json& j) {
  using namespace detail;
  const long long version = as_integer(require(j, "version", "graphs"), "graphs.version");
  if (version != kGraphSchemaVersion) {
    throw ParseError("graphs: unsupported schema version " + std::to_string(version) +
                     " (expected " + std::to_string(kGraphSchemaVersion) + ")");
  }
  std::vector<std::string> names;
  for (const auto& n : as_array(require(j, "classes", "graphs"), "graphs.classes")) {
    names.push_back(as_string(n, "graphs.classes"));
  }
  try {
    ClassVocabulary vocab(std::move(names));
    BandConfig config{as_count(require(j, "n_bands", "graphs"), "graphs.n_bands"),
                      as_number(require(j, "band_width_frac", "graphs"), "graphs.band_width_frac")};
    CoOccurrenceGraphSet g{std::move(vocab), config, {}, std::nullopt};
    for (const auto& e : as_array(require(j, "edges", "graphs"), "graphs.edges")) {
      g.edges.push_back(matrix_from_json(e, "graphs.edges"));
    }
    if (j.contains("raw_counts") && !j["raw_counts"].is_null()) {
      RawCounts raw;
      for (const auto& r : as_array(j["raw_counts"], "graphs.raw_counts")) {
        const std::size_t rows = as_count(require(r, "rows", "raw_counts"), "raw_counts.rows");
        const std::size_t cols = as_count(require(r, "cols", "raw_counts"), "raw_counts.cols");
        const auto& data = as_array(require(r, "data", "raw_counts"), "raw_counts.data");
        if (rows != cols || data.size() != rows * cols) {
          throw ParseError("graphs.raw_counts: malformed count matrix");
        }
        CountMatrix counts(rows);
        for (std::size_t i = 0; i < data.size(); ++i) {
          counts(i / cols, i % cols) = as_count(data[i], "raw_counts.data");
        }
        raw.push_back(std::move(counts));
      }
      g.raw_counts = std::move(raw);
    }
    g.validate();
    return g;
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(std::string("graphs: ") + e.what());
  }
}

void save_graphs(const CoOccurrenceGraphSet& graphs, const std::filesystem::path& path) {
  write_json_file(path, graphs_to_json(graphs));
}

CoOccurrenceGraphSet load_graphs(const std::filesystem::path& path) {
  return graphs_from_json(read_json_file(path));
}

std::size_t edge_count(const Matrix& edges, double threshold) {
  std::size_t n = 0;
  for (std::size_t m = 0; m < edges.rows(); ++m) {
    for (std::size_t k = m + 1; k < edges.cols(); ++k) n += edges(m, k) > threshold ? 1 : 0;
  }
  return n;
}

std::string graphs_to_dot(const CoOccurrenceGraphSet& graphs, double threshold) {
  auto quoted = [](const std::string& s) {
    std::string out = "\"";
    for (char ch : s) {
      if (ch == '"' || ch == '\\') out += '\\';
      out += ch;
    }
    return out + "\"";
  };
  auto fixed = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return std::string(buf);
  };

  const BandSet bands = graphs.bands();
  std::ostringstream out;
  out << "graph cooccurrence {\n  node [shape=box];\n";
  for (std::size_t j = 0; j < graphs.n_graphs(); ++j) {
    const Matrix& e = graphs.edges[j];
    out << "  subgraph cluster_band" << j << " {\n";
    out << "    label=" << quoted("band " + std::to_string(j) + " [" + fixed(bands.upper[j]) + ", " +
                                  fixed(bands.lower[j]) + ")")
        << ";\n";
    for (std::size_t m = 0; m < e.rows(); ++m) {
      out << "    b" << j << "_" << m << " [label=" << quoted(graphs.vocabulary.name(m)) << "];\n";
    }
    for (std::size_t m = 0; m < e.rows(); ++m) {
      for (std::size_t k = m + 1; k < e.cols(); ++k) {
        if (e(m, k) <= threshold) continue;
        out << "    b" << j << "_" << m << " -- b" << j << "_" << k << " [label=\"" << fixed(e(m, k))
            << "\", penwidth=" << fixed(0.5 + 4.0 * e(m, k)) << "];\n";
      }
    }
    out << "  }\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace layoutprior
