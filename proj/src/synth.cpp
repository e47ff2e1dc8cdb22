// SPDX-License-Identifier: Apache-2.0
#include "layoutprior/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json_util.hpp"
#include "layoutprior/error.hpp"
#include "layoutprior/file_io.hpp"
#include "layoutprior/rng.hpp"

namespace layoutprior {

void GeneratorSpec::validate() const {
  const std::size_t c = vocabulary.size();
  if (planted_graphs.empty()) throw ValidationError("generator: at least one planted graph is required");
  if (class_marginals.size() != planted_graphs.size()) {
    throw ValidationError("generator: one class marginal per band is required");
  }
  for (std::size_t j = 0; j < planted_graphs.size(); ++j) {
    const Matrix& g = planted_graphs[j];
    const std::string ctx = "generator: planted graph " + std::to_string(j);
    if (g.rows() != c || g.cols() != c) throw ShapeError(ctx + " is " + g.shape());
    for (std::size_t m = 0; m < c; ++m) {
      if (g(m, m) != 1.0) throw ValidationError(ctx + " needs a unit diagonal");
      for (std::size_t n = 0; n < c; ++n) {
        if (!(g(m, n) >= 0.0 && g(m, n) <= 1.0)) throw ValidationError(ctx + " has entries outside [0,1]");
        if (std::abs(g(m, n) - g(n, m)) > 1e-9) throw ValidationError(ctx + " is not symmetric");
      }
    }
    const auto& marginal = class_marginals[j];
    if (marginal.size() != c) throw ShapeError("generator: marginal " + std::to_string(j) + " has wrong length");
    double total = 0.0;
    for (double p : marginal) {
      if (!(p >= 0.0)) throw ValidationError("generator: negative marginal probability");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ValidationError("generator: marginal " + std::to_string(j) + " does not sum to 1");
  }
  if (boxes_min > boxes_max) throw ValidationError("generator: boxes_per_band min exceeds max");
  if (!(canvas_width > 0.0 && canvas_height > 0.0)) throw ValidationError("generator: canvas must be positive");
  for (const Range* r : {&box_width, &box_height}) {
    if (!(r->lo >= 0.0 && r->lo <= r->hi)) throw ValidationError("generator: invalid box size range");
  }
  if (!(noise >= 0.0 && noise < 1.0)) throw ValidationError("generator: noise must lie in [0,1)");
}

namespace {

LayoutDocument generate_layout(const GeneratorSpec& spec, const BandSet& bands, std::size_t index) {
  Rng rng(derive_seed(spec.seed, index, 0));
  char id[32];
  std::snprintf(id, sizeof id, "synth-%06zu", index);
  LayoutDocument doc{id, spec.canvas_width, spec.canvas_height, {}};

  const double W = spec.canvas_width;
  const double H = spec.canvas_height;
  std::vector<double> weights(spec.vocabulary.size());
  std::vector<std::size_t> placed;
  for (std::size_t j = 0; j < spec.n_bands(); ++j) {
    const auto k = static_cast<std::size_t>(
        rng.between(static_cast<std::int64_t>(spec.boxes_min), static_cast<std::int64_t>(spec.boxes_max)));
    placed.clear();
    const Matrix& planted = spec.planted_graphs[j];
    for (std::size_t b = 0; b < k; ++b) {
      std::size_t cls;
      if (placed.empty()) {
        cls = rng.categorical(spec.class_marginals[j]);
      } else {
        std::fill(weights.begin(), weights.end(), 0.0);
        for (std::size_t c = 0; c < weights.size(); ++c) {
          for (std::size_t m : placed) weights[c] += planted(c, m);
        }
        cls = rng.categorical(weights);
      }
      placed.push_back(cls);

      BBox box;
      do {
        const double cx = rng.uniform(0.0, W);
        const double cy = rng.uniform(bands.upper[j] * H, bands.lower[j] * H);
        const double hw = std::min({rng.uniform(spec.box_width.lo, spec.box_width.hi) / 2.0, cx, W - cx});
        const double hh = std::min({rng.uniform(spec.box_height.lo, spec.box_height.hi) / 2.0, cy, H - cy});
        box = BBox{cx - hw, cy - hh, cx + hw, cy + hh};
      } while (!bands.contains(j, box.center_y() / H));
      doc.components.push_back(Component{box, cls, std::nullopt});
    }
  }
  return doc;
}

}  // namespace

GeneratedCorpora generate(const GeneratorSpec& spec, std::size_t n_layouts) {
  spec.validate();
  const BandSet bands = make_bands(spec.band_config());
  GeneratedCorpora out{Corpus(spec.vocabulary, {}, "synthetic"), Corpus(spec.vocabulary, {}, "synthetic-noisy")};
  const auto n_classes = static_cast<std::uint64_t>(spec.vocabulary.size());
  for (std::size_t l = 0; l < n_layouts; ++l) {
    LayoutDocument clean = generate_layout(spec, bands, l);
    LayoutDocument noisy = clean;
    Rng noise_rng(derive_seed(spec.seed, l, 1));
    for (auto& c : noisy.components) {
      if (noise_rng.uniform() < spec.noise) c.class_id = static_cast<std::size_t>(noise_rng.below(n_classes));
    }
    out.clean.layouts.push_back(std::move(clean));
    out.noisy.layouts.push_back(std::move(noisy));
  }
  return out;
}

Corpus as_detections(const Corpus& noisy, double noise) {
  if (!(noise >= 0.0 && noise < 1.0)) throw ValidationError("noise must lie in [0,1)");
  const double posterior = (1.0 - noise) + noise / static_cast<double>(noisy.vocabulary.size());
  Corpus out = noisy;
  for (auto& doc : out.layouts) {
    for (auto& c : doc.components) c.score = posterior;
  }
  return out;
}

CoOccurrenceGraphSet planted_graph_set(const GeneratorSpec& spec) {
  spec.validate();
  return CoOccurrenceGraphSet{spec.vocabulary, spec.band_config(), spec.planted_graphs, std::nullopt};
}

double recovery_score(const CoOccurrenceGraphSet& planted, const CoOccurrenceGraphSet& recovered) {
  if (planted.n_graphs() != recovered.n_graphs() ||
      planted.vocabulary.size() != recovered.vocabulary.size()) {
    throw ShapeError("recovery score: graph sets differ in band count or class count");
  }
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t j = 0; j < planted.n_graphs(); ++j) {
    const Matrix& a = planted.edges[j];
    const Matrix& b = recovered.edges[j];
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("recovery score: graph shapes differ");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t m = 0; m < a.rows(); ++m) {
      for (std::size_t n = 0; n < a.cols(); ++n) {
        if (m == n) continue;
        dot += a(m, n) * b(m, n);
        na += a(m, n) * a(m, n);
        nb += b(m, n) * b(m, n);
      }
    }
    if (na == 0.0 || nb == 0.0) continue;
    sum += dot / std::sqrt(na * nb);
    ++used;
  }
  return used ? sum / static_cast<double>(used) : -1.0;
}

GeneratorSpec two_band_reference_spec() {
  // Strong affinities inside {0,1,2} at the top and {3,4,5} at the bottom,
  // weak ones across the groups.
  const std::vector<double> top = {
      1.0,  0.9,  0.6,  0.05, 0.05, 0.05,
      0.9,  1.0,  0.8,  0.05, 0.05, 0.05,
      0.6,  0.8,  1.0,  0.05, 0.05, 0.05,
      0.05, 0.05, 0.05, 1.0,  0.1,  0.1,
      0.05, 0.05, 0.05, 0.1,  1.0,  0.1,
      0.05, 0.05, 0.05, 0.1,  0.1,  1.0,
  };
  const std::vector<double> bottom = {
      1.0,  0.1,  0.1,  0.05, 0.05, 0.05,
      0.1,  1.0,  0.1,  0.05, 0.05, 0.05,
      0.1,  0.1,  1.0,  0.05, 0.05, 0.05,
      0.05, 0.05, 0.05, 1.0,  0.9,  0.7,
      0.05, 0.05, 0.05, 0.9,  1.0,  0.6,
      0.05, 0.05, 0.05, 0.7,  0.6,  1.0,
  };
  GeneratorSpec spec{
      ClassVocabulary({"Toolbar", "Multi-Tab", "Text", "List Item", "Advertisement", "Button Bar"}),
      {Matrix(6, 6, top), Matrix(6, 6, bottom)},
      {{0.35, 0.3, 0.2, 0.05, 0.05, 0.05}, {0.05, 0.05, 0.05, 0.35, 0.3, 0.2}},
  };
  spec.boxes_min = 2;
  spec.boxes_max = 6;
  spec.seed = 42;
  return spec;
}

nlohmann::json spec_to_json(const GeneratorSpec& spec) {
  nlohmann::json j;
  j["classes"] = spec.vocabulary.names();
  j["planted_graphs"] = nlohmann::json::array();
  for (const auto& g : spec.planted_graphs) j["planted_graphs"].push_back(matrix_to_json(g));
  j["class_marginals"] = spec.class_marginals;
  j["boxes_per_band"] = {spec.boxes_min, spec.boxes_max};
  j["canvas"] = {spec.canvas_width, spec.canvas_height};
  j["box_width"] = {spec.box_width.lo, spec.box_width.hi};
  j["box_height"] = {spec.box_height.lo, spec.box_height.hi};
  j["noise"] = spec.noise;
  j["seed"] = spec.seed;
  return j;
}

GeneratorSpec spec_from_json(const nlohmann::json& j) {
  using namespace detail;
  auto pair = [&](std::string_view key) {
    const auto& v = require(j, key, "generator");
    if (!v.is_array() || v.size() != 2) throw ParseError("generator." + std::string(key) + ": expected [lo, hi]");
    return Range{as_number(v[0], key), as_number(v[1], key)};
  };
  std::vector<std::string> names;
  for (const auto& n : as_array(require(j, "classes", "generator"), "generator.classes")) {
    names.push_back(as_string(n, "generator.classes"));
  }
  try {
    GeneratorSpec spec{ClassVocabulary(std::move(names)), {}, {}};
    for (const auto& g : as_array(require(j, "planted_graphs", "generator"), "generator.planted_graphs")) {
      spec.planted_graphs.push_back(matrix_from_json(g, "generator.planted_graphs"));
    }
    for (const auto& m : as_array(require(j, "class_marginals", "generator"), "generator.class_marginals")) {
      std::vector<double> row;
      for (const auto& p : as_array(m, "generator.class_marginals")) row.push_back(as_number(p, "marginal"));
      spec.class_marginals.push_back(std::move(row));
    }
    const auto& bpb = require(j, "boxes_per_band", "generator");
    if (!bpb.is_array() || bpb.size() != 2) throw ParseError("generator.boxes_per_band: expected [min, max]");
    spec.boxes_min = as_count(bpb[0], "boxes_per_band");
    spec.boxes_max = as_count(bpb[1], "boxes_per_band");
    const Range canvas = pair("canvas");
    spec.canvas_width = canvas.lo;
    spec.canvas_height = canvas.hi;
    spec.box_width = pair("box_width");
    spec.box_height = pair("box_height");
    spec.noise = j.contains("noise") ? as_number(j["noise"], "generator.noise") : 0.0;
    if (j.contains("seed")) {
      if (!j["seed"].is_number_integer()) throw ParseError("generator.seed: expected an integer");
      spec.seed = j["seed"].get<std::uint64_t>();
    }
    spec.validate();
    return spec;
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(std::string("generator: ") + e.what());
  }
}

GeneratorSpec load_generator_spec(const std::filesystem::path& path) {
  return spec_from_json(read_json_file(path));
}

void save_generator_spec(const GeneratorSpec& spec, const std::filesystem::path& path) {
  write_json_file(path, spec_to_json(spec));
}

}  // namespace layoutprior
