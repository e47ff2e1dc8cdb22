#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "layoutprior/error.hpp"
#include "layoutprior/file_io.hpp"
#include "layoutprior/prior.hpp"
#include "oracles.hpp"

using namespace layoutprior;

namespace {

// One component per entry: (class, center y); boxes are 2 px tall.
LayoutDocument strip(const std::vector<std::pair<std::size_t, double>>& items, double height = 100) {
  LayoutDocument d{"s", 100, height, {}};
  for (auto [cls, cy] : items) d.components.push_back({BBox{0, cy - 1, 10, cy + 1}, cls, std::nullopt});
  return d;
}

Corpus abc_corpus() {
  Corpus c{oracle::letters(3)};
  c.layouts.push_back(strip({{0, 10}, {1, 20}, {2, 80}}));
  return c;
}

void check_graph_invariants(const CoOccurrenceGraphSet& g) {
  for (const auto& e : g.edges) {
    for (std::size_t m = 0; m < e.rows(); ++m) {
      CHECK(e(m, m) == 1.0);
      for (std::size_t n = 0; n < e.cols(); ++n) {
        CHECK(std::abs(e(m, n) - e(n, m)) <= 1e-9);
        CHECK(e(m, n) >= 0.0);
        CHECK(e(m, n) <= 1.0);
      }
    }
  }
}

Corpus replicate(const Corpus& c, int k) {
  Corpus out{c.vocabulary};
  for (int r = 0; r < k; ++r)
    for (auto d : c.layouts) {
      d.id += "#" + std::to_string(r);
      out.layouts.push_back(d);
    }
  return out;
}

}  // namespace

TEST_CASE("bands") {
  const BandSet b = make_bands(BandConfig::non_overlapping(10));
  REQUIRE(b.size() == 10);
  for (std::size_t j = 0; j < 10; ++j) {
    CHECK(b.upper[j] == static_cast<double>(j) / 10.0);
    CHECK(b.lower[j] == static_cast<double>(j + 1) / 10.0);
    CHECK(b.centroids[j] == doctest::Approx((b.upper[j] + b.lower[j]) / 2));
  }
  const BandSet o = make_bands(BandConfig{2, 0.75});
  CHECK(o.upper == std::vector<double>{0.0, 0.5});
  CHECK(o.lower == std::vector<double>{0.75, 1.0});
  CHECK_THROWS_AS(BandConfig({0, 0.5}).validate(), ValidationError);
  CHECK_THROWS_AS(BandConfig({2, 0.0}).validate(), ValidationError);
  CHECK_THROWS_AS(BandConfig({2, 1.5}).validate(), ValidationError);
}

TEST_CASE("band membership examples") {
  const BandConfig half{2, 0.5};
  auto m = band_membership(strip({{0, 10}}), half);
  CHECK(m(0, 0));
  CHECK_FALSE(m(0, 1));
  m = band_membership(strip({{0, 50}}), half);
  CHECK_FALSE(m(0, 0));
  CHECK(m(0, 1));
  m = band_membership(strip({{0, 60}}), BandConfig{2, 0.75});
  CHECK(m(0, 0));
  CHECK(m(0, 1));
  // center exactly at H goes to the last band
  LayoutDocument edge{"e", 100, 100, {{BBox{0, 100, 10, 100}, 0, std::nullopt}}};
  m = band_membership(edge, BandConfig::non_overlapping(10));
  CHECK(m.bands_of(0) == 1);
  CHECK(m(0, 9));
}

TEST_CASE("non-overlapping bands assign every box exactly once") {
  Rng rng(31);
  for (std::size_t n : {1u, 2u, 3u, 5u, 7u, 10u}) {
    for (int t = 0; t < 20; ++t) {
      const Corpus c = oracle::random_corpus(rng, 5, 20, 3);
      for (const auto& d : c.layouts) {
        const auto m = band_membership(d, BandConfig::non_overlapping(n));
        for (std::size_t i = 0; i < d.components.size(); ++i) CHECK(m.bands_of(i) == 1);
      }
    }
  }
}

TEST_CASE("accumulate: three-box hand trace") {
  const RawCounts raw = accumulate(abc_corpus(), BandConfig{2, 0.5});
  REQUIRE(raw.size() == 2);
  CountMatrix e0(3), e1(3);
  e0(0, 0) = e0(0, 1) = e0(1, 0) = e0(1, 1) = 1;
  CHECK(raw[0] == e0);
  CHECK(raw[1] == e1);
}

TEST_CASE("accumulate: degenerate inputs") {
  const Corpus empty{oracle::letters(2)};
  for (const auto& e : accumulate(empty, BandConfig::non_overlapping(4))) CHECK(e == CountMatrix(2));

  Corpus spread{oracle::letters(2)};
  spread.layouts.push_back(strip({{0, 10}, {1, 30}, {0, 60}, {1, 90}}));
  for (const auto& e : accumulate(spread, BandConfig::non_overlapping(4))) CHECK(e == CountMatrix(2));
}

TEST_CASE("accumulate: overlapping bands update each band independently") {
  Corpus c{oracle::letters(3)};
  c.layouts.push_back(strip({{0, 10}, {1, 60}, {2, 90}}));
  const RawCounts raw = accumulate(c, BandConfig{2, 0.75});
  CountMatrix e0(3), e1(3);
  e0(0, 0) = e0(0, 1) = e0(1, 0) = e0(1, 1) = 1;
  e1(1, 1) = e1(1, 2) = e1(2, 1) = e1(2, 2) = 1;
  CHECK(raw[0] == e0);
  CHECK(raw[1] == e1);
}

TEST_CASE("accumulate rejects out-of-range class ids") {
  Corpus c{oracle::letters(2)};
  c.layouts.push_back(strip({{0, 10}, {5, 20}}));
  CHECK_THROWS_AS(accumulate(c, BandConfig::non_overlapping(2)), ValidationError);
}

TEST_CASE("accumulate matches brute-force triple enumeration") {
  Rng rng(2024);
  for (int t = 0; t < 100; ++t) {
    const auto classes = static_cast<std::size_t>(rng.between(1, 6));
    const std::size_t bands[] = {1, 2, 5, 10};
    const std::size_t n = bands[rng.below(4)];
    const Corpus c = oracle::random_corpus(rng, 10, 20, classes);
    const RawCounts raw = accumulate(c, BandConfig::non_overlapping(n));
    const auto expected = oracle::brute_force_counts(c, n);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t a = 0; a < classes; ++a)
        for (std::size_t b = 0; b < classes; ++b) REQUIRE(raw[j](a, b) == expected[j][a][b]);
  }
}

TEST_CASE("parallel accumulation is bit-identical") {
  Rng rng(77);
  const Corpus c = oracle::random_corpus(rng, 200, 20, 5);
  const RawCounts seq = accumulate(c, BandConfig::non_overlapping(5), 1);
  for (unsigned threads : {2u, 3u, 8u, 64u}) CHECK(accumulate(c, BandConfig::non_overlapping(5), threads) == seq);
}

TEST_CASE("normalize examples") {
  auto counts = [](std::vector<std::uint64_t> v) {
    CountMatrix m(2);
    for (std::size_t i = 0; i < 4; ++i) m(i / 2, i % 2) = v[i];
    return m;
  };
  CHECK(normalize_counts(counts({1, 1, 1, 1})) == Matrix(2, 2, {1, 0.5, 0.5, 1}));
  CHECK(normalize_counts(counts({0, 0, 0, 0})) == Matrix::identity(2));
  CHECK(normalize_counts(counts({0, 2, 2, 0})) == Matrix(2, 2, {1, 1, 1, 1}));
}

TEST_CASE("build_prior: three-box example") {
  const auto g = build_prior(abc_corpus(), BandConfig{2, 0.5});
  CHECK(g.edges[0] == Matrix(3, 3, {1, 0.5, 0, 0.5, 1, 0, 0, 0, 1}));
  CHECK(g.edges[1] == Matrix::identity(3));
  g.validate();
}

TEST_CASE("build_prior: single band counts whole layouts") {
  Corpus c{oracle::letters(3)};
  c.layouts.push_back(strip({{0, 5}, {2, 95}}));
  const auto g = build_prior(c, BandConfig{1, 1.0});
  REQUIRE(g.n_graphs() == 1);
  // counts [[1,0,1],[0,0,0],[1,0,1]] -> 1/sqrt(2*2)
  CHECK(g.edges[0] == Matrix(3, 3, {1, 0, 0.5, 0, 1, 0, 0.5, 0, 1}));
}

TEST_CASE("fixture corpus reproduces the committed graph file") {
  const Corpus c = load_native(oracle::data_path("prior_fixture.json"));
  const auto g = build_prior(c, BandConfig::non_overlapping(2));
  const auto golden = load_graphs(oracle::data_path("prior_fixture_graphs.json"));
  CHECK(g == golden);
  // hand-derived: band 0 Toolbar-Text = Toolbar-Image = 1/sqrt(4*2); band 1
  // Image-Button = 1/sqrt(2*8), Text-Button = 2/sqrt(3*8)
  CHECK(g.edges[0](0, 1) == doctest::Approx(1 / std::sqrt(8.0)).epsilon(1e-15));
  CHECK(g.edges[0](0, 2) == doctest::Approx(1 / std::sqrt(8.0)).epsilon(1e-15));
  CHECK(g.edges[0](1, 2) == 0.0);
  CHECK(g.edges[1](2, 3) == 0.25);
  CHECK(g.edges[1](1, 3) == doctest::Approx(2 / std::sqrt(24.0)).epsilon(1e-15));
  CHECK(canonical_json(graphs_to_json(g)) == read_text_file(oracle::data_path("prior_fixture_graphs.json")));
}

TEST_CASE("graph invariants and replication invariance on random corpora") {
  Rng rng(606);
  for (int t = 0; t < 60; ++t) {
    const auto classes = static_cast<std::size_t>(rng.between(1, 6));
    const std::size_t n = static_cast<std::size_t>(rng.between(1, 10));
    const Corpus c = oracle::random_corpus(rng, 10, 20, classes);
    const auto g = build_prior(c, BandConfig::non_overlapping(n));
    check_graph_invariants(g);
    for (int k : {2, 5}) {
      const auto gk = build_prior(replicate(c, k), BandConfig::non_overlapping(n));
      for (std::size_t j = 0; j < n; ++j) CHECK(max_abs_diff(gk.edges[j], g.edges[j]) <= 1e-12);
    }
  }
}

TEST_CASE("vocabulary permutation permutes graphs") {
  Rng rng(12);
  for (int t = 0; t < 20; ++t) {
    const Corpus c = oracle::random_corpus(rng, 8, 15, 5);
    std::vector<std::size_t> perm(5);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = 5; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    std::vector<std::string> names(5);
    for (std::size_t k = 0; k < 5; ++k) names[perm[k]] = c.vocabulary.name(k);
    Corpus p{ClassVocabulary(names), c.layouts};
    for (auto& d : p.layouts)
      for (auto& comp : d.components) comp.class_id = perm[comp.class_id];

    const auto g = build_prior(c, BandConfig::non_overlapping(3));
    const auto gp = build_prior(p, BandConfig::non_overlapping(3));
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t a = 0; a < 5; ++a)
        for (std::size_t b = 0; b < 5; ++b) CHECK(gp.edges[j](perm[a], perm[b]) == g.edges[j](a, b));
  }
}

TEST_CASE("graph file round trip and schema checks") {
  Rng rng(5);
  const Corpus c = oracle::random_corpus(rng, 10, 20, 4);
  const auto g = build_prior(c, BandConfig{3, 0.5});
  const auto p = oracle::temp_path("graphs.json");
  save_graphs(g, p);
  const auto back = load_graphs(p);
  CHECK(back.vocabulary == g.vocabulary);
  CHECK(back.band_config == g.band_config);
  CHECK(back.raw_counts == g.raw_counts);
  for (std::size_t j = 0; j < 3; ++j) CHECK(max_abs_diff(back.edges[j], g.edges[j]) <= 1e-12);

  auto j = graphs_to_json(g);
  j["version"] = 2;
  CHECK_THROWS_AS(graphs_from_json(j), ParseError);
  j = graphs_to_json(g);
  j["classes"] = nlohmann::json::array();
  CHECK_THROWS_AS(graphs_from_json(j), ParseError);
  j = graphs_to_json(g);
  j["edges"].erase(0);
  CHECK_THROWS_AS(graphs_from_json(j), ParseError);
  j = graphs_to_json(g);
  j["edges"][0]["data"][1] = 0.75;  // breaks symmetry
  CHECK_THROWS_AS(graphs_from_json(j), ParseError);

  auto no_raw = g;
  no_raw.raw_counts.reset();
  CHECK_FALSE(graphs_to_json(no_raw).contains("raw_counts"));
}

TEST_CASE("dot export") {
  const auto g = build_prior(abc_corpus(), BandConfig{2, 0.5});
  const std::string dot = graphs_to_dot(g, 0.1);
  CHECK(dot.rfind("graph", 0) == 0);
  CHECK(dot.find("cluster_band0") != std::string::npos);
  CHECK(dot.find("cluster_band1") != std::string::npos);
  CHECK(dot.find("b0_0 -- b0_1") != std::string::npos);
  CHECK(dot.find("b1_0 -- b1_1") == std::string::npos);
  CHECK(edge_count(g.edges[0], 0.1) == 1);
  CHECK(edge_count(g.edges[1], 0.1) == 0);
}
