#include <doctest.h>

#include <set>

#include "layoutprior/error.hpp"
#include "layoutprior/file_io.hpp"
#include "layoutprior/ingest.hpp"
#include "oracles.hpp"

using namespace layoutprior;
using oracle::data_path;
using oracle::temp_path;

namespace {

nlohmann::json one_layout(const std::string& cls, nlohmann::json bbox = {0, 0, 10, 10}) {
  return nlohmann::json{
      {"classes", rico_vocabulary().names()},
      {"layouts",
       {{{"id", "x"}, {"width", 100}, {"height", 100}, {"components", {{{"bbox", bbox}, {"class", cls}}}}}}}};
}

bool all_inside(const Corpus& c) {
  for (const auto& d : c.layouts)
    for (const auto& comp : d.components)
      if (comp.bbox.x1 < 0 || comp.bbox.y1 < 0 || comp.bbox.x2 > d.width || comp.bbox.y2 > d.height) return false;
  return true;
}

}  // namespace

TEST_CASE("empty layouts array gives an empty corpus") {
  const Corpus c = corpus_from_native_json(nlohmann::json{{"classes", {"A"}}, {"layouts", nlohmann::json::array()}});
  CHECK(c.layouts.empty());
  const auto p = temp_path("empty.json");
  save_native(c, p);
  const auto j = read_json_file(p);
  CHECK(j["layouts"] == nlohmann::json::array());
  CHECK(load_native(p) == c);
}

TEST_CASE("native fixture round-trips and saves byte-stable") {
  const Corpus c = load_native(data_path("native_fixture.json"));
  REQUIRE(c.layouts.size() == 1);
  REQUIRE(c.layouts[0].components.size() == 2);
  CHECK(c.layouts[0].components[1].score == 0.8125);
  CHECK_FALSE(c.layouts[0].components[0].score.has_value());

  const auto p = temp_path("native_out.json");
  save_native(c, p);
  CHECK(read_text_file(p) == read_text_file(data_path("native_fixture_canonical.json")));
  CHECK(load_native(p) == c);

  const auto gz = temp_path("native_out.json.gz");
  save_native(c, gz);
  CHECK(load_native(gz) == c);
  CHECK(read_text_file(gz) == read_text_file(p));
}

TEST_CASE("class membership against the RICO vocabulary") {
  CHECK_NOTHROW(corpus_from_native_json(one_layout("Toolbar")));
  try {
    corpus_from_native_json(one_layout("Tulbar"));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("'x'") != std::string::npos);
    CHECK(msg.find("Tulbar") != std::string::npos);
  }
}

TEST_CASE("native parse errors") {
  CHECK_THROWS_AS(load_native("/no/such/corpus.json"), IoError);
  CHECK_THROWS_AS(corpus_from_native_json(one_layout("Toolbar", {20, 0, 10, 10})), ParseError);
  CHECK_THROWS_AS(corpus_from_native_json(one_layout("Toolbar", {0, 0, 10})), ParseError);
  CHECK_THROWS_AS(corpus_from_native_json(nlohmann::json{{"layouts", nlohmann::json::array()}}), ParseError);

  auto dup = one_layout("Toolbar");
  dup["layouts"].push_back(dup["layouts"][0]);
  CHECK_THROWS_AS(corpus_from_native_json(dup), ParseError);

  auto bad_score = one_layout("Toolbar");
  bad_score["layouts"][0]["components"][0]["score"] = 1.5;
  CHECK_THROWS_AS(corpus_from_native_json(bad_score), ParseError);

  auto bad_canvas = one_layout("Toolbar");
  bad_canvas["layouts"][0]["height"] = 0;
  CHECK_THROWS_AS(corpus_from_native_json(bad_canvas), ParseError);
}

TEST_CASE("boxes past the canvas are clamped") {
  const Corpus c = corpus_from_native_json(one_layout("Toolbar", {-10, 90, 150, 130}));
  CHECK(c.layouts[0].components[0].bbox == BBox{0, 90, 100, 100});
  CHECK(all_inside(c));
}

TEST_CASE("scores survive the round trip at full precision") {
  auto j = one_layout("Image");
  j["layouts"][0]["components"][0]["score"] = 0.1234567890123456789;
  const Corpus c = corpus_from_native_json(j);
  const auto p = temp_path("scores.json");
  save_native(c, p);
  CHECK(load_native(p).layouts[0].components[0].score == c.layouts[0].components[0].score);
}

TEST_CASE("round trip on random corpora") {
  Rng rng(17);
  for (int t = 0; t < 30; ++t) {
    Corpus c = oracle::random_corpus(rng, 6, 8, 4);
    for (auto& d : c.layouts)
      for (auto& comp : d.components)
        if (rng.uniform() < 0.5) comp.score = rng.uniform();
    const auto p = temp_path("rt.json");
    save_native(c, p);
    CHECK(load_native(p) == c);
  }
}

TEST_CASE("coco conversion") {
  const Corpus c = load_coco(data_path("coco_images.json"), data_path("coco_annotations.json"));
  // categories {3: Icon, 1: Button} -> ascending id order
  CHECK(c.vocabulary.names() == std::vector<std::string>{"Button", "Icon"});
  REQUIRE(c.layouts.size() == 2);
  CHECK(c.component_count() == 3);
  CHECK(c.layouts[0].id == "7");
  CHECK(c.layouts[0].components[0].bbox == BBox{10, 20, 40, 60});
  CHECK(c.layouts[0].components[0].class_id == 0);
  CHECK(c.layouts[0].components[1].class_id == 1);
  // [390,0,20,10] overflows a 400-wide image
  CHECK(c.layouts[1].components[0].bbox == BBox{390, 0, 400, 10});
  CHECK(all_inside(c));

  const auto p = temp_path("coco_native.json");
  save_native(c, p);
  CHECK(load_native(p) == c);
}

TEST_CASE("coco errors") {
  const auto images = read_json_file(data_path("coco_images.json"));
  auto anns = read_json_file(data_path("coco_annotations.json"));
  auto a = anns;
  a["annotations"][0]["image_id"] = 99;
  CHECK_THROWS_AS(corpus_from_coco_json(images, a), ParseError);
  a = anns;
  a["annotations"][0]["category_id"] = 99;
  CHECK_THROWS_AS(corpus_from_coco_json(images, a), ParseError);
  a = anns;
  a["annotations"][0]["bbox"] = {0, 0, -1, 5};
  CHECK_THROWS_AS(corpus_from_coco_json(images, a), ParseError);
}

TEST_CASE("coco results list carries scores") {
  const auto images = read_json_file(data_path("coco_images.json"));
  const nlohmann::json results = {{{"image_id", 3}, {"category_id", 1}, {"bbox", {1, 2, 3, 4}}, {"score", 0.25}}};
  const Corpus c = corpus_from_coco_json(images, results);
  CHECK(c.layouts[1].components.size() == 1);
  CHECK(c.layouts[1].components[0].score == 0.25);
}

TEST_CASE("splits partition the corpus") {
  Rng rng(4);
  Corpus c = oracle::random_corpus(rng, 40, 2, 2);
  while (c.layouts.size() < 10) c = oracle::random_corpus(rng, 40, 2, 2);

  const std::vector<std::string> ids = {c.layouts[1].id, c.layouts[3].id};
  auto [in, out] = split_by_ids(c, ids);
  CHECK(in.layouts.size() == 2);
  CHECK(out.layouts.size() == c.layouts.size() - 2);

  auto [a, b] = random_split(c, 0.25, 9);
  auto [a2, b2] = random_split(c, 0.25, 9);
  CHECK(a == a2);
  CHECK(b == b2);
  std::set<std::string> all;
  for (const auto& d : a.layouts) all.insert(d.id);
  for (const auto& d : b.layouts) CHECK(all.insert(d.id).second);
  CHECK(all.size() == c.layouts.size());
  CHECK_THROWS_AS(random_split(c, 1.5, 0), ValidationError);
}
