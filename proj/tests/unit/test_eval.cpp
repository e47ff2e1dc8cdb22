#include <doctest.h>

#include <algorithm>

#include "layoutprior/error.hpp"
#include "layoutprior/eval.hpp"
#include "layoutprior/file_io.hpp"
#include "oracles.hpp"

using namespace layoutprior;

namespace {

void check_block(const MetricBlock& b, double value, bool skip_ar1 = false) {
  const auto v = b.values();
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (skip_ar1 && k == 6) continue;
    CAPTURE(k);
    CHECK(v[k] == doctest::Approx(value).epsilon(1e-12));
  }
}

// Ground truth plus jittered copies, misses, and random false positives.
std::pair<Corpus, Corpus> random_eval_pair(Rng& rng, std::size_t n_layouts, std::size_t classes) {
  Corpus gts{oracle::letters(classes)}, dets{oracle::letters(classes)};
  for (std::size_t l = 0; l < n_layouts; ++l) {
    LayoutDocument g{"img" + std::to_string(l), 500, 500, {}};
    LayoutDocument d = g;
    for (auto n = rng.between(0, 8); n > 0; --n) {
      const double x = rng.uniform(0, 400), y = rng.uniform(0, 400);
      const double w = rng.uniform(5, 100), h = rng.uniform(5, 100);
      const auto cls = static_cast<std::size_t>(rng.below(classes));
      g.components.push_back({BBox{x, y, x + w, y + h}, cls, std::nullopt});
      if (rng.uniform() < 0.8) {
        const double jx = rng.uniform(-0.2, 0.2) * w, jy = rng.uniform(-0.2, 0.2) * h;
        const auto dc = rng.uniform() < 0.8 ? cls : static_cast<std::size_t>(rng.below(classes));
        d.components.push_back({BBox{x + jx, y + jy, x + jx + w, y + jy + h}, dc, rng.uniform()});
      }
    }
    for (auto n = rng.between(0, 3); n > 0; --n) {
      const double x = rng.uniform(0, 450), y = rng.uniform(0, 450);
      d.components.push_back({BBox{x, y, x + rng.uniform(5, 50), y + rng.uniform(5, 50)},
                              static_cast<std::size_t>(rng.below(classes)), rng.uniform()});
    }
    gts.layouts.push_back(std::move(g));
    dets.layouts.push_back(std::move(d));
  }
  return {gts, dets};
}

}  // namespace

TEST_CASE("linspace follows numpy") {
  const auto t = linspace(0.5, 0.95, 10);
  REQUIRE(t.size() == 10);
  CHECK(t[0] == 0.5);
  CHECK(t[8] == 0.8999999999999999);
  CHECK(t[9] == 0.95);
  const auto r = linspace(0.0, 1.0, 101);
  CHECK(r[7] == 0.07);
  CHECK(r[57] == 0.5700000000000001);
  CHECK(r[100] == 1.0);
}

TEST_CASE("default config") {
  const EvalConfig cfg;
  CHECK(cfg.iou_thresholds.size() == 10);
  CHECK(cfg.recall_points.size() == 101);
  CHECK(cfg.max_dets == std::vector<std::size_t>{1, 10, 100});
  REQUIRE(cfg.area_ranges.size() == 4);
  CHECK(cfg.area_ranges[1].contains(32.0 * 32.0 - 1e-9));
  CHECK_FALSE(cfg.area_ranges[1].contains(32.0 * 32.0));
  CHECK(cfg.area_ranges[2].contains(32.0 * 32.0));
  CHECK_FALSE(cfg.area_ranges[2].contains(96.0 * 96.0));
  CHECK(cfg.area_ranges[3].contains(96.0 * 96.0));
  cfg.validate();
  EvalConfig bad;
  bad.iou_thresholds = {0.7, 0.5};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("match examples") {
  const BBox gt{0, 0, 10, 10};
  const std::vector<BBox> gts = {gt};
  std::vector<ScoredBox> one = {{gt, 0.3}};
  for (double t : {0.5, 0.75, 0.95, 1.0}) CHECK(match(one, gts, t, 100).true_positive == std::vector<bool>{true});

  // IoU 0.9 at score 0.5, IoU 0.8 at score 0.9: the higher score wins
  const std::vector<ScoredBox> two = {{{0, 0, 10, 9}, 0.5}, {{0, 0, 10, 8}, 0.9}};
  CHECK(iou(two[0].box, gt) == doctest::Approx(0.9));
  CHECK(iou(two[1].box, gt) == doctest::Approx(0.8));
  const auto m = match(two, gts, 0.5, 100);
  CHECK(m.order == std::vector<std::size_t>{1, 0});
  CHECK(m.true_positive == std::vector<bool>{true, false});
  CHECK(m.matched_gt == std::vector<long>{0, -1});

  // IoU 0.49 at t=0.5
  const std::vector<ScoredBox> low = {{{0, 0, 10, 4.9}, 1.0}};
  CHECK(iou(low[0].box, gt) == doctest::Approx(0.49));
  CHECK(match(low, gts, 0.5, 100).true_positive == std::vector<bool>{false});

  // ties keep input order; max_dets truncates
  const std::vector<ScoredBox> tied = {{{50, 50, 60, 60}, 0.5}, {gt, 0.5}, {gt, 0.5}};
  const auto mt = match(tied, gts, 0.5, 2);
  CHECK(mt.order == std::vector<std::size_t>{0, 1});
  CHECK(mt.true_positive == std::vector<bool>{false, true});
}

TEST_CASE("precision_recall examples") {
  const bool all[] = {true, true, true};
  CHECK(precision_recall(all, 3).ap == 1.0);
  CHECK(precision_recall(std::span<const bool>{}, 4).ap == 0.0);
  const bool mixed[] = {true, false, true};
  const auto pr = precision_recall(mixed, 2);
  CHECK(pr.ap == doctest::Approx(0.8350).epsilon(1e-4));
  CHECK(pr.ap == doctest::Approx((51.0 + 50.0 * 2.0 / 3.0) / 101.0).epsilon(1e-12));
  CHECK(pr.recall == 1.0);
  CHECK(precision_recall(mixed, 0).ap == kNoGroundTruth);
}

TEST_CASE("perfect and empty detections") {
  const Corpus gt = load_native(oracle::data_path("eval_gt.json"));
  Corpus perfect = gt;
  for (auto& d : perfect.layouts)
    for (auto& c : d.components) c.score = 1.0;
  // one detection per image cannot recall images holding several objects
  const auto r = evaluate(perfect, gt);
  check_block(r.overall, 1.0, true);
  CHECK(r.overall.ar1 < 1.0);

  Corpus empty = gt;
  for (auto& d : empty.layouts) d.components.clear();
  check_block(evaluate(empty, gt).overall, 0.0);
}

TEST_CASE("fixture reproduces the reference values") {
  const Corpus gt = load_native(oracle::data_path("eval_gt.json"));
  const Corpus dets = load_native(oracle::data_path("eval_dets.json"));
  const auto expected = read_json_file(oracle::data_path("eval_expected.json"));
  const auto got = report_to_json(evaluate(dets, gt));
  for (const char* name : MetricBlock::names()) {
    CAPTURE(name);
    CHECK(std::abs(got["overall"][name].get<double>() - expected["overall"][name].get<double>()) <= 1e-6);
    for (const auto& cls : {"Button", "Icon"}) {
      CAPTURE(cls);
      CHECK(std::abs(got["per_class"][cls][name].get<double>() - expected["per_class"][cls][name].get<double>()) <=
            1e-6);
    }
  }
}

TEST_CASE("slices without ground truth report the sentinel") {
  Corpus gt{oracle::letters(2)};
  gt.layouts.push_back({"a", 100, 100, {{BBox{0, 0, 10, 10}, 0, std::nullopt}}});
  const auto r = evaluate(gt, gt);
  CHECK(r.overall.ap_large == kNoGroundTruth);
  CHECK(r.overall.ap_small == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.per_class[1].ap == kNoGroundTruth);
  const std::string table = format_report_table(r, "x", true);
  CHECK(table.find('-') != std::string::npos);
  CHECK(table.find("maxDets") != std::string::npos);
  CHECK(table.find("100.0") != std::string::npos);
}

TEST_CASE("id and vocabulary mismatches are errors") {
  Corpus gt{oracle::letters(2)};
  gt.layouts.push_back({"a", 100, 100, {}});
  gt.layouts.push_back({"b", 100, 100, {}});
  Corpus dets{oracle::letters(2)};
  dets.layouts.push_back({"a", 100, 100, {}});
  dets.layouts.push_back({"z", 100, 100, {}});
  try {
    evaluate(dets, gt);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("b") != std::string::npos);
    CHECK(msg.find("z") != std::string::npos);
  }
  Corpus other{oracle::letters(3)};
  other.layouts = gt.layouts;
  CHECK_THROWS_AS(evaluate(other, gt), ValidationError);
}

TEST_CASE("evaluation properties on random corpora") {
  Rng rng(71);
  for (int t = 0; t < 25; ++t) {
    auto [gt, dets] = random_eval_pair(rng, 6, 3);
    const auto r = evaluate(dets, gt);
    const auto values = r.overall.values();
    for (double v : values) CHECK((v == kNoGroundTruth || (v >= 0.0 && v <= 1.0)));

    // AP50 dominates AP
    if (r.overall.ap != kNoGroundTruth) CHECK(r.overall.ap50 >= r.overall.ap - 1e-12);

    // per-class AP averages to mAP
    double sum = 0.0;
    int n = 0;
    for (const auto& b : r.per_class)
      if (b.ap != kNoGroundTruth) {
        sum += b.ap;
        ++n;
      }
    if (n > 0) CHECK(std::abs(sum / n - r.overall.ap) <= 1e-9);

    // input order does not matter for distinct scores
    Corpus shuffled = dets;
    for (auto& d : shuffled.layouts) std::reverse(d.components.begin(), d.components.end());
    std::reverse(shuffled.layouts.begin(), shuffled.layouts.end());
    const auto rs = evaluate(shuffled, gt);
    for (std::size_t k = 0; k < 12; ++k) CHECK(rs.overall.values()[k] == doctest::Approx(values[k]).epsilon(1e-12));

    // a zero-overlap false positive never helps
    Corpus extra = dets;
    extra.layouts[0].components.push_back({BBox{490, 490, 500, 500}, 0, 0.999});
    bool clear = true;
    for (const auto& g : gt.layouts[0].components) clear = clear && iou(g.bbox, BBox{490, 490, 500, 500}) == 0.0;
    if (clear) {
      const auto re = evaluate(extra, gt);
      CHECK(re.overall.ap <= r.overall.ap + 1e-12);
      CHECK(re.overall.ap50 <= r.overall.ap50 + 1e-12);
      CHECK(re.overall.ap75 <= r.overall.ap75 + 1e-12);
    }

    // uniform scaling keeps IoU and therefore AP over all areas
    auto scale = [](Corpus c) {
      for (auto& d : c.layouts) {
        d.width *= 2;
        d.height *= 2;
        for (auto& comp : d.components) comp.bbox = {comp.bbox.x1 * 2, comp.bbox.y1 * 2, comp.bbox.x2 * 2, comp.bbox.y2 * 2};
      }
      return c;
    };
    const auto r2 = evaluate(scale(dets), scale(gt));
    CHECK(r2.overall.ap == doctest::Approx(r.overall.ap).epsilon(1e-12));
    CHECK(r2.overall.ap50 == doctest::Approx(r.overall.ap50).epsilon(1e-12));
    CHECK(r2.overall.ap75 == doctest::Approx(r.overall.ap75).epsilon(1e-12));
  }
}
