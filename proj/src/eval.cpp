// SPDX-License-Identifier: Apache-2.0
#include "layoutprior/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "layoutprior/error.hpp"

namespace layoutprior {

namespace {

// numpy.spacing(1): added to the precision denominator by the reference criterion.
constexpr double kPrecisionEps = 2.220446049250313e-16;

struct ImageEval {
  std::vector<double> scores;                      // descending, capped at the largest maxDets
  std::vector<std::vector<std::uint8_t>> matched;  // [threshold][detection]
  std::vector<std::vector<std::uint8_t>> ignored;  // [threshold][detection]
  std::size_t gt_counted = 0;                      // ground truth inside the area range
};

std::vector<std::size_t> score_order(std::span<const ScoredBox> dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
  return order;
}

// One image, one class, one area range. `gt_ignored` flags ground truth
// outside the range; unmatched detections outside the range are ignored too.
ImageEval evaluate_image(std::span<const ScoredBox> dets, std::span<const BBox> gts,
                         std::span<const double> thresholds, const AreaRange* area,
                         std::size_t max_det, std::vector<long>* matched_gt_out = nullptr) {
  std::vector<std::uint8_t> gt_ignored(gts.size(), 0);
  for (std::size_t g = 0; g < gts.size(); ++g) {
    gt_ignored[g] = area && !area->contains(gts[g].area()) ? 1 : 0;
  }
  // Ground truth in range first, stable.
  std::vector<std::size_t> gt_order(gts.size());
  std::iota(gt_order.begin(), gt_order.end(), 0);
  std::stable_sort(gt_order.begin(), gt_order.end(),
                   [&](std::size_t a, std::size_t b) { return gt_ignored[a] < gt_ignored[b]; });

  std::vector<std::size_t> det_order = score_order(dets);
  if (det_order.size() > max_det) det_order.resize(max_det);

  ImageEval out;
  for (std::size_t d : det_order) out.scores.push_back(dets[d].score);
  for (auto g : gt_ignored) out.gt_counted += g ? 0 : 1;

  const std::size_t nd = det_order.size();
  const std::size_t ng = gt_order.size();
  std::vector<double> ious(nd * ng);
  for (std::size_t d = 0; d < nd; ++d) {
    for (std::size_t g = 0; g < ng; ++g) ious[d * ng + g] = iou(dets[det_order[d]].box, gts[gt_order[g]]);
  }

  out.matched.assign(thresholds.size(), std::vector<std::uint8_t>(nd, 0));
  out.ignored.assign(thresholds.size(), std::vector<std::uint8_t>(nd, 0));
  if (matched_gt_out) matched_gt_out->assign(nd, -1);
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    std::vector<std::uint8_t> gt_taken(ng, 0);
    for (std::size_t d = 0; d < nd; ++d) {
      double best = std::min(thresholds[t], 1.0 - 1e-10);
      long m = -1;
      for (std::size_t g = 0; g < ng; ++g) {
        if (gt_taken[g]) continue;
        if (m > -1 && !gt_ignored[gt_order[static_cast<std::size_t>(m)]] && gt_ignored[gt_order[g]]) break;
        if (ious[d * ng + g] < best) continue;
        best = ious[d * ng + g];
        m = static_cast<long>(g);
      }
      if (m == -1) continue;
      gt_taken[static_cast<std::size_t>(m)] = 1;
      out.matched[t][d] = 1;
      out.ignored[t][d] = gt_ignored[gt_order[static_cast<std::size_t>(m)]];
      if (matched_gt_out && t == 0) {
        (*matched_gt_out)[d] = static_cast<long>(gt_order[static_cast<std::size_t>(m)]);
      }
    }
    if (area) {
      for (std::size_t d = 0; d < nd; ++d) {
        if (!out.matched[t][d] && !area->contains(dets[det_order[d]].box.area())) out.ignored[t][d] = 1;
      }
    }
  }
  return out;
}

// Precision sampled at recall points from cumulative counts, following the
// reference criterion: non-increasing envelope from the right, then the first
// curve point whose recall reaches each sample point.
void sample_curve(std::span<const double> tp_cum, std::span<const double> fp_cum, std::size_t npig,
                  std::span<const double> recall_points, std::vector<double>& precision_out,
                  double& recall_out) {
  const std::size_t nd = tp_cum.size();
  std::vector<double> rc(nd), pr(nd);
  for (std::size_t i = 0; i < nd; ++i) {
    rc[i] = tp_cum[i] / static_cast<double>(npig);
    pr[i] = tp_cum[i] / (fp_cum[i] + tp_cum[i] + kPrecisionEps);
  }
  recall_out = nd ? rc.back() : 0.0;
  for (std::size_t i = nd; i-- > 1;) {
    if (pr[i] > pr[i - 1]) pr[i - 1] = pr[i];
  }
  precision_out.assign(recall_points.size(), 0.0);
  for (std::size_t r = 0; r < recall_points.size(); ++r) {
    const auto it = std::lower_bound(rc.begin(), rc.end(), recall_points[r]);
    if (it == rc.end()) break;
    precision_out[r] = pr[static_cast<std::size_t>(it - rc.begin())];
  }
}

double mean_of_valid(const std::vector<double>& values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double v : values) {
    if (v > -1.0) {
      sum += v;
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : kNoGroundTruth;
}

std::optional<std::size_t> find_threshold(const std::vector<double>& thresholds, double value) {
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    if (std::abs(thresholds[t] - value) < 1e-12) return t;
  }
  return std::nullopt;
}

}  // namespace

std::vector<double> linspace(double start, double stop, std::size_t n) {
  std::vector<double> out(n);
  if (n == 0) return out;
  if (n == 1) {
    out[0] = start;
    return out;
  }
  const double step = (stop - start) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(i) * step + start;
  out[n - 1] = stop;
  return out;
}

std::vector<AreaRange> EvalConfig::default_area_ranges() {
  const double inf = std::numeric_limits<double>::infinity();
  return {{"all", 0.0, inf},
          {"small", 0.0, 32.0 * 32.0},
          {"medium", 32.0 * 32.0, 96.0 * 96.0},
          {"large", 96.0 * 96.0, inf}};
}

void EvalConfig::validate() const {
  if (iou_thresholds.empty()) throw ValidationError("eval: no IoU thresholds");
  for (std::size_t i = 0; i < iou_thresholds.size(); ++i) {
    if (!(iou_thresholds[i] > 0.0 && iou_thresholds[i] <= 1.0)) {
      throw ValidationError("eval: IoU thresholds must lie in (0,1]");
    }
    if (i > 0 && !(iou_thresholds[i] > iou_thresholds[i - 1])) {
      throw ValidationError("eval: IoU thresholds must be strictly increasing");
    }
  }
  if (recall_points.empty()) throw ValidationError("eval: no recall points");
  if (max_dets.empty() || !std::is_sorted(max_dets.begin(), max_dets.end())) {
    throw ValidationError("eval: max_dets must be non-empty and ascending");
  }
  if (area_ranges.empty()) throw ValidationError("eval: no area ranges");
}

std::array<double, 12> MetricBlock::values() const {
  return {ap, ap50, ap75, ap_small, ap_medium, ap_large,
          ar1, ar10, ar100, ar_small, ar_medium, ar_large};
}

const std::array<const char*, 12>& MetricBlock::names() {
  static const std::array<const char*, 12> n = {"AP",  "AP50", "AP75",  "APs",  "APm",  "APl",
                                                "AR1", "AR10", "AR100", "ARs", "ARm", "ARl"};
  return n;
}

MatchResult match(std::span<const ScoredBox> detections, std::span<const BBox> ground_truth,
                  double iou_threshold, std::size_t max_dets) {
  const double thresholds[] = {iou_threshold};
  std::vector<long> matched_gt;
  const ImageEval e =
      evaluate_image(detections, ground_truth, thresholds, nullptr, max_dets, &matched_gt);
  MatchResult out;
  out.order = score_order(detections);
  if (out.order.size() > max_dets) out.order.resize(max_dets);
  for (std::size_t d = 0; d < out.order.size(); ++d) out.true_positive.push_back(e.matched[0][d] != 0);
  out.matched_gt = std::move(matched_gt);
  return out;
}

PrecisionRecall precision_recall(std::span<const bool> flags, std::size_t n_gt,
                                 std::span<const double> recall_points) {
  PrecisionRecall out;
  if (n_gt == 0) {
    out.precision.assign(recall_points.size(), kNoGroundTruth);
    out.recall = kNoGroundTruth;
    return out;
  }
  std::vector<double> tp(flags.size()), fp(flags.size());
  double t = 0.0, f = 0.0;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    (flags[i] ? t : f) += 1.0;
    tp[i] = t;
    fp[i] = f;
  }
  sample_curve(tp, fp, n_gt, recall_points, out.precision, out.recall);
  out.ap = mean_of_valid(out.precision);
  return out;
}

PrecisionRecall precision_recall(std::span<const bool> flags, std::size_t n_gt) {
  static const std::vector<double> points = linspace(0.0, 1.0, 101);
  return precision_recall(flags, n_gt, points);
}

EvalReport evaluate(const Corpus& detections, const Corpus& ground_truth, const EvalConfig& config) {
  config.validate();
  if (!(detections.vocabulary == ground_truth.vocabulary)) {
    throw ValidationError("eval: detection and ground-truth vocabularies differ");
  }
  std::unordered_map<std::string, const LayoutDocument*> det_by_id;
  for (const auto& doc : detections.layouts) det_by_id.emplace(doc.id, &doc);
  {
    std::string missing_dets, missing_gts;
    std::unordered_map<std::string, bool> gt_ids;
    for (const auto& doc : ground_truth.layouts) {
      gt_ids.emplace(doc.id, true);
      if (!det_by_id.count(doc.id)) missing_dets += (missing_dets.empty() ? "" : ",") + doc.id;
    }
    for (const auto& doc : detections.layouts) {
      if (!gt_ids.count(doc.id)) missing_gts += (missing_gts.empty() ? "" : ",") + doc.id;
    }
    if (!missing_dets.empty() || !missing_gts.empty()) {
      throw ValidationError("eval: layout id sets differ; missing from detections: [" +
                            missing_dets + "]; missing from ground truth: [" + missing_gts + "]");
    }
  }

  const std::size_t n_classes = ground_truth.vocabulary.size();
  const std::size_t n_images = ground_truth.layouts.size();
  const std::size_t T = config.iou_thresholds.size();
  const std::size_t R = config.recall_points.size();
  const std::size_t A = config.area_ranges.size();
  const std::size_t M = config.max_dets.size();
  const std::size_t max_det = config.max_dets.back();

  // Per image, per class: ground truth boxes and scored detections, input order.
  std::vector<std::vector<std::vector<BBox>>> gts(n_images, std::vector<std::vector<BBox>>(n_classes));
  std::vector<std::vector<std::vector<ScoredBox>>> dts(n_images,
                                                       std::vector<std::vector<ScoredBox>>(n_classes));
  for (std::size_t i = 0; i < n_images; ++i) {
    const auto& gt_doc = ground_truth.layouts[i];
    for (const auto& c : gt_doc.components) gts[i][c.class_id].push_back(c.bbox);
    for (const auto& c : det_by_id.at(gt_doc.id)->components) {
      if (c.class_id >= n_classes) throw ValidationError("eval: detection class id out of range");
      dts[i][c.class_id].push_back(ScoredBox{c.bbox, c.score.value_or(1.0)});
    }
  }

  // precision[((k*A + a)*M + m)*T*R + t*R + r], recall[((k*A + a)*M + m)*T + t]
  std::vector<double> precision(n_classes * A * M * T * R, kNoGroundTruth);
  std::vector<double> recall(n_classes * A * M * T, kNoGroundTruth);

  for (std::size_t k = 0; k < n_classes; ++k) {
    for (std::size_t a = 0; a < A; ++a) {
      std::vector<ImageEval> evals;
      for (std::size_t i = 0; i < n_images; ++i) {
        if (gts[i][k].empty() && dts[i][k].empty()) continue;
        evals.push_back(evaluate_image(dts[i][k], gts[i][k], config.iou_thresholds,
                                       &config.area_ranges[a], max_det));
      }
      if (evals.empty()) continue;
      std::size_t npig = 0;
      for (const auto& e : evals) npig += e.gt_counted;
      if (npig == 0) continue;

      for (std::size_t m = 0; m < M; ++m) {
        const std::size_t cap = config.max_dets[m];
        struct Ref {
          std::size_t eval, det;
        };
        std::vector<Ref> refs;
        std::vector<double> scores;
        for (std::size_t e = 0; e < evals.size(); ++e) {
          const std::size_t n = std::min(cap, evals[e].scores.size());
          for (std::size_t d = 0; d < n; ++d) {
            refs.push_back({e, d});
            scores.push_back(evals[e].scores[d]);
          }
        }
        std::vector<std::size_t> order(refs.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t x, std::size_t y) { return scores[x] > scores[y]; });

        const std::size_t block = (k * A + a) * M + m;
        std::vector<double> tp_cum, fp_cum, sampled;
        for (std::size_t t = 0; t < T; ++t) {
          tp_cum.clear();
          fp_cum.clear();
          double tp = 0.0, fp = 0.0;
          for (std::size_t o : order) {
            const auto& e = evals[refs[o].eval];
            const std::size_t d = refs[o].det;
            if (e.ignored[t][d]) {
              // Ignored detections keep their slot in the cumulative curve.
            } else if (e.matched[t][d]) {
              tp += 1.0;
            } else {
              fp += 1.0;
            }
            tp_cum.push_back(tp);
            fp_cum.push_back(fp);
          }
          double rc = 0.0;
          sample_curve(tp_cum, fp_cum, npig, config.recall_points, sampled, rc);
          recall[block * T + t] = rc;
          std::copy(sampled.begin(), sampled.end(), precision.begin() + static_cast<long>((block * T + t) * R));
        }
      }
    }
  }

  auto area_index = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t a = 0; a < A; ++a) {
      if (config.area_ranges[a].name == name) return a;
    }
    return std::nullopt;
  };
  auto maxdet_index = [&](std::size_t value) -> std::optional<std::size_t> {
    for (std::size_t m = 0; m < M; ++m) {
      if (config.max_dets[m] == value) return m;
    }
    return std::nullopt;
  };

  // Mean over thresholds (all, or one), recall points and the given classes.
  auto summarize_ap = [&](std::span<const std::size_t> classes, std::optional<double> thr,
                          const std::string& area, std::size_t mi) {
    auto a = area_index(area);
    if (!a) return kNoGroundTruth;
    std::optional<std::size_t> ti;
    if (thr) {
      ti = find_threshold(config.iou_thresholds, *thr);
      if (!ti) return kNoGroundTruth;
    }
    std::vector<double> vals;
    for (std::size_t k : classes) {
      const std::size_t block = (k * A + *a) * M + mi;
      for (std::size_t t = 0; t < T; ++t) {
        if (ti && t != *ti) continue;
        const auto first = precision.begin() + static_cast<long>((block * T + t) * R);
        vals.insert(vals.end(), first, first + static_cast<long>(R));
      }
    }
    return mean_of_valid(vals);
  };
  auto summarize_ar = [&](std::span<const std::size_t> classes, const std::string& area,
                          std::optional<std::size_t> mi) {
    auto a = area_index(area);
    if (!a || !mi) return kNoGroundTruth;
    std::vector<double> vals;
    for (std::size_t k : classes) {
      const std::size_t block = (k * A + *a) * M + *mi;
      for (std::size_t t = 0; t < T; ++t) vals.push_back(recall[block * T + t]);
    }
    return mean_of_valid(vals);
  };
  auto block_for = [&](std::span<const std::size_t> classes) {
    const std::size_t last = M - 1;
    MetricBlock b;
    b.ap = summarize_ap(classes, std::nullopt, "all", last);
    b.ap50 = summarize_ap(classes, 0.5, "all", last);
    b.ap75 = summarize_ap(classes, 0.75, "all", last);
    b.ap_small = summarize_ap(classes, std::nullopt, "small", last);
    b.ap_medium = summarize_ap(classes, std::nullopt, "medium", last);
    b.ap_large = summarize_ap(classes, std::nullopt, "large", last);
    b.ar1 = summarize_ar(classes, "all", maxdet_index(1));
    b.ar10 = summarize_ar(classes, "all", maxdet_index(10));
    b.ar100 = summarize_ar(classes, "all", maxdet_index(100));
    b.ar_small = summarize_ar(classes, "small", last);
    b.ar_medium = summarize_ar(classes, "medium", last);
    b.ar_large = summarize_ar(classes, "large", last);
    return b;
  };

  EvalReport report;
  std::vector<std::size_t> all_classes(n_classes);
  std::iota(all_classes.begin(), all_classes.end(), 0);
  report.overall = block_for(all_classes);
  report.class_names = ground_truth.vocabulary.names();
  for (std::size_t k = 0; k < n_classes; ++k) {
    const std::size_t one[] = {k};
    report.per_class.push_back(block_for(one));
  }
  return report;
}

nlohmann::json report_to_json(const EvalReport& report) {
  auto block_json = [](const MetricBlock& b) {
    nlohmann::json j;
    const auto values = b.values();
    for (std::size_t i = 0; i < values.size(); ++i) j[MetricBlock::names()[i]] = values[i];
    return j;
  };
  nlohmann::json j;
  j["overall"] = block_json(report.overall);
  j["per_class"] = nlohmann::json::object();
  for (std::size_t k = 0; k < report.per_class.size(); ++k) {
    j["per_class"][report.class_names[k]] = block_json(report.per_class[k]);
  }
  return j;
}

std::string format_report_table(const EvalReport& report, const std::string& label, bool per_class) {
  std::size_t width = std::max<std::size_t>(label.size(), 8);
  if (per_class) {
    for (const auto& n : report.class_names) width = std::max(width, n.size());
  }
  auto cell = [](double v) {
    char buf[16];
    if (v <= -1.0) {
      std::snprintf(buf, sizeof buf, "%7s", "-");
    } else {
      std::snprintf(buf, sizeof buf, "%7.1f", 100.0 * v);
    }
    return std::string(buf);
  };
  auto head = [&](const std::string& name, const std::array<const char*, 12>& cols) {
    std::string line = name + std::string(width - name.size(), ' ');
    for (const char* c : cols) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "%7s", c);
      line += buf;
    }
    return line + "\n";
  };
  std::ostringstream out;
  out << head("Method", {"AP", "AP50", "AP75", "APs", "APm", "APl", "AR", "AR", "AR", "ARs", "ARm", "ARl"});
  out << head("@IoU", {"0.5:95", "0.5", "0.75", "0.5:95", "0.5:95", "0.5:95", "0.5:95", "0.5:95",
                       "0.5:95", "0.5:95", "0.5:95", "0.5:95"});
  out << head("maxDets", {"100", "100", "100", "100", "100", "100", "1", "10", "100", "100", "100", "100"});
  auto row = [&](const std::string& name, const MetricBlock& b) {
    out << name << std::string(width - name.size(), ' ');
    for (double v : b.values()) out << cell(v);
    out << "\n";
  };
  row(label, report.overall);
  if (per_class) {
    for (std::size_t k = 0; k < report.per_class.size(); ++k) row(report.class_names[k], report.per_class[k]);
  }
  return out.str();
}

}  // namespace layoutprior
