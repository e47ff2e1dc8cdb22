// SPDX-License-Identifier: Apache-2.0
//
// COCO-criterion box evaluation: greedy score-ordered matching per image and
// class, 101-point interpolated precision, AP over IoU 0.50:0.95 and AR at
// 1/10/100 detections, each also sliced by object area.
#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "layoutprior/geometry.hpp"
#include "layoutprior/ingest.hpp"

namespace layoutprior {

/// Value reported for a slice without ground truth.
inline constexpr double kNoGroundTruth = -1.0;

/// numpy.linspace(start, stop, n) bit-for-bit: start + i * step, last == stop.
std::vector<double> linspace(double start, double stop, std::size_t n);

/// Object area slice, half-open [lo, hi).
struct AreaRange {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double area) const { return area >= lo && area < hi; }
};

struct EvalConfig {
  std::vector<double> iou_thresholds = linspace(0.5, 0.95, 10);
  std::vector<double> recall_points = linspace(0.0, 1.0, 101);
  std::vector<AreaRange> area_ranges = default_area_ranges();
  std::vector<std::size_t> max_dets = {1, 10, 100};

  static std::vector<AreaRange> default_area_ranges();
  void validate() const;
};

/// The twelve numbers of one report row.
struct MetricBlock {
  double ap = kNoGroundTruth;
  double ap50 = kNoGroundTruth;
  double ap75 = kNoGroundTruth;
  double ap_small = kNoGroundTruth;
  double ap_medium = kNoGroundTruth;
  double ap_large = kNoGroundTruth;
  double ar1 = kNoGroundTruth;
  double ar10 = kNoGroundTruth;
  double ar100 = kNoGroundTruth;
  double ar_small = kNoGroundTruth;
  double ar_medium = kNoGroundTruth;
  double ar_large = kNoGroundTruth;

  std::array<double, 12> values() const;
  static const std::array<const char*, 12>& names();
};

struct EvalReport {
  MetricBlock overall;
  std::vector<std::string> class_names;
  std::vector<MetricBlock> per_class;
};

struct ScoredBox {
  BBox box;
  double score = 1.0;
};

struct MatchResult {
  std::vector<std::size_t> order;  // input indices of kept detections, best score first
  std::vector<bool> true_positive;  // aligned with order
  std::vector<long> matched_gt;     // aligned with order; -1 when unmatched
};

/// Greedy matching of one image / one class at a single IoU threshold.
MatchResult match(std::span<const ScoredBox> detections, std::span<const BBox> ground_truth,
                  double iou_threshold, std::size_t max_dets);

struct PrecisionRecall {
  std::vector<double> precision;  // sampled at the recall points
  double recall = 0.0;            // final recall
  double ap = kNoGroundTruth;     // mean of sampled precision; sentinel when n_gt == 0
};

/// Flags are true-positive markers in descending score order.
PrecisionRecall precision_recall(std::span<const bool> flags, std::size_t n_gt,
                                 std::span<const double> recall_points);
PrecisionRecall precision_recall(std::span<const bool> flags, std::size_t n_gt);

/// Detections without a score count as score 1. Vocabularies and layout id
/// sets must agree.
EvalReport evaluate(const Corpus& detections, const Corpus& ground_truth,
                    const EvalConfig& config = {});

nlohmann::json report_to_json(const EvalReport& report);
/// Fixed-width table in percent, shaped like the usual AP/AR result tables.
std::string format_report_table(const EvalReport& report, const std::string& label = "result",
                                bool per_class = false);

}  // namespace layoutprior
