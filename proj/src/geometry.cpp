// SPDX-License-Identifier: Apache-2.0
#include "layoutprior/geometry.hpp"

#include <algorithm>

namespace layoutprior {

double iou(const BBox& a, const BBox& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  const double inter = (iw > 0.0 && ih > 0.0) ? iw * ih : 0.0;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

BBox clamp_to_canvas(const BBox& box, double width, double height) {
  auto clamp = [](double v, double hi) { return std::clamp(v, 0.0, hi); };
  return BBox{clamp(box.x1, width), clamp(box.y1, height), clamp(box.x2, width),
              clamp(box.y2, height)};
}

}  // namespace layoutprior
