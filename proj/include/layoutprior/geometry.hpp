// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace layoutprior {

/// Axis-aligned box in pixels, origin top-left, y growing downward.
/// Zero-area boxes are legal.
struct BBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  double center_x() const { return (x1 + x2) / 2.0; }
  double center_y() const { return (y1 + y2) / 2.0; }
  bool valid() const { return x1 <= x2 && y1 <= y2; }

  bool operator==(const BBox&) const = default;
};

/// Intersection over union; 0 when the union has no area.
double iou(const BBox& a, const BBox& b);

/// Clamp a box into [0,width]x[0,height].
BBox clamp_to_canvas(const BBox& box, double width, double height);

}  // namespace layoutprior
