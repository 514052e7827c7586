#pragma once

#include <algorithm>
#include <cmath>

namespace anchorkit {

/// Center-form rectangle: (x, y) is the box center, in image pixels.
struct Box {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double left() const { return x - 0.5 * w; }
  double right() const { return x + 0.5 * w; }
  double top() const { return y - 0.5 * h; }
  double bottom() const { return y + 0.5 * h; }
  double area() const { return w * h; }
  double scale() const { return std::sqrt(w * h); }
  double aspect_ratio() const { return h / w; }

  bool valid() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) &&
           std::isfinite(h) && w > 0.0 && h > 0.0;
  }
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Size {
  double w = 0.0;
  double h = 0.0;
};

/// Intersection over union of two center-form boxes.
/// Degenerate (empty) intersections yield exactly 0.
inline double iou(const Box& a, const Box& b) {
  const double ix = std::min(a.right(), b.right()) - std::max(a.left(), b.left());
  const double iy = std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top());
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  return inter / (a.area() + b.area() - inter);
}

/// Image-space center of feature cell (i, j) on a map with the given stride.
inline Point anchor_center(int i, int j, double stride) {
  return {(i + 0.5) * stride, (j + 0.5) * stride};
}

/// Log-space shape offsets relative to the per-level base size sigma * stride.
struct ShapeDelta {
  double dw = 0.0;
  double dh = 0.0;
};

inline Size decode_shape(const ShapeDelta& d, double stride, double sigma) {
  return {sigma * stride * std::exp(d.dw), sigma * stride * std::exp(d.dh)};
}

/// Inverse of decode_shape; requires w, h > 0.
inline ShapeDelta encode_shape(double w, double h, double stride, double sigma) {
  return {std::log(w / (sigma * stride)), std::log(h / (sigma * stride))};
}

}  // namespace anchorkit
