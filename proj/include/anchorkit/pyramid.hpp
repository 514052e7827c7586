#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "anchorkit/box.hpp"

namespace anchorkit {

struct PyramidLevel {
  int index = 0;
  double stride = 0.0;
  int grid_w = 0;
  int grid_h = 0;
};

/// Ordered feature levels plus the shape-transform scale factor (sigma) and
/// the center/ignore region fractions (sigma1 < sigma2).
struct PyramidConfig {
  std::vector<PyramidLevel> levels;
  double sigma = 8.0;
  double sigma1 = 0.2;
  double sigma2 = 0.5;
};

inline PyramidConfig make_pyramid(const std::vector<double>& strides, int image_w,
                                  int image_h, double sigma = 8.0,
                                  double sigma1 = 0.2, double sigma2 = 0.5) {
  if (strides.empty()) throw std::invalid_argument("make_pyramid: no strides");
  if (image_w < 1 || image_h < 1)
    throw std::invalid_argument("make_pyramid: image dimensions must be positive");
  if (!(sigma > 0.0)) throw std::invalid_argument("make_pyramid: sigma must be positive");
  if (!(sigma1 > 0.0 && sigma1 < sigma2 && sigma2 <= 1.0))
    throw std::invalid_argument("make_pyramid: need 0 < sigma1 < sigma2 <= 1");

  PyramidConfig cfg;
  cfg.sigma = sigma;
  cfg.sigma1 = sigma1;
  cfg.sigma2 = sigma2;
  double prev = 0.0;
  for (std::size_t k = 0; k < strides.size(); ++k) {
    const double s = strides[k];
    if (!(s > prev))
      throw std::invalid_argument("make_pyramid: strides must be positive and strictly increasing");
    prev = s;
    PyramidLevel lv;
    lv.index = static_cast<int>(k);
    lv.stride = s;
    lv.grid_w = static_cast<int>(std::ceil(image_w / s));
    lv.grid_h = static_cast<int>(std::ceil(image_h / s));
    cfg.levels.push_back(lv);
  }
  return cfg;
}

/// One annotated image; the box index doubles as the object id.
struct GroundTruthScene {
  int image_w = 0;
  int image_h = 0;
  std::vector<Box> boxes;
};

/// Image-space box rescaled into the level's feature units.
inline Box project_to_level(const Box& b, const PyramidLevel& level) {
  return {b.x / level.stride, b.y / level.stride, b.w / level.stride, b.h / level.stride};
}

/// Level whose zero-delta anchor size sigma * stride is nearest the box scale
/// in log2; ties go to the finer level.
inline int assign_level(const Box& b, const PyramidConfig& cfg) {
  const double target = 0.5 * std::log2(b.w * b.h);
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const PyramidLevel& lv : cfg.levels) {
    const double dist = std::abs(target - std::log2(cfg.sigma * lv.stride));
    if (dist < best_dist) {
      best_dist = dist;
      best = lv.index;
    }
  }
  return best;
}

}  // namespace anchorkit
