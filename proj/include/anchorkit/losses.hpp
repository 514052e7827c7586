#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "anchorkit/box.hpp"
#include "anchorkit/grid.hpp"
#include "anchorkit/targets.hpp"

namespace anchorkit {

inline double smooth_l1(double x, double beta = 1.0) {
  const double a = std::abs(x);
  return a < beta ? 0.5 * x * x / beta : a - 0.5 * beta;
}

/// Shape loss on the per-axis size ratios; zero exactly at pred == gt and
/// invariant to rescaling both shapes by a common factor.
inline double bounded_iou_loss(const Size& pred, const Size& gt, double beta = 1.0) {
  const double rw = std::min(pred.w / gt.w, gt.w / pred.w);
  const double rh = std::min(pred.h / gt.h, gt.h / pred.h);
  return smooth_l1(1.0 - rw, beta) + smooth_l1(1.0 - rh, beta);
}

struct FocalParams {
  double alpha = 0.25;
  double gamma = 2.0;
};

struct ProbabilityMap {
  int level = 0;
  Grid<double> p;
};

/// Focal loss over one location-target map, summed over non-ignored cells in
/// row-major order and normalized by the positive count (floor 1). Ignored
/// cells contribute nothing at all. Probabilities are clamped to
/// [1e-12, 1 - 1e-12] before the logs.
inline double focal_loss_map(const ProbabilityMap& pred, const LocationTargetMap& target,
                             const FocalParams& params = {}) {
  if (!pred.p.same_shape_as(target.labels)) {
    throw std::invalid_argument("focal_loss_map: prediction and target dimensions differ");
  }
  constexpr double kClamp = 1e-12;
  double sum = 0.0;
  long positives = 0;
  for (int j = 0; j < target.labels.height; ++j) {
    for (int i = 0; i < target.labels.width; ++i) {
      const CellLabel label = target.labels.at(i, j);
      if (label == CellLabel::kIgnore) continue;
      const double p = std::clamp(pred.p.at(i, j), kClamp, 1.0 - kClamp);
      if (label == CellLabel::kPositive) {
        sum += -params.alpha * std::pow(1.0 - p, params.gamma) * std::log(p);
        ++positives;
      } else {
        sum += -(1.0 - params.alpha) * std::pow(p, params.gamma) * std::log(1.0 - p);
      }
    }
  }
  return sum / static_cast<double>(std::max<long>(positives, 1));
}

struct LossWeights {
  double lambda1 = 1.0;
  double lambda2 = 0.1;
};

/// Combined objective: lambda1 * location + lambda2 * shape + cls + reg.
/// The classification and box-regression terms are opaque scalars here.
inline double joint_loss(double l_loc, double l_shape, double l_cls, double l_reg,
                         const LossWeights& w = {}) {
  return w.lambda1 * l_loc + w.lambda2 * l_shape + l_cls + l_reg;
}

}  // namespace anchorkit
