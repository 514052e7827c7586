#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <vector>

#include "anchorkit/box.hpp"

namespace anchorkit {

/// Candidate (w, h) pairs for approximating the best IoU reachable by a
/// variable-shape anchor pinned at a fixed center.
struct SamplePairSet {
  std::vector<Size> pairs;
};

enum class SamplePreset { kThree, kNine, kFifteen };

/// Scale/aspect-ratio sample pairs for one feature level. The nine-pair
/// preset crosses three octave-fraction scales with aspect ratios
/// {1/2, 1, 2} around the base size 4 * stride; the three- and fifteen-pair
/// presets shrink or extend the scale list in log space, so the presets nest.
inline SamplePairSet sample_pairs(double stride, double sigma,
                                  SamplePreset preset = SamplePreset::kNine) {
  const double third = 1.0 / 3.0;
  std::vector<double> scales;
  switch (preset) {
    case SamplePreset::kThree:
      scales = {1.0};
      break;
    case SamplePreset::kNine:
      scales = {1.0, std::exp2(third), std::exp2(2.0 * third)};
      break;
    case SamplePreset::kFifteen:
      scales = {std::exp2(-third), 1.0, std::exp2(third), std::exp2(2.0 * third), 2.0};
      break;
  }
  const std::array<double, 3> ratios = {0.5, 1.0, 2.0};
  const double base = 0.5 * sigma * stride;
  SamplePairSet out;
  out.pairs.reserve(scales.size() * ratios.size());
  for (double scale : scales) {
    for (double ratio : ratios) {
      const double root = std::sqrt(ratio);
      out.pairs.push_back({base * scale / root, base * scale * root});
    }
  }
  return out;
}

inline SamplePairSet retinanet_sample_pairs(double stride, double sigma) {
  return sample_pairs(stride, sigma, SamplePreset::kNine);
}

/// Best IoU against gt over the sampled shapes only, anchor center fixed.
/// Lower-bounds brute_force_viou.
inline double sampled_viou(Point center, const Box& gt, const SamplePairSet& samples) {
  double best = 0.0;
  for (const Size& s : samples.pairs) {
    best = std::max(best, iou(Box{center.x, center.y, s.w, s.h}, gt));
  }
  return best;
}

/// Log-spaced search window for the dense shape-search oracle.
struct GridSearchSpec {
  double w_min = 0.0;
  double w_max = 0.0;
  double h_min = 0.0;
  double h_max = 0.0;
  int steps_per_axis = 256;

  /// Window wide enough to bracket the optimum for this (center, gt) pair:
  /// [dim/8, 8*dim + 2*|per-axis center offset|].
  static GridSearchSpec covering(Point center, const Box& gt, int steps = 256) {
    GridSearchSpec spec;
    spec.w_min = gt.w / 8.0;
    spec.w_max = 8.0 * gt.w + 2.0 * std::abs(center.x - gt.x);
    spec.h_min = gt.h / 8.0;
    spec.h_max = 8.0 * gt.h + 2.0 * std::abs(center.y - gt.y);
    spec.steps_per_axis = steps;
    return spec;
  }
};

namespace detail {

// Dimensions at which an edge of the centered anchor coincides with an edge
// of gt. Between consecutive contact dimensions the IoU is monotone in that
// dimension, so the exact optimum of the shape search lies on a contact pair.
inline std::vector<double> edge_contact_dims(double center, double gt_center,
                                             double gt_dim) {
  const std::array<double, 4> raw = {
      2.0 * (gt_center - 0.5 * gt_dim - center),
      2.0 * (gt_center + 0.5 * gt_dim - center),
      2.0 * (center - gt_center + 0.5 * gt_dim),
      2.0 * (center - gt_center - 0.5 * gt_dim)};
  std::vector<double> out;
  for (double v : raw) {
    if (v > 0.0) out.push_back(v);
  }
  return out;
}

}  // namespace detail

/// Dense oracle for the variable-shape IoU maximum: max IoU over a log-spaced
/// (w, h) grid plus the edge-contact candidates that pin the true optimum.
inline double brute_force_viou(Point center, const Box& gt, const GridSearchSpec& spec) {
  assert(spec.w_min > 0.0 && spec.w_max >= spec.w_min);
  assert(spec.h_min > 0.0 && spec.h_max >= spec.h_min);
  assert(spec.steps_per_axis >= 1);

  const auto shape_iou = [&](double w, double h) {
    return iou(Box{center.x, center.y, w, h}, gt);
  };

  const int n = spec.steps_per_axis;
  std::vector<double> ws(n), hs(n);
  const double lw0 = std::log(spec.w_min), lw1 = std::log(spec.w_max);
  const double lh0 = std::log(spec.h_min), lh1 = std::log(spec.h_max);
  for (int k = 0; k < n; ++k) {
    const double t = (n == 1) ? 0.0 : static_cast<double>(k) / (n - 1);
    ws[k] = std::exp(lw0 + t * (lw1 - lw0));
    hs[k] = std::exp(lh0 + t * (lh1 - lh0));
  }

  double best = 0.0;
  for (double w : ws) {
    for (double h : hs) best = std::max(best, shape_iou(w, h));
  }
  for (double w : detail::edge_contact_dims(center.x, gt.x, gt.w)) {
    for (double h : detail::edge_contact_dims(center.y, gt.y, gt.h)) {
      best = std::max(best, shape_iou(w, h));
    }
  }
  return best;
}

inline double brute_force_viou(Point center, const Box& gt) {
  return brute_force_viou(center, gt, GridSearchSpec::covering(center, gt));
}

}  // namespace anchorkit
