#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "anchorkit/box.hpp"
#include "anchorkit/grid.hpp"
#include "anchorkit/losses.hpp"
#include "anchorkit/pyramid.hpp"
#include "anchorkit/targets.hpp"

namespace anchorkit {

struct ShapeMap {
  int level = 0;
  Grid<ShapeDelta> deltas;
};

/// Stand-in for learned location/shape branches: one probability map and one
/// shape map per pyramid level.
struct PredictorOutput {
  std::vector<ProbabilityMap> probabilities;
  std::vector<ShapeMap> shapes;
};

enum class Scheme { kSlidingWindow, kGuided };

struct Anchor {
  int level = 0;
  int i = 0;
  int j = 0;
  Box box;
  double score = 1.0;
};

struct AnchorSet {
  Scheme scheme = Scheme::kSlidingWindow;
  std::vector<Anchor> anchors;
};

namespace detail {

// Deterministic total order used by nms and top_k: score descending, then
// (level, j, i) ascending.
inline bool anchor_order(const Anchor& a, const Anchor& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.level != b.level) return a.level < b.level;
  if (a.j != b.j) return a.j < b.j;
  return a.i < b.i;
}

inline void check_predictor_shape(const PredictorOutput& pred, const PyramidConfig& cfg) {
  if (pred.probabilities.size() != cfg.levels.size() ||
      pred.shapes.size() != cfg.levels.size()) {
    throw std::invalid_argument("predictor output level count does not match the pyramid");
  }
  for (std::size_t l = 0; l < cfg.levels.size(); ++l) {
    const PyramidLevel& lv = cfg.levels[l];
    if (pred.probabilities[l].p.width != lv.grid_w ||
        pred.probabilities[l].p.height != lv.grid_h ||
        pred.shapes[l].deltas.width != lv.grid_w ||
        pred.shapes[l].deltas.height != lv.grid_h) {
      throw std::invalid_argument("predictor map dimensions do not match the pyramid");
    }
  }
}

}  // namespace detail

/// Classic dense baseline: |scales| * |ratios| anchors on every cell of every
/// level, base size sigma * stride, uniform unit scores. For a ratio r = h/w,
/// w = base * scale / sqrt(r) and h = base * scale * sqrt(r).
inline AnchorSet sliding_window_anchors(const PyramidConfig& cfg,
                                        const std::vector<double>& scales,
                                        const std::vector<double>& ratios) {
  if (scales.empty() || ratios.empty()) {
    throw std::invalid_argument("sliding_window_anchors: empty scale or ratio list");
  }
  AnchorSet out;
  out.scheme = Scheme::kSlidingWindow;
  for (const PyramidLevel& lv : cfg.levels) {
    const double base = cfg.sigma * lv.stride;
    for (int j = 0; j < lv.grid_h; ++j) {
      for (int i = 0; i < lv.grid_w; ++i) {
        const Point c = anchor_center(i, j, lv.stride);
        for (double scale : scales) {
          for (double ratio : ratios) {
            const double root = std::sqrt(ratio);
            out.anchors.push_back(
                {lv.index, i, j, Box{c.x, c.y, base * scale / root, base * scale * root}, 1.0});
          }
        }
      }
    }
  }
  return out;
}

/// One anchor per cell whose location probability reaches eps_l; the shape
/// comes from decoding the cell's predicted delta, the score is the
/// probability itself.
inline AnchorSet guided_anchors(const PredictorOutput& pred, const PyramidConfig& cfg,
                                double eps_l) {
  detail::check_predictor_shape(pred, cfg);
  AnchorSet out;
  out.scheme = Scheme::kGuided;
  for (std::size_t l = 0; l < cfg.levels.size(); ++l) {
    const PyramidLevel& lv = cfg.levels[l];
    for (int j = 0; j < lv.grid_h; ++j) {
      for (int i = 0; i < lv.grid_w; ++i) {
        const double p = pred.probabilities[l].p.at(i, j);
        if (p < eps_l) continue;
        const Point c = anchor_center(i, j, lv.stride);
        const Size s = decode_shape(pred.shapes[l].deltas.at(i, j), lv.stride, cfg.sigma);
        out.anchors.push_back({lv.index, i, j, Box{c.x, c.y, s.w, s.h}, p});
      }
    }
  }
  return out;
}

/// Ideal predictor built from the annotations: probability 1.0 on positive
/// cells, 0.3 on ignore cells, 0.0 elsewhere; each cell's shape delta encodes
/// the nearest-center object assigned to its level (zero where the level has
/// no objects).
inline PredictorOutput oracle_maps(const GroundTruthScene& scene, const PyramidConfig& cfg) {
  const LocationTargets loc = location_targets(scene, cfg);

  std::vector<std::vector<int>> by_level(cfg.levels.size());
  for (std::size_t g = 0; g < scene.boxes.size(); ++g) {
    by_level[assign_level(scene.boxes[g], cfg)].push_back(static_cast<int>(g));
  }

  PredictorOutput out;
  for (std::size_t l = 0; l < cfg.levels.size(); ++l) {
    const PyramidLevel& lv = cfg.levels[l];
    ProbabilityMap pm{lv.index, Grid<double>(lv.grid_w, lv.grid_h, 0.0)};
    for (int j = 0; j < lv.grid_h; ++j) {
      for (int i = 0; i < lv.grid_w; ++i) {
        switch (loc.levels[l].labels.at(i, j)) {
          case CellLabel::kPositive: pm.p.at(i, j) = 1.0; break;
          case CellLabel::kIgnore: pm.p.at(i, j) = 0.3; break;
          case CellLabel::kNegative: break;
        }
      }
    }
    ShapeMap sm{lv.index, Grid<ShapeDelta>(lv.grid_w, lv.grid_h)};
    if (!by_level[l].empty()) {
      for (int j = 0; j < lv.grid_h; ++j) {
        for (int i = 0; i < lv.grid_w; ++i) {
          const Point c = anchor_center(i, j, lv.stride);
          int nearest = -1;
          double nearest_d2 = std::numeric_limits<double>::infinity();
          for (int g : by_level[l]) {
            const double dx = scene.boxes[g].x - c.x;
            const double dy = scene.boxes[g].y - c.y;
            const double d2 = dx * dx + dy * dy;
            if (d2 < nearest_d2) {
              nearest_d2 = d2;
              nearest = g;
            }
          }
          sm.deltas.at(i, j) =
              encode_shape(scene.boxes[nearest].w, scene.boxes[nearest].h, lv.stride, cfg.sigma);
        }
      }
    }
    out.probabilities.push_back(std::move(pm));
    out.shapes.push_back(std::move(sm));
  }
  return out;
}

struct NoiseSpec {
  double p_sigma = 0.0;  // Gaussian scale on probability logits
  double d_sigma = 0.0;  // Gaussian scale on shape deltas
};

/// Oracle maps with seeded Gaussian noise. Probability noise is applied in
/// logit space (probabilities pre-clamped to [1e-6, 1 - 1e-6] so the logit is
/// finite) and mapped back through the sigmoid; delta noise is additive. A
/// zero-scale pass is skipped entirely, so (0, 0) is bit-identical to
/// oracle_maps and draw order does not depend on the other scale.
inline PredictorOutput noisy_oracle_maps(const GroundTruthScene& scene,
                                         const PyramidConfig& cfg, const NoiseSpec& noise,
                                         std::uint64_t seed) {
  if (noise.p_sigma < 0.0 || noise.d_sigma < 0.0) {
    throw std::invalid_argument("noisy_oracle_maps: noise scales must be non-negative");
  }
  PredictorOutput out = oracle_maps(scene, cfg);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  if (noise.p_sigma > 0.0) {
    for (ProbabilityMap& pm : out.probabilities) {
      for (double& p : pm.p.cells) {
        const double q = std::clamp(p, 1e-6, 1.0 - 1e-6);
        const double logit = std::log(q / (1.0 - q)) + noise.p_sigma * gauss(rng);
        p = 1.0 / (1.0 + std::exp(-logit));
      }
    }
  }
  if (noise.d_sigma > 0.0) {
    for (ShapeMap& sm : out.shapes) {
      for (ShapeDelta& d : sm.deltas.cells) {
        d.dw += noise.d_sigma * gauss(rng);
        d.dh += noise.d_sigma * gauss(rng);
      }
    }
  }
  return out;
}

/// Greedy suppression in score order; a survivor removes every later anchor
/// overlapping it with IoU > iou_thr. Ties in score fall back to the
/// (level, j, i) cell order.
inline AnchorSet nms(const AnchorSet& in, double iou_thr) {
  if (!(iou_thr > 0.0 && iou_thr < 1.0)) {
    throw std::invalid_argument("nms: threshold must be in (0, 1)");
  }
  std::vector<const Anchor*> order;
  order.reserve(in.anchors.size());
  for (const Anchor& a : in.anchors) order.push_back(&a);
  std::stable_sort(order.begin(), order.end(),
                   [](const Anchor* a, const Anchor* b) { return detail::anchor_order(*a, *b); });

  AnchorSet out;
  out.scheme = in.scheme;
  for (const Anchor* cand : order) {
    bool suppressed = false;
    for (const Anchor& kept : out.anchors) {
      if (iou(cand->box, kept.box) > iou_thr) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) out.anchors.push_back(*cand);
  }
  return out;
}

/// The k highest-score anchors, stable under the (level, j, i) tie-break.
inline AnchorSet top_k(const AnchorSet& in, std::size_t k) {
  AnchorSet out;
  out.scheme = in.scheme;
  out.anchors = in.anchors;
  std::stable_sort(out.anchors.begin(), out.anchors.end(), detail::anchor_order);
  if (out.anchors.size() > k) out.anchors.resize(k);
  return out;
}

}  // namespace anchorkit
