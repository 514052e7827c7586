#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "anchorkit/grid.hpp"
#include "anchorkit/pyramid.hpp"
#include "anchorkit/viou.hpp"

namespace anchorkit {

enum class CellLabel : unsigned char { kNegative = 0, kIgnore = 1, kPositive = 2 };

struct LocationTargetMap {
  int level = 0;
  Grid<CellLabel> labels;
};

struct LocationTargets {
  std::vector<LocationTargetMap> levels;
  bool empty_scene = false;

  std::size_t count(CellLabel label) const {
    std::size_t n = 0;
    for (const LocationTargetMap& m : levels) {
      for (CellLabel c : m.labels.cells) {
        if (c == label) ++n;
      }
    }
    return n;
  }
};

namespace detail {

struct CellSpan {
  int i_lo = 0, i_hi = -1;
  int j_lo = 0, j_hi = -1;

  bool empty() const { return i_lo > i_hi || j_lo > j_hi; }
};

// Cells whose centers (i + 1/2, j + 1/2) lie inside the closed rectangle
// [x_lo, x_hi] x [y_lo, y_hi] (feature units), clipped to the grid.
inline CellSpan cells_in_span(double x_lo, double x_hi, double y_lo, double y_hi,
                              const PyramidLevel& lv) {
  CellSpan s;
  s.i_lo = std::max(0, static_cast<int>(std::ceil(x_lo - 0.5)));
  s.i_hi = std::min(lv.grid_w - 1, static_cast<int>(std::floor(x_hi - 0.5)));
  s.j_lo = std::max(0, static_cast<int>(std::ceil(y_lo - 0.5)));
  s.j_hi = std::min(lv.grid_h - 1, static_cast<int>(std::floor(y_hi - 0.5)));
  return s;
}

inline CellSpan cells_in_region(double cx, double cy, double rw, double rh,
                                const PyramidLevel& lv) {
  return cells_in_span(cx - 0.5 * rw, cx + 0.5 * rw, cy - 0.5 * rh, cy + 0.5 * rh, lv);
}

// Labels only ever escalate (NEGATIVE -> IGNORE -> POSITIVE), which makes the
// per-object marking order irrelevant.
inline void raise_label(Grid<CellLabel>& g, int i, int j, CellLabel label) {
  CellLabel& cur = g.at(i, j);
  if (static_cast<unsigned char>(cur) < static_cast<unsigned char>(label)) cur = label;
}

inline void raise_span(Grid<CellLabel>& g, const CellSpan& s, CellLabel label) {
  for (int j = s.j_lo; j <= s.j_hi; ++j) {
    for (int i = s.i_lo; i <= s.i_hi; ++i) raise_label(g, i, j, label);
  }
}

}  // namespace detail

/// Per-level POSITIVE / IGNORE / NEGATIVE cell labels.
///
/// Each object is assigned one level. There, cells whose centers fall in the
/// sigma1-scaled center region are POSITIVE and cells in the sigma2-scaled
/// region are IGNORE; if the center region captures no cell center, the cell
/// containing the projected center becomes POSITIVE, so every object yields
/// at least one positive. The footprints of the object's positive cells are
/// IGNORE on the two adjacent levels. POSITIVE beats IGNORE beats NEGATIVE
/// when objects overlap.
inline LocationTargets location_targets(const GroundTruthScene& scene,
                                        const PyramidConfig& cfg) {
  LocationTargets out;
  out.levels.reserve(cfg.levels.size());
  for (const PyramidLevel& lv : cfg.levels) {
    out.levels.push_back({lv.index, Grid<CellLabel>(lv.grid_w, lv.grid_h, CellLabel::kNegative)});
  }
  out.empty_scene = scene.boxes.empty();

  const int n_levels = static_cast<int>(cfg.levels.size());
  for (const Box& gt : scene.boxes) {
    const int assigned = assign_level(gt, cfg);
    const PyramidLevel& lv = cfg.levels[assigned];
    const Box proj = project_to_level(gt, lv);

    std::vector<std::pair<int, int>> positives;
    const auto cr = detail::cells_in_region(proj.x, proj.y, cfg.sigma1 * proj.w,
                                            cfg.sigma1 * proj.h, lv);
    for (int j = cr.j_lo; j <= cr.j_hi; ++j) {
      for (int i = cr.i_lo; i <= cr.i_hi; ++i) positives.emplace_back(i, j);
    }
    if (positives.empty()) {
      const int ci = std::clamp(static_cast<int>(std::floor(proj.x)), 0, lv.grid_w - 1);
      const int cj = std::clamp(static_cast<int>(std::floor(proj.y)), 0, lv.grid_h - 1);
      positives.emplace_back(ci, cj);
    }

    const auto ir = detail::cells_in_region(proj.x, proj.y, cfg.sigma2 * proj.w,
                                            cfg.sigma2 * proj.h, lv);
    detail::raise_span(out.levels[assigned].labels, ir, CellLabel::kIgnore);
    for (const auto& [i, j] : positives) {
      detail::raise_label(out.levels[assigned].labels, i, j, CellLabel::kPositive);
    }

    for (int adj : {assigned - 1, assigned + 1}) {
      if (adj < 0 || adj >= n_levels) continue;
      const PyramidLevel& av = cfg.levels[adj];
      const double rescale = lv.stride / av.stride;
      for (const auto& [i, j] : positives) {
        const auto footprint = detail::cells_in_span(i * rescale, (i + 1) * rescale,
                                                     j * rescale, (j + 1) * rescale, av);
        detail::raise_span(out.levels[adj].labels, footprint, CellLabel::kIgnore);
      }
    }
  }
  return out;
}

/// Shape regression target for one positive cell: the matched object.
struct ShapeTarget {
  int gt_index = -1;
  double w = 0.0;
  double h = 0.0;
};

struct ShapeAssignment {
  int level = 0;
  Grid<std::optional<ShapeTarget>> cells;
};

/// Matches every POSITIVE cell to the object (among those assigned to the
/// cell's level) with the highest sampled shape-search IoU at the cell
/// center. Ties go to the smaller object, then the lower object index.
inline std::vector<ShapeAssignment> shape_targets(
    const GroundTruthScene& scene, const PyramidConfig& cfg, const LocationTargets& loc,
    const std::vector<SamplePairSet>& samples_per_level) {
  assert(loc.levels.size() == cfg.levels.size());
  assert(samples_per_level.size() == cfg.levels.size());

  std::vector<std::vector<int>> by_level(cfg.levels.size());
  for (std::size_t g = 0; g < scene.boxes.size(); ++g) {
    by_level[assign_level(scene.boxes[g], cfg)].push_back(static_cast<int>(g));
  }

  std::vector<ShapeAssignment> out;
  out.reserve(cfg.levels.size());
  for (std::size_t l = 0; l < cfg.levels.size(); ++l) {
    const PyramidLevel& lv = cfg.levels[l];
    ShapeAssignment assignment{lv.index, Grid<std::optional<ShapeTarget>>(lv.grid_w, lv.grid_h)};
    const std::vector<int>& candidates = by_level[l];
    for (int j = 0; j < lv.grid_h; ++j) {
      for (int i = 0; i < lv.grid_w; ++i) {
        if (loc.levels[l].labels.at(i, j) != CellLabel::kPositive) continue;
        assert(!candidates.empty() && "positive cell on a level with no assigned objects");
        const Point center = anchor_center(i, j, lv.stride);
        int best = -1;
        double best_viou = -1.0;
        double best_area = std::numeric_limits<double>::infinity();
        for (int g : candidates) {
          const Box& gt = scene.boxes[g];
          const double v = sampled_viou(center, gt, samples_per_level[l]);
          const bool better =
              v > best_viou || (v == best_viou && gt.area() < best_area);
          if (better) {
            best = g;
            best_viou = v;
            best_area = gt.area();
          }
        }
        assignment.cells.at(i, j) = ShapeTarget{best, scene.boxes[best].w, scene.boxes[best].h};
      }
    }
    out.push_back(std::move(assignment));
  }
  return out;
}

}  // namespace anchorkit
