#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "anchorkit/anchors.hpp"
#include "anchorkit/parallel.hpp"

namespace anchorkit {

inline constexpr std::array<double, 10> kRecallThresholds = {
    0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95};

/// Highest IoU any anchor achieves against each object; 0.0 for an object no
/// anchor touches (or when the set is empty).
inline std::vector<double> best_coverage(const AnchorSet& anchors,
                                         const GroundTruthScene& scene) {
  std::vector<double> out(scene.boxes.size(), 0.0);
  for (std::size_t g = 0; g < scene.boxes.size(); ++g) {
    for (const Anchor& a : anchors.anchors) {
      out[g] = std::max(out[g], iou(a.box, scene.boxes[g]));
    }
  }
  return out;
}

namespace detail {

// Rows = objects, columns = proposals (already ordered and truncated).
inline std::vector<std::vector<double>> iou_matrix(const GroundTruthScene& scene,
                                                   const std::vector<Anchor>& proposals) {
  std::vector<std::vector<double>> m(scene.boxes.size(),
                                     std::vector<double>(proposals.size(), 0.0));
  for (std::size_t g = 0; g < scene.boxes.size(); ++g) {
    for (std::size_t p = 0; p < proposals.size(); ++p) {
      m[g][p] = iou(scene.boxes[g], proposals[p].box);
    }
  }
  return m;
}

// Greedy one-to-one matcher: objects in index order take their highest-IoU
// unmatched proposal among the first n_cols, provided it reaches the
// threshold (ties: lowest proposal index).
inline std::vector<char> match_objects(const std::vector<std::vector<double>>& m,
                                       std::size_t n_cols, double threshold) {
  std::vector<char> matched(m.size(), 0);
  std::vector<char> used(n_cols, 0);
  for (std::size_t g = 0; g < m.size(); ++g) {
    int best = -1;
    double best_iou = 0.0;
    for (std::size_t p = 0; p < n_cols; ++p) {
      if (!used[p] && m[g][p] > best_iou) {
        best_iou = m[g][p];
        best = static_cast<int>(p);
      }
    }
    if (best >= 0 && best_iou >= threshold) {
      matched[g] = 1;
      used[best] = 1;
    }
  }
  return matched;
}

}  // namespace detail

/// Corpus-level recall at budget k, averaged over the ten IoU thresholds.
/// Scenes without objects contribute nothing; NaN if the corpus has none.
inline double average_recall(const std::vector<AnchorSet>& proposals,
                             const std::vector<GroundTruthScene>& scenes, std::size_t k,
                             unsigned threads = 1) {
  if (proposals.size() != scenes.size()) {
    throw std::invalid_argument("average_recall: proposals/scenes size mismatch");
  }
  std::vector<std::array<std::size_t, kRecallThresholds.size()>> counts(scenes.size());
  std::vector<std::size_t> n_gts(scenes.size(), 0);
  parallel_for(scenes.size(), threads, [&](std::size_t s) {
    const AnchorSet sorted = top_k(proposals[s], k);
    const auto m = detail::iou_matrix(scenes[s], sorted.anchors);
    n_gts[s] = scenes[s].boxes.size();
    for (std::size_t t = 0; t < kRecallThresholds.size(); ++t) {
      const auto matched = detail::match_objects(m, sorted.anchors.size(), kRecallThresholds[t]);
      std::size_t c = 0;
      for (char flag : matched) c += flag;
      counts[s][t] = c;
    }
  });
  std::size_t total = 0;
  for (std::size_t v : n_gts) total += v;
  if (total == 0) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  for (std::size_t t = 0; t < kRecallThresholds.size(); ++t) {
    std::size_t matched = 0;
    for (std::size_t s = 0; s < scenes.size(); ++s) matched += counts[s][t];
    sum += static_cast<double>(matched) / static_cast<double>(total);
  }
  return sum / static_cast<double>(kRecallThresholds.size());
}

/// Standard recall summary. Size buckets (by object area, evaluated at
/// k = 100): small < 32^2, medium in [32^2, 96^2], large > 96^2; a bucket
/// with no objects reports NaN, never 0.
struct RecallReport {
  double ar_100 = std::numeric_limits<double>::quiet_NaN();
  double ar_300 = std::numeric_limits<double>::quiet_NaN();
  double ar_1000 = std::numeric_limits<double>::quiet_NaN();
  double ar_small = std::numeric_limits<double>::quiet_NaN();
  double ar_medium = std::numeric_limits<double>::quiet_NaN();
  double ar_large = std::numeric_limits<double>::quiet_NaN();
  std::array<double, kRecallThresholds.size()> recall_curve_1000{};  // NaN without objects
};

inline RecallReport recall_report(const std::vector<AnchorSet>& proposals,
                                  const std::vector<GroundTruthScene>& scenes,
                                  unsigned threads = 1) {
  if (proposals.size() != scenes.size()) {
    throw std::invalid_argument("recall_report: proposals/scenes size mismatch");
  }
  constexpr std::array<std::size_t, 3> kBudgets = {100, 300, 1000};
  constexpr std::size_t kT = kRecallThresholds.size();

  struct SceneStats {
    std::array<std::array<std::size_t, 3>, kT> matched{};
    std::array<std::vector<char>, kT> matched_at_100;
    std::vector<double> areas;
  };
  std::vector<SceneStats> stats(scenes.size());
  parallel_for(scenes.size(), threads, [&](std::size_t s) {
    const AnchorSet sorted = top_k(proposals[s], kBudgets.back());
    const auto m = detail::iou_matrix(scenes[s], sorted.anchors);
    SceneStats& st = stats[s];
    st.areas.reserve(scenes[s].boxes.size());
    for (const Box& b : scenes[s].boxes) st.areas.push_back(b.area());
    for (std::size_t t = 0; t < kT; ++t) {
      for (std::size_t b = 0; b < kBudgets.size(); ++b) {
        const std::size_t n_cols = std::min(kBudgets[b], sorted.anchors.size());
        auto matched = detail::match_objects(m, n_cols, kRecallThresholds[t]);
        std::size_t c = 0;
        for (char flag : matched) c += flag;
        st.matched[t][b] = c;
        if (b == 0) st.matched_at_100[t] = std::move(matched);
      }
    }
  });

  std::size_t total = 0;
  for (const SceneStats& st : stats) total += st.areas.size();

  RecallReport report;
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  report.recall_curve_1000.fill(kNaN);
  if (total == 0) return report;

  const auto bucket_of = [](double area) {
    if (area < 32.0 * 32.0) return 0;
    if (area <= 96.0 * 96.0) return 1;
    return 2;
  };
  std::array<std::size_t, 3> bucket_total{};
  for (const SceneStats& st : stats) {
    for (double a : st.areas) ++bucket_total[bucket_of(a)];
  }

  std::array<double, 3> budget_sum{};
  std::array<double, 3> bucket_sum{};
  for (std::size_t t = 0; t < kT; ++t) {
    std::array<std::size_t, 3> matched_by_budget{};
    std::array<std::size_t, 3> matched_by_bucket{};
    for (const SceneStats& st : stats) {
      for (std::size_t b = 0; b < 3; ++b) matched_by_budget[b] += st.matched[t][b];
      for (std::size_t g = 0; g < st.areas.size(); ++g) {
        if (st.matched_at_100[t][g]) ++matched_by_bucket[bucket_of(st.areas[g])];
      }
    }
    const double recall_1000 =
        static_cast<double>(matched_by_budget[2]) / static_cast<double>(total);
    report.recall_curve_1000[t] = recall_1000;
    for (std::size_t b = 0; b < 3; ++b) {
      budget_sum[b] += static_cast<double>(matched_by_budget[b]) / static_cast<double>(total);
    }
    for (std::size_t b = 0; b < 3; ++b) {
      if (bucket_total[b] > 0) {
        bucket_sum[b] += static_cast<double>(matched_by_bucket[b]) /
                         static_cast<double>(bucket_total[b]);
      }
    }
  }
  const double n_t = static_cast<double>(kT);
  report.ar_100 = budget_sum[0] / n_t;
  report.ar_300 = budget_sum[1] / n_t;
  report.ar_1000 = budget_sum[2] / n_t;
  report.ar_small = bucket_total[0] ? bucket_sum[0] / n_t : kNaN;
  report.ar_medium = bucket_total[1] ? bucket_sum[1] / n_t : kNaN;
  report.ar_large = bucket_total[2] ? bucket_sum[2] / n_t : kNaN;
  return report;
}

/// Cumulative proposal-quality curve: for each descending IoU edge, how many
/// proposals cover their best-matching object at least that well.
struct IoUDistribution {
  std::vector<double> edges;
  std::vector<std::size_t> counts;
};

inline IoUDistribution iou_distribution(const std::vector<AnchorSet>& proposals,
                                        const std::vector<GroundTruthScene>& scenes,
                                        const std::vector<double>& edges,
                                        unsigned threads = 1) {
  if (proposals.size() != scenes.size()) {
    throw std::invalid_argument("iou_distribution: proposals/scenes size mismatch");
  }
  if (edges.empty()) throw std::invalid_argument("iou_distribution: no edges");
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (!(edges[e] > 0.0 && edges[e] <= 1.0)) {
      throw std::invalid_argument("iou_distribution: edges must lie in (0, 1]");
    }
    if (e > 0 && !(edges[e] < edges[e - 1])) {
      throw std::invalid_argument("iou_distribution: edges must be strictly descending");
    }
  }
  std::vector<std::vector<std::size_t>> per_scene(scenes.size());
  parallel_for(scenes.size(), threads, [&](std::size_t s) {
    std::vector<std::size_t> counts(edges.size(), 0);
    for (const Anchor& a : proposals[s].anchors) {
      double best = 0.0;
      for (const Box& gt : scenes[s].boxes) best = std::max(best, iou(a.box, gt));
      for (std::size_t e = 0; e < edges.size(); ++e) {
        if (best >= edges[e]) ++counts[e];
      }
    }
    per_scene[s] = std::move(counts);
  });
  IoUDistribution out;
  out.edges = edges;
  out.counts.assign(edges.size(), 0);
  for (const auto& counts : per_scene) {
    for (std::size_t e = 0; e < edges.size(); ++e) out.counts[e] += counts[e];
  }
  return out;
}

/// One row per probability threshold: kept-anchor stats and the coverage the
/// kept anchors still provide. Retention is relative to eps = 0 (every cell).
struct SweepRow {
  double eps = 0.0;
  double mean_anchors = 0.0;
  double retention = 0.0;
  double mean_best_coverage = 0.0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
};

inline SweepReport threshold_sweep(const std::vector<PredictorOutput>& preds,
                                   const std::vector<PyramidConfig>& cfgs,
                                   const std::vector<GroundTruthScene>& scenes,
                                   const std::vector<double>& eps_list,
                                   unsigned threads = 1) {
  if (preds.size() != scenes.size() || cfgs.size() != scenes.size()) {
    throw std::invalid_argument("threshold_sweep: input size mismatch");
  }
  if (eps_list.empty()) throw std::invalid_argument("threshold_sweep: empty eps list");
  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    if (!(eps_list[e] >= 0.0)) {
      throw std::invalid_argument("threshold_sweep: eps must be non-negative");
    }
    if (e > 0 && !(eps_list[e] > eps_list[e - 1])) {
      throw std::invalid_argument("threshold_sweep: eps list must be strictly ascending");
    }
  }

  struct SceneStats {
    std::size_t total_cells = 0;
    std::size_t n_gts = 0;
    std::vector<std::size_t> kept;       // per eps
    std::vector<double> coverage_sum;    // per eps, over this scene's objects
  };
  std::vector<SceneStats> stats(scenes.size());
  parallel_for(scenes.size(), threads, [&](std::size_t s) {
    SceneStats& st = stats[s];
    for (const PyramidLevel& lv : cfgs[s].levels) {
      st.total_cells += static_cast<std::size_t>(lv.grid_w) * lv.grid_h;
    }
    st.n_gts = scenes[s].boxes.size();
    st.kept.resize(eps_list.size());
    st.coverage_sum.resize(eps_list.size(), 0.0);
    for (std::size_t e = 0; e < eps_list.size(); ++e) {
      const AnchorSet kept = guided_anchors(preds[s], cfgs[s], eps_list[e]);
      st.kept[e] = kept.anchors.size();
      for (double c : best_coverage(kept, scenes[s])) st.coverage_sum[e] += c;
    }
  });

  std::size_t total_cells = 0, total_gts = 0;
  for (const SceneStats& st : stats) {
    total_cells += st.total_cells;
    total_gts += st.n_gts;
  }

  SweepReport report;
  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    SweepRow row;
    row.eps = eps_list[e];
    std::size_t kept = 0;
    double cov = 0.0;
    for (const SceneStats& st : stats) {
      kept += st.kept[e];
      cov += st.coverage_sum[e];
    }
    row.mean_anchors = static_cast<double>(kept) / static_cast<double>(scenes.size());
    row.retention = static_cast<double>(kept) / static_cast<double>(total_cells);
    row.mean_best_coverage = total_gts
                                 ? cov / static_cast<double>(total_gts)
                                 : std::numeric_limits<double>::quiet_NaN();
    report.rows.push_back(row);
  }
  return report;
}

enum class Population { kGroundTruth, kGuided, kSlidingWindow };

/// Log2-space histograms of box scale sqrt(w*h) and aspect ratio h/w.
/// Bin key * bin_width is the left edge of the bin.
struct ShapeHistogram {
  Population population = Population::kGroundTruth;
  double bin_width = 0.25;
  std::map<int, std::size_t> scale_bins;
  std::map<int, std::size_t> ratio_bins;
  std::size_t total = 0;
};

inline ShapeHistogram shape_distribution(const std::vector<Size>& shapes, Population tag,
                                         double bin_width = 0.25) {
  if (shapes.empty()) throw std::invalid_argument("shape_distribution: empty population");
  if (!(bin_width > 0.0)) throw std::invalid_argument("shape_distribution: bin width must be positive");
  ShapeHistogram out;
  out.population = tag;
  out.bin_width = bin_width;
  out.total = shapes.size();
  const auto bin_of = [bin_width](double v) {
    return static_cast<int>(std::floor(v / bin_width + 1e-9));
  };
  for (const Size& s : shapes) {
    ++out.scale_bins[bin_of(0.5 * std::log2(s.w * s.h))];
    ++out.ratio_bins[bin_of(std::log2(s.h / s.w))];
  }
  return out;
}

inline std::vector<Size> collect_shapes(const AnchorSet& set) {
  std::vector<Size> out;
  out.reserve(set.anchors.size());
  for (const Anchor& a : set.anchors) out.push_back({a.box.w, a.box.h});
  return out;
}

inline std::vector<Size> collect_shapes(const std::vector<GroundTruthScene>& scenes) {
  std::vector<Size> out;
  for (const GroundTruthScene& scene : scenes) {
    for (const Box& b : scene.boxes) out.push_back({b.w, b.h});
  }
  return out;
}

}  // namespace anchorkit
