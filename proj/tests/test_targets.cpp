#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "anchorkit/targets.hpp"
#include "oracles.hpp"

namespace ak = anchorkit;

namespace {

using CellSet = std::set<std::pair<int, int>>;

CellSet cells_with(const ak::LocationTargetMap& m, ak::CellLabel label) {
  CellSet out;
  for (int j = 0; j < m.labels.height; ++j) {
    for (int i = 0; i < m.labels.width; ++i) {
      if (m.labels.at(i, j) == label) out.insert({i, j});
    }
  }
  return out;
}

std::string raster_row(const ak::Grid<ak::CellLabel>& g, int j) {
  std::string s;
  for (int i = 0; i < g.width; ++i) {
    switch (g.at(i, j)) {
      case ak::CellLabel::kPositive: s += '+'; break;
      case ak::CellLabel::kIgnore: s += 'i'; break;
      default: s += '.'; break;
    }
  }
  return s;
}

ak::GroundTruthScene random_scene(std::mt19937_64& rng, int n_boxes,
                                  double pos_span = 256.0, double dim_lo = 2.0,
                                  double dim_hi = 192.0) {
  ak::GroundTruthScene scene;
  scene.image_w = static_cast<int>(pos_span);
  scene.image_h = static_cast<int>(pos_span);
  for (int g = 0; g < n_boxes; ++g) {
    scene.boxes.push_back(oracles::random_box(rng, pos_span, dim_lo, dim_hi));
  }
  return scene;
}

}  // namespace

TEST(LocationTargets, SingleObjectThreeLevelFixture) {
  // 64x64 object centered at (100,100); sigma=4 puts it on the stride-16
  // level, where the center region captures exactly one cell.
  const ak::PyramidConfig cfg = ak::make_pyramid({8.0, 16.0, 32.0}, 224, 224, 4.0);
  const ak::GroundTruthScene scene{224, 224, {{100.0, 100.0, 64.0, 64.0}}};
  const ak::LocationTargets t = ak::location_targets(scene, cfg);
  ASSERT_EQ(t.levels.size(), 3u);
  EXPECT_FALSE(t.empty_scene);

  EXPECT_EQ(cells_with(t.levels[1], ak::CellLabel::kPositive), (CellSet{{6, 6}}));
  EXPECT_EQ(cells_with(t.levels[1], ak::CellLabel::kIgnore),
            (CellSet{{5, 5}, {6, 5}, {5, 6}}));
  // Adjacent levels only pick up the rescaled footprint of the positive cell.
  EXPECT_EQ(cells_with(t.levels[0], ak::CellLabel::kPositive), CellSet{});
  EXPECT_EQ(cells_with(t.levels[0], ak::CellLabel::kIgnore),
            (CellSet{{12, 12}, {13, 12}, {12, 13}, {13, 13}}));
  EXPECT_EQ(cells_with(t.levels[2], ak::CellLabel::kPositive), CellSet{});
  EXPECT_EQ(cells_with(t.levels[2], ak::CellLabel::kIgnore), (CellSet{{3, 3}}));

  EXPECT_EQ(raster_row(t.levels[1].labels, 5), ".....ii.......");
  EXPECT_EQ(raster_row(t.levels[1].labels, 6), ".....i+.......");
  EXPECT_EQ(raster_row(t.levels[1].labels, 7), "..............");

  EXPECT_EQ(t.count(ak::CellLabel::kPositive), 1u);
  EXPECT_EQ(t.count(ak::CellLabel::kIgnore), 3u + 4u + 1u);
}

TEST(LocationTargets, EmptySceneIsAllNegative) {
  const ak::PyramidConfig cfg = ak::make_pyramid({8.0, 16.0}, 128, 128);
  const ak::LocationTargets t = ak::location_targets({128, 128, {}}, cfg);
  EXPECT_TRUE(t.empty_scene);
  EXPECT_EQ(t.count(ak::CellLabel::kPositive), 0u);
  EXPECT_EQ(t.count(ak::CellLabel::kIgnore), 0u);
  EXPECT_EQ(t.count(ak::CellLabel::kNegative), 16u * 16u + 8u * 8u);
}

TEST(LocationTargets, RegionBoundaryIsClosed) {
  // Stride-1 level; center region [3.5, 7.5]^2 touches the cell centers 3.5
  // and 7.5 exactly, so rows/cols 3 and 7 are still inside.
  const ak::PyramidConfig cfg = ak::make_pyramid({1.0}, 20, 20);
  const ak::GroundTruthScene at_boundary{20, 20, {{5.5, 5.5, 20.0, 20.0}}};
  const ak::LocationTargets t = ak::location_targets(at_boundary, cfg);
  CellSet expect;
  for (int j = 3; j <= 7; ++j) {
    for (int i = 3; i <= 7; ++i) expect.insert({i, j});
  }
  EXPECT_EQ(cells_with(t.levels[0], ak::CellLabel::kPositive), expect);

  // Shrinking the box just below the boundary drops the outer ring.
  const ak::GroundTruthScene inside{20, 20, {{5.5, 5.5, 19.99, 19.99}}};
  const ak::LocationTargets t2 = ak::location_targets(inside, cfg);
  CellSet expect2;
  for (int j = 4; j <= 6; ++j) {
    for (int i = 4; i <= 6; ++i) expect2.insert({i, j});
  }
  EXPECT_EQ(cells_with(t2.levels[0], ak::CellLabel::kPositive), expect2);
}

TEST(LocationTargets, TinyObjectFallsBackToContainingCell) {
  // A 4x4 object on a stride-16 level scales to 0.25 cells; its center
  // region holds no cell center, so the containing cell becomes POSITIVE.
  const ak::PyramidConfig cfg = ak::make_pyramid({16.0}, 256, 256);
  const ak::LocationTargets t =
      ak::location_targets({256, 256, {{100.0, 100.0, 4.0, 4.0}}}, cfg);
  EXPECT_EQ(cells_with(t.levels[0], ak::CellLabel::kPositive), (CellSet{{6, 6}}));

  // The fallback clamps at grid edges.
  const ak::LocationTargets corner =
      ak::location_targets({256, 256, {{255.5, 255.5, 2.0, 2.0}}}, cfg);
  EXPECT_EQ(cells_with(corner.levels[0], ak::CellLabel::kPositive), (CellSet{{15, 15}}));
}

TEST(LocationTargets, EveryObjectYieldsAPositiveCell) {
  std::mt19937_64 rng(41);
  const ak::PyramidConfig cfg = ak::make_pyramid({8.0, 16.0, 32.0, 64.0}, 256, 256);
  for (int k = 0; k < 200; ++k) {
    const ak::GroundTruthScene scene = random_scene(rng, 1);
    const ak::LocationTargets t = ak::location_targets(scene, cfg);
    EXPECT_GE(t.count(ak::CellLabel::kPositive), 1u)
        << "box " << scene.boxes[0].x << "," << scene.boxes[0].y << " "
        << scene.boxes[0].w << "x" << scene.boxes[0].h;
    // The positives live on the assigned level.
    const int lvl = ak::assign_level(scene.boxes[0], cfg);
    EXPECT_FALSE(cells_with(t.levels[lvl], ak::CellLabel::kPositive).empty());
  }
}

TEST(LocationTargets, LabelsPartitionEveryCell) {
  std::mt19937_64 rng(42);
  const ak::PyramidConfig cfg = ak::make_pyramid({8.0, 16.0, 32.0, 64.0}, 256, 256);
  std::size_t total = 0;
  for (const ak::PyramidLevel& lv : cfg.levels) {
    total += static_cast<std::size_t>(lv.grid_w) * lv.grid_h;
  }
  for (int k = 0; k < 20; ++k) {
    const ak::GroundTruthScene scene = random_scene(rng, 4);
    const ak::LocationTargets t = ak::location_targets(scene, cfg);
    EXPECT_EQ(t.count(ak::CellLabel::kNegative) + t.count(ak::CellLabel::kIgnore) +
                  t.count(ak::CellLabel::kPositive),
              total);
  }
}

TEST(LocationTargets, AdjacentLevelsIgnoreThePositiveFootprint) {
  std::mt19937_64 rng(43);
  const ak::PyramidConfig cfg = ak::make_pyramid({8.0, 16.0, 32.0, 64.0}, 256, 256);
  const int n_levels = static_cast<int>(cfg.levels.size());
  for (int k = 0; k < 50; ++k) {
    const ak::GroundTruthScene scene = random_scene(rng, 3);
    const ak::LocationTargets t = ak::location_targets(scene, cfg);
    for (int l = 0; l < n_levels; ++l) {
      for (const auto& [i, j] : cells_with(t.levels[l], ak::CellLabel::kPositive)) {
        for (int adj : {l - 1, l + 1}) {
          if (adj < 0 || adj >= n_levels) continue;
          const ak::PyramidLevel& av = cfg.levels[adj];
          const double rescale = cfg.levels[l].stride / av.stride;
          const int i_lo = std::max(0, static_cast<int>(std::ceil(i * rescale - 0.5)));
          const int i_hi = std::min(av.grid_w - 1,
                                    static_cast<int>(std::floor((i + 1) * rescale - 0.5)));
          const int j_lo = std::max(0, static_cast<int>(std::ceil(j * rescale - 0.5)));
          const int j_hi = std::min(av.grid_h - 1,
                                    static_cast<int>(std::floor((j + 1) * rescale - 0.5)));
          for (int jj = j_lo; jj <= j_hi; ++jj) {
            for (int ii = i_lo; ii <= i_hi; ++ii) {
              EXPECT_NE(t.levels[adj].labels.at(ii, jj), ak::CellLabel::kNegative)
                  << "footprint cell (" << ii << "," << jj << ") on level " << adj
                  << " under positive (" << i << "," << j << ") on level " << l;
            }
          }
        }
      }
    }
  }
}

TEST(LocationTargets, PositiveBeatsOverlappingIgnore) {
  // Two same-size objects 16 px apart: each is POSITIVE in its own center
  // cell even though the other's ignore region covers it.
  const ak::PyramidConfig cfg = ak::make_pyramid({8.0, 16.0, 32.0}, 224, 224, 4.0);
  const ak::Box a{100.0, 100.0, 64.0, 64.0};
  const ak::Box b{116.0, 100.0, 64.0, 64.0};
  const ak::LocationTargets t = ak::location_targets({224, 224, {a, b}}, cfg);
  EXPECT_EQ(cells_with(t.levels[1], ak::CellLabel::kPositive), (CellSet{{6, 6}, {7, 6}}));
  EXPECT_EQ(cells_with(t.levels[1], ak::CellLabel::kIgnore),
            (CellSet{{5, 5}, {6, 5}, {7, 5}, {5, 6}}));
}

TEST(LocationTargets, InputOrderDoesNotMatter) {
  std::mt19937_64 rng(44);
  const ak::PyramidConfig cfg = ak::make_pyramid({8.0, 16.0, 32.0, 64.0}, 256, 256);
  for (int k = 0; k < 30; ++k) {
    ak::GroundTruthScene scene = random_scene(rng, 4);
    const ak::LocationTargets fwd = ak::location_targets(scene, cfg);
    std::reverse(scene.boxes.begin(), scene.boxes.end());
    const ak::LocationTargets rev = ak::location_targets(scene, cfg);
    ASSERT_EQ(fwd.levels.size(), rev.levels.size());
    for (std::size_t l = 0; l < fwd.levels.size(); ++l) {
      EXPECT_EQ(fwd.levels[l].labels.cells, rev.levels[l].labels.cells);
    }
  }
}

TEST(LocationTargets, GrowingSigma1NeverRemovesPositives) {
  std::mt19937_64 rng(45);
  for (int k = 0; k < 30; ++k) {
    const ak::GroundTruthScene scene = random_scene(rng, 3);
    const ak::PyramidConfig narrow =
        ak::make_pyramid({8.0, 16.0, 32.0, 64.0}, 256, 256, 8.0, 0.2, 0.5);
    const ak::PyramidConfig wide =
        ak::make_pyramid({8.0, 16.0, 32.0, 64.0}, 256, 256, 8.0, 0.3, 0.5);
    const ak::LocationTargets tn = ak::location_targets(scene, narrow);
    const ak::LocationTargets tw = ak::location_targets(scene, wide);
    for (std::size_t l = 0; l < tn.levels.size(); ++l) {
      const CellSet pn = cells_with(tn.levels[l], ak::CellLabel::kPositive);
      const CellSet pw = cells_with(tw.levels[l], ak::CellLabel::kPositive);
      EXPECT_TRUE(std::includes(pw.begin(), pw.end(), pn.begin(), pn.end()));
    }
  }
}

TEST(LocationTargets, GrowingSigma2NeverRemovesNonNegatives) {
  std::mt19937_64 rng(46);
  for (int k = 0; k < 30; ++k) {
    const ak::GroundTruthScene scene = random_scene(rng, 3);
    const ak::PyramidConfig narrow =
        ak::make_pyramid({8.0, 16.0, 32.0, 64.0}, 256, 256, 8.0, 0.2, 0.5);
    const ak::PyramidConfig wide =
        ak::make_pyramid({8.0, 16.0, 32.0, 64.0}, 256, 256, 8.0, 0.2, 0.7);
    const ak::LocationTargets tn = ak::location_targets(scene, narrow);
    const ak::LocationTargets tw = ak::location_targets(scene, wide);
    for (std::size_t l = 0; l < tn.levels.size(); ++l) {
      for (int j = 0; j < tn.levels[l].labels.height; ++j) {
        for (int i = 0; i < tn.levels[l].labels.width; ++i) {
          if (tn.levels[l].labels.at(i, j) != ak::CellLabel::kNegative) {
            EXPECT_NE(tw.levels[l].labels.at(i, j), ak::CellLabel::kNegative);
          }
        }
      }
    }
  }
}

namespace {

std::vector<ak::SamplePairSet> nine_pair_samples(const ak::PyramidConfig& cfg) {
  std::vector<ak::SamplePairSet> out;
  for (const ak::PyramidLevel& lv : cfg.levels) {
    out.push_back(ak::retinanet_sample_pairs(lv.stride, cfg.sigma));
  }
  return out;
}

}  // namespace

TEST(ShapeTargets, OnlyPositiveCellsCarryTargets) {
  std::mt19937_64 rng(47);
  const ak::PyramidConfig cfg = ak::make_pyramid({8.0, 16.0, 32.0, 64.0}, 256, 256);
  const std::vector<ak::SamplePairSet> samples = nine_pair_samples(cfg);
  for (int k = 0; k < 20; ++k) {
    const ak::GroundTruthScene scene = random_scene(rng, 3);
    const ak::LocationTargets loc = ak::location_targets(scene, cfg);
    const std::vector<ak::ShapeAssignment> shapes = ak::shape_targets(scene, cfg, loc, samples);
    ASSERT_EQ(shapes.size(), cfg.levels.size());
    for (std::size_t l = 0; l < shapes.size(); ++l) {
      for (int j = 0; j < shapes[l].cells.height; ++j) {
        for (int i = 0; i < shapes[l].cells.width; ++i) {
          const bool positive = loc.levels[l].labels.at(i, j) == ak::CellLabel::kPositive;
          EXPECT_EQ(shapes[l].cells.at(i, j).has_value(), positive);
          if (positive) {
            const ak::ShapeTarget& st = *shapes[l].cells.at(i, j);
            ASSERT_GE(st.gt_index, 0);
            ASSERT_LT(st.gt_index, static_cast<int>(scene.boxes.size()));
            EXPECT_EQ(st.w, scene.boxes[st.gt_index].w);
            EXPECT_EQ(st.h, scene.boxes[st.gt_index].h);
            // The matched object lives on this cell's level.
            EXPECT_EQ(ak::assign_level(scene.boxes[st.gt_index], cfg),
                      static_cast<int>(l));
          }
        }
      }
    }
  }
}

TEST(ShapeTargets, SeparatedObjectsMatchThemselves) {
  const ak::PyramidConfig cfg = ak::make_pyramid({8.0, 16.0, 32.0}, 224, 224, 4.0);
  const std::vector<ak::SamplePairSet> samples = nine_pair_samples(cfg);
  const ak::Box a{100.0, 100.0, 64.0, 64.0};
  const ak::Box b{116.0, 100.0, 64.0, 48.0};
  const ak::GroundTruthScene scene{224, 224, {a, b}};
  const ak::LocationTargets loc = ak::location_targets(scene, cfg);
  const std::vector<ak::ShapeAssignment> shapes = ak::shape_targets(scene, cfg, loc, samples);
  ASSERT_TRUE(shapes[1].cells.at(6, 6).has_value());
  EXPECT_EQ(shapes[1].cells.at(6, 6)->gt_index, 0);
  EXPECT_EQ(shapes[1].cells.at(6, 6)->w, 64.0);
  ASSERT_TRUE(shapes[1].cells.at(7, 6).has_value());
  EXPECT_EQ(shapes[1].cells.at(7, 6)->gt_index, 1);
  EXPECT_EQ(shapes[1].cells.at(7, 6)->h, 48.0);
}

TEST(ShapeTargets, IdenticalObjectsTieToTheLowerIndex) {
  const ak::PyramidConfig cfg = ak::make_pyramid({8.0, 16.0, 32.0}, 224, 224, 4.0);
  const std::vector<ak::SamplePairSet> samples = nine_pair_samples(cfg);
  const ak::Box a{100.0, 100.0, 64.0, 64.0};
  const ak::GroundTruthScene scene{224, 224, {a, a}};
  const ak::LocationTargets loc = ak::location_targets(scene, cfg);
  const std::vector<ak::ShapeAssignment> shapes = ak::shape_targets(scene, cfg, loc, samples);
  ASSERT_TRUE(shapes[1].cells.at(6, 6).has_value());
  EXPECT_EQ(shapes[1].cells.at(6, 6)->gt_index, 0);
}

TEST(ShapeTargets, MatchedDimensionsIgnoreInputOrder) {
  std::mt19937_64 rng(48);
  const ak::PyramidConfig cfg = ak::make_pyramid({8.0, 16.0, 32.0, 64.0}, 256, 256);
  const std::vector<ak::SamplePairSet> samples = nine_pair_samples(cfg);
  for (int k = 0; k < 20; ++k) {
    ak::GroundTruthScene scene = random_scene(rng, 3);
    const ak::LocationTargets loc = ak::location_targets(scene, cfg);
    const auto fwd = ak::shape_targets(scene, cfg, loc, samples);
    std::reverse(scene.boxes.begin(), scene.boxes.end());
    const ak::LocationTargets loc_rev = ak::location_targets(scene, cfg);
    const auto rev = ak::shape_targets(scene, cfg, loc_rev, samples);
    for (std::size_t l = 0; l < fwd.size(); ++l) {
      for (int j = 0; j < fwd[l].cells.height; ++j) {
        for (int i = 0; i < fwd[l].cells.width; ++i) {
          const auto& f = fwd[l].cells.at(i, j);
          const auto& r = rev[l].cells.at(i, j);
          ASSERT_EQ(f.has_value(), r.has_value());
          if (f.has_value()) {
            EXPECT_EQ(f->w, r->w);
            EXPECT_EQ(f->h, r->h);
          }
        }
      }
    }
  }
}

TEST(ShapeTargets, AgreesWithExhaustiveSearchArgmax) {
  // On small scenes the sampled matcher must agree with an exhaustive
  // grid-search comparison, except where the top two values nearly tie.
  std::mt19937_64 rng(49);
  const ak::PyramidConfig cfg = ak::make_pyramid({16.0}, 256, 256);
  const std::vector<ak::SamplePairSet> samples = nine_pair_samples(cfg);
  int checked = 0;
  for (int k = 0; k < 20; ++k) {
    const int n = 1 + static_cast<int>(rng() % 3);
    const ak::GroundTruthScene scene = random_scene(rng, n, 256.0, 16.0, 192.0);
    const ak::LocationTargets loc = ak::location_targets(scene, cfg);
    const auto shapes = ak::shape_targets(scene, cfg, loc, samples);
    const ak::PyramidLevel& lv = cfg.levels[0];
    for (int j = 0; j < lv.grid_h; ++j) {
      for (int i = 0; i < lv.grid_w; ++i) {
        if (!shapes[0].cells.at(i, j).has_value()) continue;
        const ak::Point center = ak::anchor_center(i, j, lv.stride);
        int best = -1;
        double best_v = -1.0, second_v = -1.0;
        for (std::size_t g = 0; g < scene.boxes.size(); ++g) {
          const double v = ak::brute_force_viou(center, scene.boxes[g]);
          if (v > best_v) {
            second_v = best_v;
            best_v = v;
            best = static_cast<int>(g);
          } else if (v > second_v) {
            second_v = v;
          }
        }
        if (scene.boxes.size() > 1 && best_v - second_v < 1e-6) continue;
        ++checked;
        EXPECT_EQ(shapes[0].cells.at(i, j)->gt_index, best)
            << "cell (" << i << "," << j << ") best " << best_v << " second " << second_v;
      }
    }
  }
  EXPECT_GT(checked, 20);
}
