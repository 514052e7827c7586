#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "anchorkit/viou.hpp"
#include "oracles.hpp"

namespace ak = anchorkit;

namespace {

bool contains_pair(const ak::SamplePairSet& set, double w, double h, double tol = 1e-9) {
  return std::any_of(set.pairs.begin(), set.pairs.end(), [&](const ak::Size& s) {
    return std::abs(s.w - w) <= tol && std::abs(s.h - h) <= tol;
  });
}

}  // namespace

TEST(SamplePairs, PresetSizes) {
  EXPECT_EQ(ak::sample_pairs(16.0, 8.0, ak::SamplePreset::kThree).pairs.size(), 3u);
  EXPECT_EQ(ak::sample_pairs(16.0, 8.0, ak::SamplePreset::kNine).pairs.size(), 9u);
  EXPECT_EQ(ak::sample_pairs(16.0, 8.0, ak::SamplePreset::kFifteen).pairs.size(), 15u);
  EXPECT_EQ(ak::retinanet_sample_pairs(16.0, 8.0).pairs.size(), 9u);
}

TEST(SamplePairs, NinePairContents) {
  const ak::SamplePairSet nine = ak::retinanet_sample_pairs(16.0, 8.0);
  // Base size is 4 * stride = 64; ratio 1 at scale 1 gives (64, 64).
  EXPECT_TRUE(contains_pair(nine, 64.0, 64.0));
  // Ratio 2 preserves area: (64/sqrt(2), 64*sqrt(2)).
  EXPECT_TRUE(contains_pair(nine, 64.0 / std::sqrt(2.0), 64.0 * std::sqrt(2.0)));
  // Every pair preserves the scaled area base^2 * scale^2.
  for (const ak::Size& s : nine.pairs) {
    const double area = s.w * s.h;
    const double expected1 = 64.0 * 64.0;
    const double expected2 = expected1 * std::exp2(2.0 / 3.0);
    const double expected3 = expected1 * std::exp2(4.0 / 3.0);
    EXPECT_TRUE(std::abs(area - expected1) < 1e-6 || std::abs(area - expected2) < 1e-6 ||
                std::abs(area - expected3) < 1e-6)
        << "unexpected pair area " << area;
  }
}

TEST(SamplePairs, PresetsNest) {
  const ak::SamplePairSet three = ak::sample_pairs(16.0, 8.0, ak::SamplePreset::kThree);
  const ak::SamplePairSet nine = ak::sample_pairs(16.0, 8.0, ak::SamplePreset::kNine);
  const ak::SamplePairSet fifteen = ak::sample_pairs(16.0, 8.0, ak::SamplePreset::kFifteen);
  for (const ak::Size& s : three.pairs) EXPECT_TRUE(contains_pair(nine, s.w, s.h, 0.0));
  for (const ak::Size& s : nine.pairs) EXPECT_TRUE(contains_pair(fifteen, s.w, s.h, 0.0));
}

TEST(SampledViou, ExactShapeInSetGivesOne) {
  const ak::SamplePairSet nine = ak::retinanet_sample_pairs(16.0, 8.0);
  const ak::Box gt{40.0, 52.0, 64.0, 64.0};
  EXPECT_EQ(ak::sampled_viou({40.0, 52.0}, gt, nine), 1.0);
}

TEST(SampledViou, MatchesManualEnumeration) {
  // Enumerate the nine IoUs directly for the offset fixture.
  const ak::SamplePairSet nine = ak::retinanet_sample_pairs(16.0, 8.0);
  const ak::Point center{104.0, 104.0};
  const ak::Box gt{100.0, 100.0, 64.0, 64.0};
  double best = 0.0;
  for (const ak::Size& s : nine.pairs) {
    best = std::max(best, ak::iou({center.x, center.y, s.w, s.h}, gt));
  }
  EXPECT_EQ(ak::sampled_viou(center, gt, nine), best);
  EXPECT_GT(best, 0.5);
}

TEST(SampledViou, NeverExceedsBruteForce) {
  std::mt19937_64 rng(21);
  const ak::SamplePairSet nine = ak::retinanet_sample_pairs(16.0, 8.0);
  std::uniform_real_distribution<double> pos(0.0, 256.0);
  for (int k = 0; k < 200; ++k) {
    const ak::Point center{pos(rng), pos(rng)};
    const ak::Box gt = oracles::random_box(rng);
    EXPECT_LE(ak::sampled_viou(center, gt, nine),
              ak::brute_force_viou(center, gt) + 1e-9);
  }
}

TEST(SampledViou, RefinementIsMonotoneInPresetSize) {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> pos(0.0, 256.0);
  const ak::SamplePairSet three = ak::sample_pairs(16.0, 8.0, ak::SamplePreset::kThree);
  const ak::SamplePairSet nine = ak::sample_pairs(16.0, 8.0, ak::SamplePreset::kNine);
  const ak::SamplePairSet fifteen = ak::sample_pairs(16.0, 8.0, ak::SamplePreset::kFifteen);
  for (int k = 0; k < 500; ++k) {
    const ak::Point center{pos(rng), pos(rng)};
    const ak::Box gt = oracles::random_box(rng);
    const double v3 = ak::sampled_viou(center, gt, three);
    const double v9 = ak::sampled_viou(center, gt, nine);
    const double v15 = ak::sampled_viou(center, gt, fifteen);
    EXPECT_LE(v3, v9);
    EXPECT_LE(v9, v15);
  }
}

TEST(BruteForceViou, CenteredGivesOne) {
  EXPECT_EQ(ak::brute_force_viou({100.0, 100.0}, {100.0, 100.0, 30.0, 14.0}), 1.0);
}

TEST(BruteForceViou, OffsetAnalyticOptimum) {
  // gt spans [-1,1]^2, anchor center (2,0): optimum (w,h) = (6,2) covers the
  // gt with intersection 4 and union 12.
  const double v = ak::brute_force_viou({2.0, 0.0}, {0.0, 0.0, 2.0, 2.0});
  EXPECT_NEAR(v, 1.0 / 3.0, 1e-12);
}

TEST(BruteForceViou, MoreStepsNeverDecreaseTheResult) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> pos(0.0, 256.0);
  for (int k = 0; k < 50; ++k) {
    const ak::Point center{pos(rng), pos(rng)};
    const ak::Box gt = oracles::random_box(rng);
    // 2n-1 log-spaced steps over the same bounds contain all n original
    // steps, so the refined search is a strict superset.
    const ak::GridSearchSpec coarse = ak::GridSearchSpec::covering(center, gt, 65);
    ak::GridSearchSpec fine = coarse;
    fine.steps_per_axis = 129;
    EXPECT_GE(ak::brute_force_viou(center, gt, fine),
              ak::brute_force_viou(center, gt, coarse));
  }
}

TEST(Viou, TranslationInvariance) {
  // Dyadic offsets keep every coordinate exactly representable, so both
  // variants must be bit-identical under translation.
  const ak::SamplePairSet nine = ak::retinanet_sample_pairs(16.0, 8.0);
  const ak::Point center{104.0, 104.0};
  const ak::Box gt{100.0, 100.0, 64.0, 48.0};
  const double dx = 64.0, dy = -32.0;
  const ak::Point moved_center{center.x + dx, center.y + dy};
  const ak::Box moved_gt{gt.x + dx, gt.y + dy, gt.w, gt.h};
  EXPECT_EQ(ak::sampled_viou(center, gt, nine), ak::sampled_viou(moved_center, moved_gt, nine));
  EXPECT_EQ(ak::brute_force_viou(center, gt), ak::brute_force_viou(moved_center, moved_gt));

  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> pos(0.0, 128.0);
  std::uniform_real_distribution<double> shift(-512.0, 512.0);
  for (int k = 0; k < 100; ++k) {
    const ak::Point c{pos(rng), pos(rng)};
    const ak::Box g = oracles::random_box(rng, 128.0);
    const double tx = shift(rng), ty = shift(rng);
    EXPECT_NEAR(ak::sampled_viou(c, g, nine),
                ak::sampled_viou({c.x + tx, c.y + ty}, {g.x + tx, g.y + ty, g.w, g.h}, nine),
                1e-9);
  }
}
