#include <gtest/gtest.h>

#include "momentum/pipeline.hpp"
#include "momentum/synth.hpp"

using namespace momentum;

namespace {

std::vector<FeatureFrame> sim_frames(int matches, std::uint64_t seed) {
  std::vector<FeatureFrame> out;
  for (const auto& m : simulate_matches({.matches = matches, .seed = seed})) out.push_back(derive_features(m));
  return out;
}

}  // namespace

TEST(Pipeline, DefaultTargetScalesWithLength) {
  EXPECT_EQ(default_target(325), 40);
  EXPECT_EQ(default_target(650), 80);
  EXPECT_EQ(default_target(3), 1);
}

TEST(Pipeline, SeriesShapesAndRanges) {
  const auto frames = sim_frames(3, 1);
  const auto mm = analyze_matches(frames);
  ASSERT_EQ(mm.size(), 3u);
  for (std::size_t i = 0; i < mm.size(); ++i) {
    const auto T = static_cast<std::size_t>(frames[i].size());
    EXPECT_EQ(mm[i].match_id, frames[i].match_id);
    ASSERT_EQ(mm[i].momentum.values.size(), T);
    ASSERT_EQ(mm[i].shift.values.size(), T);
    ASSERT_EQ(mm[i].cusum.changepoints.labels.size(), T);
    for (double v : mm[i].momentum.values) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    double wsum = 0;
    for (double w : mm[i].momentum.weights.weights) wsum += w;
    EXPECT_NEAR(wsum, 1.0, 1e-12);
    ASSERT_TRUE(mm[i].tuning.has_value());
    EXPECT_EQ(mm[i].params.threshold, mm[i].tuning->threshold);
  }
}

TEST(Pipeline, TunerHitsFeasibleTarget) {
  const auto frames = sim_frames(2, 3);
  MomentumOptions opt;
  opt.target = 6;
  for (const auto& m : analyze_matches(frames, opt)) {
    if (m.tuning->converged) EXPECT_LE(std::abs(static_cast<int>(m.cusum.changepoints.size()) - 6), 1);
  }
}

TEST(Pipeline, FixedThresholdSkipsTuning) {
  const auto frames = sim_frames(1, 2);
  MomentumOptions opt;
  opt.threshold = 0.5;
  opt.drift = 0.01;
  const auto mm = analyze_matches(frames, opt).front();
  EXPECT_FALSE(mm.tuning.has_value());
  EXPECT_EQ(mm.params.threshold, 0.5);
  EXPECT_EQ(mm.params.drift, 0.01);
}

TEST(Pipeline, PooledWeightsShared) {
  const auto frames = sim_frames(3, 4);
  MomentumOptions opt;
  opt.pooled_weights = true;
  const auto mm = analyze_matches(frames, opt);
  for (const auto& m : mm) EXPECT_EQ(m.momentum.weights.weights, mm.front().momentum.weights.weights);
}

TEST(Pipeline, ModelTableStacksMatches) {
  const auto frames = sim_frames(2, 5);
  const auto mm = analyze_matches(frames);
  const auto d = build_model_table(frames, mm);
  ASSERT_EQ(d.columns.size(), 19u);
  EXPECT_EQ(d.columns[16], "M");
  EXPECT_EQ(d.columns[18], "V");
  ASSERT_EQ(d.rows(), frames[0].size() + frames[1].size());
  const Eigen::Index off = frames[0].size();
  EXPECT_EQ(d.values(off, d.index_of("x7")), frames[1].column(7)(0));
  EXPECT_EQ(d.values(off + 4, d.index_of("M")), mm[1].momentum.values[4]);
  EXPECT_EQ(d.values(off + 4, d.index_of("V")), mm[1].shift.values[4]);
  EXPECT_EQ(d.labels[static_cast<std::size_t>(off + 2)], frames[1].outcome[2]);
  EXPECT_THROW(build_model_table(frames, {mm[0]}), Error);
}
