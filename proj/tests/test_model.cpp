#include <gtest/gtest.h>

#include "momentum/model.hpp"
#include "momentum/rng.hpp"

using namespace momentum;

namespace {

struct Blobs {
  Eigen::MatrixXd X;
  std::vector<int> y;
};

Blobs blobs(int n, double gap, std::uint64_t seed) {
  Rng rng(seed);
  Blobs b;
  b.X.resize(n, 2);
  for (int i = 0; i < n; ++i) {
    const int c = i % 2;
    b.X(i, 0) = (c ? gap : -gap) + 0.5 * rng.normal();
    b.X(i, 1) = 0.5 * rng.normal();
    b.y.push_back(c);
  }
  return b;
}

DataTable table_from(const Blobs& b, std::uint64_t seed) {
  Rng rng(seed);
  DataTable d;
  d.columns = {"a", "b", "noise"};
  d.values.resize(b.X.rows(), 3);
  d.values.leftCols(2) = b.X;
  for (Eigen::Index i = 0; i < b.X.rows(); ++i) d.values(i, 2) = rng.normal();
  d.labels = b.y;
  return d;
}

}  // namespace

TEST(Scaler, TrainingRowsWithinUnitInterval) {
  const auto b = blobs(50, 1.0, 1);
  const auto s = Scaler::fit(b.X);
  const Eigen::MatrixXd z = s.apply(b.X);
  EXPECT_GE(z.minCoeff(), 0.0);
  EXPECT_LE(z.maxCoeff(), 1.0);
  Eigen::MatrixXd far(1, 2);
  far << 1e6, -1e6;
  const Eigen::MatrixXd zf = s.apply(far);
  EXPECT_EQ(zf(0, 0), 1.5);
  EXPECT_EQ(zf(0, 1), -0.5);
}

TEST(Scaler, ConstantColumnMapsToZero) {
  Eigen::MatrixXd X(3, 1);
  X << 2, 2, 2;
  EXPECT_EQ(Scaler::fit(X).apply(X), Eigen::MatrixXd::Zero(3, 1));
}

TEST(Train, XorSolvedForMostSeeds) {
  Eigen::MatrixXd X(4, 2);
  X << 0, 0, 0, 1, 1, 0, 1, 1;
  const std::vector<int> y{0, 1, 1, 0};
  int solved = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    PsoConfig pso;
    pso.seed = seed;
    const auto net = train_bp_pso(X, y, NetConfig{2, {4}}, pso, BpConfig{});
    const Eigen::VectorXd p = net.predict(X);
    bool all = true;
    for (int i = 0; i < 4; ++i) all = all && ((p(i) >= 0.5) == (y[static_cast<std::size_t>(i)] == 1));
    solved += all;
  }
  EXPECT_GE(solved, 18);
}

TEST(Train, SeparableBlobsHighTestAuc) {
  const auto tr = blobs(200, 2.0, 3);
  const auto te = blobs(200, 2.0, 4);
  const auto net = train_bp_pso(tr.X, tr.y, NetConfig{}, PsoConfig{}, BpConfig{});
  const Eigen::VectorXd s = net.predict(te.X);
  EXPECT_GT(roc_auc(std::span<const double>(s.data(), 200), te.y).auc, 0.99);
}

TEST(Train, HistoryAndFinalLossBound) {
  const auto b = blobs(80, 0.5, 5);
  PsoConfig pso;
  pso.iterations = 30;
  const auto net = train_bp_pso(b.X, b.y, NetConfig{}, pso, {0.05, 100});
  ASSERT_EQ(net.history.pso_best.size(), 31u);
  ASSERT_EQ(net.history.epoch_loss.size(), 100u);
  for (std::size_t k = 1; k < net.history.pso_best.size(); ++k) {
    EXPECT_LE(net.history.pso_best[k], net.history.pso_best[k - 1]);
  }
  EXPECT_LE(net.history.final_loss, net.history.pso_best.back());
  const Eigen::MatrixXd Xs = net.scaler.apply(b.X);
  EXPECT_DOUBLE_EQ(loss(net.config, net.params, Xs, b.y), net.history.final_loss);
}

TEST(Train, Deterministic) {
  const auto b = blobs(60, 0.7, 6);
  PsoConfig pso;
  pso.iterations = 20;
  const auto a = train_bp_pso(b.X, b.y, NetConfig{}, pso, {0.05, 50});
  const auto c = train_bp_pso(b.X, b.y, NetConfig{}, pso, {0.05, 50});
  EXPECT_EQ(a.params, c.params);
  EXPECT_EQ(a.history.epoch_loss, c.history.epoch_loss);
}

TEST(Train, SingleClass) {
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(5, 2);
  try {
    train_bp_pso(X, std::vector<int>(5, 1), NetConfig{}, PsoConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingleClass);
  }
}

TEST(Split, StratifiedKeepsClassRatio) {
  std::vector<int> y;
  for (int i = 0; i < 100; ++i) y.push_back(i < 30 ? 1 : 0);
  const auto s = stratified_split(y, 0.8, 7);
  EXPECT_EQ(s.train.size(), 80u);
  EXPECT_EQ(s.test.size(), 20u);
  int pos = 0;
  for (auto i : s.train) pos += y[static_cast<std::size_t>(i)];
  EXPECT_EQ(pos, 24);
  EXPECT_TRUE(std::is_sorted(s.train.begin(), s.train.end()));
  EXPECT_EQ(stratified_split(y, 0.8, 7).train, s.train);
  EXPECT_NE(stratified_split(y, 0.8, 8).train, s.train);
}

TEST(Split, Chronological) {
  const auto s = chronological_split(10, 0.8);
  EXPECT_EQ(s.train.back(), 7);
  EXPECT_EQ(s.test.front(), 8);
}

TEST(Scenarios, StandardListExtendsStepByStep) {
  const auto sc = standard_scenarios();
  ASSERT_EQ(sc.size(), 4u);
  EXPECT_EQ(sc[0].id, "Base");
  EXPECT_EQ(sc[3].id, "Base+M+CP+V");
  EXPECT_EQ(sc[0].columns.size(), 6u);
  for (std::size_t k = 1; k < 4; ++k) {
    EXPECT_EQ(sc[k].columns.size(), sc[k - 1].columns.size() + 1);
    EXPECT_TRUE(std::equal(sc[k - 1].columns.begin(), sc[k - 1].columns.end(), sc[k].columns.begin()));
  }
  EXPECT_EQ(find_scenario("Base+M").columns.back(), "M");
  EXPECT_THROW(find_scenario("Nope"), Error);
}

TEST(Scenarios, SingleScenarioSingleRow) {
  const auto d = table_from(blobs(120, 1.0, 9), 1);
  ScenarioOptions opt;
  opt.seeds = {1, 2};
  opt.pso.iterations = 10;
  opt.bp.epochs = 50;
  const auto rows = scenario_matrix(d, {{"ab", {"a", "b"}}}, opt);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].runs.size(), 2u);
  EXPECT_NEAR(rows[0].mean.auc, 0.5 * (rows[0].runs[0].metrics.auc + rows[0].runs[1].metrics.auc), 1e-15);
  EXPECT_GT(rows[0].mean.auc, 0.9);
}

TEST(Scenarios, ShuffledLabelsGiveChanceAuc) {
  auto d = table_from(blobs(2000, 1.0, 10), 2);
  Rng rng(3);
  rng.shuffle(d.labels.begin(), d.labels.end());
  ScenarioOptions opt;
  opt.seeds = {1, 2, 3};
  opt.pso.iterations = 20;
  opt.bp.epochs = 100;
  const auto rows = scenario_matrix(d, {{"a", {"a"}}, {"all", {"a", "b", "noise"}}}, opt);
  for (const auto& r : rows) EXPECT_NEAR(r.mean.auc, 0.5, 0.05) << r.spec.id;
}

TEST(Scenarios, UnknownColumn) {
  const auto d = table_from(blobs(20, 1.0, 1), 1);
  try {
    scenario_matrix(d, {{"x", {"zzz"}}}, ScenarioOptions{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownColumn);
  }
}
