#include <gtest/gtest.h>

#include <numeric>

#include "momentum/explain.hpp"
#include "momentum/net.hpp"
#include "momentum/rng.hpp"

using namespace momentum;

namespace {

Eigen::MatrixXd random_rows(int n, int f, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd X(n, f);
  for (Eigen::Index i = 0; i < X.size(); ++i) X(i) = rng.normal();
  return X;
}

BatchPredictor net_predictor(const NetConfig& c, std::vector<double> p) {
  return [c, p](const Eigen::MatrixXd& X) { return forward_batch(c, p, X); };
}

// Shapley values from the permutation definition: average marginal
// contribution over all |F|! orderings, subset values recomputed from scratch.
std::vector<double> permutation_oracle(const BatchPredictor& f, const std::vector<double>& x,
                                       const Eigen::MatrixXd& bg) {
  const int F = static_cast<int>(x.size());
  auto value = [&](const std::vector<bool>& in) {
    double s = 0;
    for (Eigen::Index b = 0; b < bg.rows(); ++b) {
      Eigen::MatrixXd row = bg.row(b);
      for (int j = 0; j < F; ++j) {
        if (in[static_cast<std::size_t>(j)]) row(0, j) = x[static_cast<std::size_t>(j)];
      }
      s += f(row)(0);
    }
    return s / static_cast<double>(bg.rows());
  };
  std::vector<int> order(static_cast<std::size_t>(F));
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> phi(static_cast<std::size_t>(F), 0.0);
  int count = 0;
  do {
    std::vector<bool> in(static_cast<std::size_t>(F), false);
    double prev = value(in);
    for (int j : order) {
      in[static_cast<std::size_t>(j)] = true;
      const double cur = value(in);
      phi[static_cast<std::size_t>(j)] += cur - prev;
      prev = cur;
    }
    ++count;
  } while (std::next_permutation(order.begin(), order.end()));
  for (auto& v : phi) v /= count;
  return phi;
}

}  // namespace

TEST(Shapley, SingleFeature) {
  const auto bg = random_rows(10, 1, 1);
  const BatchPredictor f = [](const Eigen::MatrixXd& X) { return Eigen::VectorXd(X.col(0).array().square()); };
  const std::vector<double> x{1.7};
  const auto r = shapley_values(f, x, bg);
  EXPECT_NEAR(r.phi[0], 1.7 * 1.7 - bg.col(0).array().square().mean(), 1e-14);
  EXPECT_NEAR(r.prediction - r.base, r.phi[0], 1e-15);
}

TEST(Shapley, LinearClosedForm) {
  const auto bg = random_rows(50, 2, 2);
  const double a = 1.3, b = -0.6;
  const BatchPredictor f = [=](const Eigen::MatrixXd& X) { return Eigen::VectorXd(a * X.col(0) + b * X.col(1)); };
  const std::vector<double> x{0.4, 2.2};
  const auto r = shapley_values(f, x, bg);
  EXPECT_NEAR(r.phi[0], a * (x[0] - bg.col(0).mean()), 1e-10);
  EXPECT_NEAR(r.phi[1], b * (x[1] - bg.col(1).mean()), 1e-10);
}

TEST(Shapley, ThreeFeatureNetMatchesPermutationOracle) {
  Rng rng(3);
  const NetConfig c{3, {5}};
  std::vector<double> p(static_cast<std::size_t>(c.param_count()));
  for (auto& v : p) v = rng.normal();
  const auto f = net_predictor(c, p);
  const auto bg = random_rows(20, 3, 4);
  const std::vector<double> x{0.3, -1.1, 0.8};
  const auto r = shapley_values(f, x, bg);
  const auto o = permutation_oracle(f, x, bg);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(r.phi[static_cast<std::size_t>(j)], o[static_cast<std::size_t>(j)], 1e-12);
}

TEST(Shapley, EfficiencySymmetryNullFeature) {
  Rng rng(6);
  const NetConfig c{4, {6}};
  std::vector<double> p(static_cast<std::size_t>(c.param_count()));
  for (auto& v : p) v = rng.normal();
  // Column 3 of W1 zeroed: the net ignores feature 3. Features 0 and 1 share
  // incoming weights so they are interchangeable.
  for (int h = 0; h < 6; ++h) {
    p[static_cast<std::size_t>(h * 4 + 3)] = 0.0;
    p[static_cast<std::size_t>(h * 4 + 1)] = p[static_cast<std::size_t>(h * 4 + 0)];
  }
  const auto f = net_predictor(c, p);
  Eigen::MatrixXd bg = random_rows(30, 4, 7);
  bg.col(1) = bg.col(0);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<double> x{rng.normal(), 0, rng.normal(), rng.normal()};
    x[1] = x[0];
    const auto r = shapley_values(f, x, bg);
    double sum = 0;
    for (double v : r.phi) sum += v;
    Eigen::MatrixXd row(1, 4);
    row << x[0], x[1], x[2], x[3];
    EXPECT_NEAR(sum, f(row)(0) - r.base, 1e-8);
    EXPECT_NEAR(r.phi[0], r.phi[1], 1e-8);
    EXPECT_NEAR(r.phi[3], 0.0, 1e-10);
  }
}

TEST(Shapley, Errors) {
  const BatchPredictor f = [](const Eigen::MatrixXd& X) { return Eigen::VectorXd(X.col(0)); };
  try {
    shapley_values(f, std::vector<double>(16, 0.0), Eigen::MatrixXd::Zero(2, 16));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooManyFeatures);
  }
  try {
    shapley_values(f, std::vector<double>(2, 0.0), Eigen::MatrixXd::Zero(0, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyBackground);
  }
}

TEST(MeanAbsShap, RankingAndTies) {
  ShapReport rep;
  rep.features = {"a", "b", "c"};
  rep.phi.resize(2, 3);
  rep.phi << 0.1, -0.5, 0.2, -0.3, 0.1, 0.2;
  const auto rank = mean_abs_shap(rep);
  // mean |phi|: a 0.2, b 0.3, c 0.2 -> b, then a before c on the tie.
  EXPECT_EQ(rank[0].feature, "b");
  EXPECT_EQ(rank[1].feature, "a");
  EXPECT_EQ(rank[2].feature, "c");
  EXPECT_EQ(rank[2].rank, 3);
}

TEST(MeanAbsShap, ConstantModelAllZero) {
  const BatchPredictor f = [](const Eigen::MatrixXd& X) { return Eigen::VectorXd::Constant(X.rows(), 0.3); };
  const auto bg = random_rows(10, 3, 1);
  const auto rep = explain_rows(f, random_rows(5, 3, 2), bg, {"a", "b", "c"});
  for (const auto& r : mean_abs_shap(rep)) EXPECT_EQ(r.mean_abs, 0.0);
}

TEST(MeanAbsShap, SingleInstanceRanksByMagnitude) {
  const BatchPredictor f = [](const Eigen::MatrixXd& X) {
    return Eigen::VectorXd(0.1 * X.col(0) + 2.0 * X.col(1) - 0.7 * X.col(2));
  };
  Eigen::MatrixXd bg = Eigen::MatrixXd::Zero(1, 3);
  Eigen::MatrixXd x(1, 3);
  x << 1, 1, 1;
  const auto rank = mean_abs_shap(explain_rows(f, x, bg, {"a", "b", "c"}));
  EXPECT_EQ(rank[0].feature, "b");
  EXPECT_EQ(rank[1].feature, "c");
  EXPECT_EQ(rank[2].feature, "a");
}

TEST(Background, SeededSampleWithoutReplacement) {
  const auto rows = random_rows(300, 2, 5);
  const auto a = sample_background(rows, {100, 3});
  const auto b = sample_background(rows, {100, 3});
  EXPECT_EQ(a.rows(), 100);
  EXPECT_EQ(a, b);
  EXPECT_EQ(sample_background(rows.topRows(40), {100, 3}).rows(), 40);
}
