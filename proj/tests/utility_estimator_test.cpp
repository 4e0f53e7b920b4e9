#include "fedbid/utility_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fedbid/errors.hpp"
#include "support/oracles.hpp"

namespace fedbid {
namespace {

HistoryRecord won_record(Eigen::VectorXd q, double y) {
  HistoryRecord r;
  r.features = std::move(q);
  r.realized_utility = y;
  r.won = true;
  r.bid = 0.1;
  r.clearing_price = 0.1;
  return r;
}

Eigen::VectorXd market_like_features(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return Eigen::Vector3d(1.0, u(rng), 0.1 + 0.9 * u(rng));
}

// Records labelled exactly by ln(1 + theta*^T q).
std::vector<HistoryRecord> synthetic_history(const Eigen::VectorXd& theta_star, int n,
                                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<HistoryRecord> out;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd q = market_like_features(rng);
    out.push_back(won_record(q, std::log1p(theta_star.dot(q))));
  }
  return out;
}

TEST(Predict, Examples) {
  const Eigen::Vector3d q(0.3, -2.0, 5.0);
  EXPECT_EQ(predict(Eigen::Vector3d::Zero(), q), 0.0);
  EXPECT_NEAR(predict(Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(std::exp(1.0) - 1.0, 7, 9)),
              1.0, 1e-15);
  // 1 - 0.999999 is 1e-6 only up to rounding, hence the tolerance.
  EXPECT_NEAR(predict(Eigen::Vector3d(-0.999999, 0, 0), Eigen::Vector3d(1, 0, 0), 1e-6),
              std::log(1e-6), 1e-9);
  EXPECT_DOUBLE_EQ(predict(Eigen::Vector3d(-5, 0, 0), Eigen::Vector3d(1, 0, 0), 1e-6),
                   std::log(1e-6));
}

TEST(Predict, DimensionMismatchThrows) {
  EXPECT_THROW(predict(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(2)),
               std::invalid_argument);
}

TEST(Predict, MonotoneInMargin) {
  const Eigen::Vector3d q(1.0, 0.0, 0.0);
  double prev = -INFINITY;
  for (int i = -200; i <= 200; ++i) {
    const double v = predict(Eigen::Vector3d(0.01 * i, 0, 0), q);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(Loss, Examples) {
  const Eigen::Vector3d theta(0.2, 0.1, -0.3);
  const Eigen::Vector3d q(1.0, 0.5, 0.4);
  std::vector<HistoryRecord> perfect{won_record(q, predict(theta, q))};
  EXPECT_NEAR(loss(theta, perfect), 0.0, 1e-30);
  std::vector<HistoryRecord> one{won_record(q, 2.0)};
  EXPECT_DOUBLE_EQ(loss(Eigen::Vector3d::Zero(), one), 2.0);
}

TEST(Loss, OrderInvariant) {
  auto history = synthetic_history(Eigen::Vector3d(0.5, 0.3, 1.0), 30, 4);
  const Eigen::Vector3d theta(0.1, -0.2, 0.4);
  const double a = loss(theta, history);
  std::reverse(history.begin(), history.end());
  EXPECT_NEAR(loss(theta, history), a, 1e-12 * a);
}

TEST(Loss, LostRecordsCarryNoLabel) {
  std::vector<HistoryRecord> history{won_record(Eigen::Vector3d(1, 0, 0), 1.0)};
  HistoryRecord lost;
  lost.features = Eigen::Vector3d(1, 1, 1);
  lost.bid = 0.2;
  history.push_back(lost);
  EXPECT_EQ(labeled_history(history).features.rows(), 1);
  EXPECT_DOUBLE_EQ(loss(Eigen::Vector3d::Zero(), history), 0.5);
}

TEST(Loss, EmptyHistoryIsInsufficientData) {
  std::vector<HistoryRecord> none;
  EXPECT_THROW(loss(Eigen::Vector3d::Zero(), none), InsufficientDataError);
  EXPECT_THROW(gradient(Eigen::Vector3d::Zero(), none), InsufficientDataError);
  EXPECT_THROW(fit(none, EstimatorParams{}), InsufficientDataError);
}

TEST(Gradient, ZeroAtPerfectZeroLabel) {
  std::vector<HistoryRecord> one{won_record(Eigen::Vector3d(1, 2, 3), 0.0)};
  EXPECT_EQ(gradient(Eigen::Vector3d::Zero(), one), Eigen::Vector3d::Zero());
}

// Oracle: central differences of the loss, step 1e-6, on draws with |theta^T q| <= 0.9.
TEST(Gradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> u(-1.0, 1.0), y(0.0, 2.0);
  std::uniform_int_distribution<int> size(1, 25);
  for (int draw = 0; draw < 100; ++draw) {
    const int m = size(rng);
    std::vector<Eigen::VectorXd> qs;
    for (int i = 0; i < m; ++i) qs.push_back(Eigen::Vector3d(u(rng), u(rng), u(rng)));
    Eigen::VectorXd theta = Eigen::Vector3d(u(rng), u(rng), u(rng));
    double worst = 0.0;
    for (const auto& q : qs) worst = std::max(worst, std::abs(theta.dot(q)));
    if (worst > 0.9) theta *= 0.9 / worst;
    std::vector<HistoryRecord> history;
    for (const auto& q : qs) history.push_back(won_record(q, y(rng)));
    const LabeledHistory labeled = labeled_history(history);
    const Eigen::VectorXd fd = testing::numerical_gradient(
        [&](const Eigen::VectorXd& t) { return loss(t, labeled); }, theta, 1e-6);
    EXPECT_LE(testing::relative_error(gradient(theta, labeled), fd), 1e-5) << "draw " << draw;
  }
}

TEST(Gradient, DuplicatedRecordsDoubleIt) {
  auto history = synthetic_history(Eigen::Vector3d(0.4, 0.1, 0.7), 12, 9);
  const Eigen::Vector3d theta(-0.1, 0.2, 0.05);
  const Eigen::VectorXd g1 = gradient(theta, history);
  auto doubled = history;
  doubled.insert(doubled.end(), history.begin(), history.end());
  EXPECT_LE((gradient(theta, doubled) - 2.0 * g1).norm(), 1e-12 * g1.norm());
}

TEST(Gradient, DimensionMismatchThrows) {
  std::vector<HistoryRecord> one{won_record(Eigen::Vector3d(1, 0, 0), 1.0)};
  EXPECT_THROW(gradient(Eigen::Vector2d::Zero(), one), std::invalid_argument);
}

// Oracle: labels generated from a known theta*, so zero loss is attainable.
TEST(Fit, RecoversSyntheticTheta) {
  const Eigen::Vector3d theta_star(0.6, 0.8, 1.5);
  const auto history = synthetic_history(theta_star, 10, 31);
  const FitResult r = fit(history, {0.05, 5000, 1e-6});
  EXPECT_LE(r.final_loss, 1e-3 * r.initial_loss);
  EXPECT_EQ(static_cast<int>(r.loss_trace.size()), 5000);
}

TEST(Fit, SinglePointInterpolates) {
  const Eigen::Vector3d q(1.0, 0.3, 0.7);
  std::vector<HistoryRecord> one{won_record(q, 0.9)};
  const FitResult r = fit(one, EstimatorParams{});
  EXPECT_NEAR(predict(r.theta, q), 0.9, 1e-3);
}

TEST(Fit, ZeroEpochsReturnsZeroTheta) {
  const auto history = synthetic_history(Eigen::Vector3d(1, 1, 1), 5, 2);
  const FitResult r = fit(history, {0.05, 0, 1e-6});
  EXPECT_EQ(r.theta, Eigen::Vector3d::Zero());
  EXPECT_EQ(r.final_loss, r.initial_loss);
  EXPECT_TRUE(r.loss_trace.empty());
}

TEST(Fit, SmallStepNeverIncreasesLoss) {
  const auto history = synthetic_history(Eigen::Vector3d(0.6, 0.8, 1.5), 40, 5);
  for (double lr : {0.01, 0.005}) {
    const FitResult r = fit(history, {lr, 3000, 1e-6});
    double prev = r.initial_loss;
    for (double l : r.loss_trace) {
      EXPECT_LE(l, prev);
      prev = l;
    }
  }
}

TEST(Fit, OscillatingStepReportsDivergence) {
  const auto history = synthetic_history(Eigen::Vector3d(0.6, 0.8, 1.5), 40, 5);
  EXPECT_THROW(fit(history, {1.0, 5000, 1e-6}), DivergenceError);
}

TEST(Fit, HugeStepReportsDivergence) {
  const auto history = synthetic_history(Eigen::Vector3d(0.6, 0.8, 1.5), 40, 5);
  try {
    fit(history, {50.0, 5000, 1e-6});
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& e) {
    EXPECT_GE(e.step(), 0);
    EXPECT_LT(e.step(), 5000);
  }
}

TEST(Fit, ProjectionKeepsMarginAboveFloor) {
  // Labels far below zero pull theta toward 1 + theta^T q -> 0.
  std::vector<HistoryRecord> history;
  std::mt19937_64 rng(6);
  for (int i = 0; i < 20; ++i) history.push_back(won_record(market_like_features(rng), -30.0));
  const double eps = 1e-6;
  const FitResult r = fit(history, {0.05, 500, eps});
  const LabeledHistory labeled = labeled_history(history);
  EXPECT_GE((1.0 + (labeled.features * r.theta).array()).minCoeff(), eps * (1.0 - 1e-9));
}

TEST(ProjectTheta, LeavesFeasibleThetaAlone) {
  Eigen::MatrixXd f(2, 3);
  f << 1, 0.5, 0.2, 1, 0.1, 0.9;
  const Eigen::VectorXd theta = Eigen::Vector3d(0.3, -0.2, 0.1);
  EXPECT_EQ(project_theta(theta, f, 1e-6), theta);
  const Eigen::VectorXd bad = Eigen::Vector3d(-3.0, 0.0, 0.0);
  const Eigen::VectorXd fixed = project_theta(bad, f, 1e-6);
  EXPECT_NEAR((1.0 + (f * fixed).array()).minCoeff(), 1e-6, 1e-12);
  EXPECT_NEAR(fixed.normalized().dot(bad.normalized()), 1.0, 1e-15);
}

TEST(TrueUtility, Examples) {
  DataOwner clean{1, 1000, QualityTier::Clean, 0};
  DataOwner blurred{2, 1000, QualityTier::Blurred, 0};
  EXPECT_NEAR(true_utility(clean), 0.6931471805599453, 1e-15);
  EXPECT_NEAR(true_utility(blurred), 0.4 * 0.6931471805599453, 1e-15);
  for (int n = 1000; n < 10000; n += 500) {
    DataOwner a{1, n, QualityTier::Clean, 0}, b{1, n + 1, QualityTier::Clean, 0};
    DataOwner c{1, n, QualityTier::Blurred, 0};
    EXPECT_LT(true_utility(a), true_utility(b));
    EXPECT_GT(true_utility(a), true_utility(c));
  }
}

}  // namespace
}  // namespace fedbid
