#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "fedbid/types.hpp"

namespace fedbid {

inline constexpr double kDefaultClampEps = 1e-6;

struct EstimatorParams {
  double learning_rate = 0.05;
  int epochs = 5000;
  double clamp_eps = kDefaultClampEps;
};

// s(q) = ln(max(1 + theta^T q, eps))
template <typename DerivedTheta, typename DerivedQ>
typename DerivedTheta::Scalar predict(const Eigen::MatrixBase<DerivedTheta>& theta,
                                      const Eigen::MatrixBase<DerivedQ>& q,
                                      typename DerivedTheta::Scalar clamp_eps =
                                          kDefaultClampEps) {
  using Scalar = typename DerivedTheta::Scalar;
  if (theta.size() != q.size()) {
    throw std::invalid_argument("predict: theta and q have different lengths");
  }
  using std::log;
  using std::max;
  return log(max(Scalar(1) + theta.dot(q), clamp_eps));
}

// Won records stacked row-wise. Lost records carry no label and are dropped.
struct LabeledHistory {
  Eigen::MatrixXd features;  // m x d
  Eigen::VectorXd utility;   // m
};

LabeledHistory labeled_history(std::span<const HistoryRecord> history);

// 1/2 sum (y - s(q))^2 over won records.
double loss(const Eigen::VectorXd& theta, const LabeledHistory& history,
            double clamp_eps = kDefaultClampEps);
double loss(const Eigen::VectorXd& theta, std::span<const HistoryRecord> history,
            double clamp_eps = kDefaultClampEps);

// sum (s(q) - y) q / (1 + theta^T q), the same floor applied to both the log
// argument and the denominator.
Eigen::VectorXd gradient(const Eigen::VectorXd& theta, const LabeledHistory& history,
                         double clamp_eps = kDefaultClampEps);
Eigen::VectorXd gradient(const Eigen::VectorXd& theta,
                         std::span<const HistoryRecord> history,
                         double clamp_eps = kDefaultClampEps);

// Scales theta by the largest factor in (0, 1] that keeps 1 + theta^T q >= eps
// on every row of `features`.
Eigen::VectorXd project_theta(const Eigen::VectorXd& theta,
                              const Eigen::MatrixXd& features, double clamp_eps);

struct FitResult {
  Eigen::VectorXd theta;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::vector<double> loss_trace;  // loss after each step
};

// Full-batch gradient descent from theta = 0.
// Throws DivergenceError if the loss increases for 10 consecutive steps, or
// if the last loss is above the starting one.
FitResult fit(std::span<const HistoryRecord> history, const EstimatorParams& params);
FitResult fit(const LabeledHistory& history, const EstimatorParams& params);

// Ground-truth utility label: g * ln(1 + n / 1000), g = 1 clean, 0.4 blurred.
inline constexpr double kBlurredUtilityFactor = 0.4;
double true_utility(const DataOwner& owner);

}  // namespace fedbid
