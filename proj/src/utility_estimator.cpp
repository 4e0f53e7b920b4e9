#include "fedbid/utility_estimator.hpp"

#include <string>

#include "fedbid/errors.hpp"

namespace fedbid {
namespace {

constexpr int kDivergencePatience = 10;

void require_labels(const LabeledHistory& history) {
  if (history.features.rows() == 0) {
    throw InsufficientDataError("utility estimator: history has no won records");
  }
}

void require_dims(const Eigen::VectorXd& theta, const LabeledHistory& history) {
  if (theta.size() != history.features.cols()) {
    throw std::invalid_argument("utility estimator: theta and features differ in length");
  }
}

Eigen::VectorXd clamped_margin(const Eigen::VectorXd& theta,
                               const LabeledHistory& history, double clamp_eps) {
  return (1.0 + (history.features * theta).array()).max(clamp_eps).matrix();
}

}  // namespace

LabeledHistory labeled_history(std::span<const HistoryRecord> history) {
  Eigen::Index m = 0;
  Eigen::Index d = -1;
  for (const auto& r : history) {
    if (!r.won || !r.realized_utility) continue;
    if (d < 0) d = r.features.size();
    if (r.features.size() != d) {
      throw std::invalid_argument("labeled_history: inconsistent feature length");
    }
    ++m;
  }
  LabeledHistory out;
  out.features.resize(m, std::max<Eigen::Index>(d, 0));
  out.utility.resize(m);
  Eigen::Index row = 0;
  for (const auto& r : history) {
    if (!r.won || !r.realized_utility) continue;
    out.features.row(row) = r.features.transpose();
    out.utility(row) = *r.realized_utility;
    ++row;
  }
  return out;
}

double loss(const Eigen::VectorXd& theta, const LabeledHistory& history,
            double clamp_eps) {
  require_labels(history);
  require_dims(theta, history);
  const Eigen::VectorXd s = clamped_margin(theta, history, clamp_eps).array().log();
  return 0.5 * (history.utility - s).squaredNorm();
}

double loss(const Eigen::VectorXd& theta, std::span<const HistoryRecord> history,
            double clamp_eps) {
  return loss(theta, labeled_history(history), clamp_eps);
}

Eigen::VectorXd gradient(const Eigen::VectorXd& theta, const LabeledHistory& history,
                         double clamp_eps) {
  require_labels(history);
  require_dims(theta, history);
  const Eigen::ArrayXd z = clamped_margin(theta, history, clamp_eps).array();
  const Eigen::VectorXd weights = ((z.log() - history.utility.array()) / z).matrix();
  return history.features.transpose() * weights;
}

Eigen::VectorXd gradient(const Eigen::VectorXd& theta,
                         std::span<const HistoryRecord> history, double clamp_eps) {
  return gradient(theta, labeled_history(history), clamp_eps);
}

Eigen::VectorXd project_theta(const Eigen::VectorXd& theta,
                              const Eigen::MatrixXd& features, double clamp_eps) {
  const Eigen::VectorXd margin = features * theta;
  double scale = 1.0;
  for (Eigen::Index i = 0; i < margin.size(); ++i) {
    if (1.0 + margin(i) < clamp_eps) {
      // 1 + a * margin >= eps  <=>  a <= (1 - eps) / -margin
      scale = std::min(scale, (1.0 - clamp_eps) / -margin(i));
    }
  }
  return scale < 1.0 ? Eigen::VectorXd(scale * theta) : theta;
}

FitResult fit(const LabeledHistory& history, const EstimatorParams& params) {
  require_labels(history);
  if (!(params.learning_rate > 0.0) || params.epochs < 0 || !(params.clamp_eps > 0.0)) {
    throw std::invalid_argument("fit: invalid estimator parameters");
  }
  FitResult result;
  result.theta = Eigen::VectorXd::Zero(history.features.cols());
  result.initial_loss = loss(result.theta, history, params.clamp_eps);
  result.final_loss = result.initial_loss;
  result.loss_trace.reserve(params.epochs);

  double previous = result.initial_loss;
  int increases = 0;
  for (int step = 0; step < params.epochs; ++step) {
    Eigen::VectorXd next =
        result.theta - params.learning_rate * gradient(result.theta, history, params.clamp_eps);
    result.theta = project_theta(next, history.features, params.clamp_eps);
    const double current = loss(result.theta, history, params.clamp_eps);
    if (!std::isfinite(current)) {
      throw DivergenceError("fit: non-finite loss at step " + std::to_string(step) +
                                "; lower the learning rate",
                            step);
    }
    increases = current > previous ? increases + 1 : 0;
    if (increases >= kDivergencePatience) {
      throw DivergenceError("fit: loss increased for " +
                                std::to_string(kDivergencePatience) +
                                " consecutive steps ending at step " +
                                std::to_string(step) + "; lower the learning rate",
                            step);
    }
    result.loss_trace.push_back(current);
    previous = current;
  }
  result.final_loss = previous;
  if (result.final_loss > result.initial_loss) {
    throw DivergenceError("fit: final loss exceeds initial loss after oscillating; "
                          "lower the learning rate",
                          params.epochs - 1);
  }
  return result;
}

FitResult fit(std::span<const HistoryRecord> history, const EstimatorParams& params) {
  return fit(labeled_history(history), params);
}

double true_utility(const DataOwner& owner) {
  const double g = owner.quality_tier == QualityTier::Clean ? 1.0 : kBlurredUtilityFactor;
  return g * std::log1p(owner.num_samples / 1000.0);
}

}  // namespace fedbid
