#include "fedbid/fl_trainer.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "fedbid/errors.hpp"

namespace fedbid {
namespace {

Eigen::MatrixXd with_bias(const Eigen::MatrixXd& features) {
  Eigen::MatrixXd x(features.rows(), features.cols() + 1);
  x.leftCols(features.cols()) = features;
  x.col(features.cols()).setOnes();
  return x;
}

Eigen::MatrixXd one_hot(std::span<const int> labels, int num_classes) {
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()), num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    y(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  return y;
}

Eigen::MatrixXd softmax_rows(Eigen::MatrixXd logits) {
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    auto row = logits.row(i);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
  return logits;
}

void check_shapes(const SoftmaxModel& model, const LocalDataset& data) {
  if (data.features.cols() != model.dim()) {
    throw std::invalid_argument("softmax: feature dimension does not match model");
  }
  if (static_cast<Eigen::Index>(data.labels.size()) != data.features.rows()) {
    throw std::invalid_argument("softmax: label count does not match feature rows");
  }
  for (int y : data.labels) {
    if (y < 0 || y >= model.num_classes()) {
      throw std::invalid_argument("softmax: label out of range");
    }
  }
}

Eigen::RowVectorXd standard_normal_row(int dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::RowVectorXd v(dim);
  for (int j = 0; j < dim; ++j) v(j) = normal(rng);
  return v;
}

}  // namespace

Partition partition_mode(const PartitionConfig& config) {
  if (!config.non_iid) return Partition::iid();
  if (config.shards_per_owner < 1 || config.shards_per_owner > config.num_classes) {
    throw ConfigError("shards_per_owner must lie in [1, num_classes]");
  }
  return Partition::non_iid(config.shards_per_owner);
}

Eigen::MatrixXd make_class_centers(int num_classes, int dim, double scale, Rng& rng) {
  Eigen::MatrixXd centers(num_classes, dim);
  for (int k = 0; k < num_classes; ++k) {
    centers.row(k) = scale * standard_normal_row(dim, rng);
  }
  return centers;
}

std::vector<int> owner_classes(const DataOwner& owner, const Partition& partition,
                               int num_classes) {
  std::vector<int> classes(num_classes);
  std::iota(classes.begin(), classes.end(), 0);
  if (partition.kind == Partition::Kind::IID ||
      partition.shards_per_owner >= num_classes) {
    return classes;
  }
  Rng rng(mix64(owner.local_seed ^ 0x5348415244ULL));
  std::shuffle(classes.begin(), classes.end(), rng);
  classes.resize(partition.shards_per_owner);
  std::sort(classes.begin(), classes.end());
  return classes;
}

LocalDataset synth_dataset(const DataOwner& owner, const Eigen::MatrixXd& class_centers,
                           double noise_rate_blurred, const Partition& partition,
                           Rng& rng) {
  const int num_classes = static_cast<int>(class_centers.rows());
  const int dim = static_cast<int>(class_centers.cols());
  const std::vector<int> classes = owner_classes(owner, partition, num_classes);
  std::uniform_int_distribution<std::size_t> pick(0, classes.size() - 1);

  LocalDataset data;
  data.owner_id = owner.id;
  data.features.resize(owner.num_samples, dim);
  data.labels.resize(owner.num_samples);
  for (int i = 0; i < owner.num_samples; ++i) {
    const int label = classes[pick(rng)];
    data.labels[i] = label;
    data.features.row(i) = class_centers.row(label) + standard_normal_row(dim, rng);
  }
  if (owner.quality_tier == QualityTier::Blurred && noise_rate_blurred > 0.0) {
    std::bernoulli_distribution flip(noise_rate_blurred);
    for (int i = 0; i < owner.num_samples; ++i) {
      if (flip(rng)) {
        data.labels[i] = classes[pick(rng)];
        ++data.num_relabeled;
      }
    }
  }
  return data;
}

LocalDataset synth_test_set(int size, const Eigen::MatrixXd& class_centers, Rng& rng) {
  DataOwner pseudo;
  pseudo.num_samples = size;
  pseudo.quality_tier = QualityTier::Clean;
  return synth_dataset(pseudo, class_centers, 0.0, Partition::iid(), rng);
}

Eigen::MatrixXd predict_proba(const SoftmaxModel& model, const Eigen::MatrixXd& features) {
  return softmax_rows(with_bias(features) * model.weights.transpose());
}

double cross_entropy(const SoftmaxModel& model, const LocalDataset& data) {
  check_shapes(model, data);
  const Eigen::MatrixXd logits = with_bias(data.features) * model.weights.transpose();
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
    total += lse - logits(i, data.labels[i]);
  }
  return total / static_cast<double>(logits.rows());
}

Eigen::MatrixXd cross_entropy_gradient(const SoftmaxModel& model, const LocalDataset& data) {
  check_shapes(model, data);
  const Eigen::MatrixXd x = with_bias(data.features);
  const Eigen::MatrixXd p = softmax_rows(x * model.weights.transpose());
  const Eigen::MatrixXd residual = p - one_hot(data.labels, model.num_classes());
  return residual.transpose() * x / static_cast<double>(x.rows());
}

SoftmaxModel local_train(const SoftmaxModel& model, const LocalDataset& data,
                         int local_epochs, double lr) {
  if (!model.finite()) throw std::invalid_argument("local_train: model is not finite");
  SoftmaxModel out = model;
  if (local_epochs <= 0 || data.labels.empty()) return out;
  check_shapes(model, data);

  const Eigen::MatrixXd x = with_bias(data.features);
  const Eigen::MatrixXd y = one_hot(data.labels, model.num_classes());
  const double inv_n = 1.0 / static_cast<double>(x.rows());
  for (int epoch = 0; epoch < local_epochs; ++epoch) {
    const Eigen::MatrixXd p = softmax_rows(x * out.weights.transpose());
    out.weights.noalias() -= (lr * inv_n) * ((p - y).transpose() * x);
    if (!out.finite()) {
      throw DivergenceError("local_train: non-finite weights at epoch " +
                                std::to_string(epoch),
                            epoch);
    }
  }
  return out;
}

Eigen::MatrixXd fedavg(std::span<const ModelUpdate> updates) {
  if (updates.empty()) throw std::invalid_argument("fedavg: no updates");
  long long total = 0;
  for (const auto& u : updates) {
    if (u.weights.rows() != updates.front().weights.rows() ||
        u.weights.cols() != updates.front().weights.cols()) {
      throw std::invalid_argument("fedavg: inconsistent weight shapes");
    }
    if (u.num_samples < 0) throw std::invalid_argument("fedavg: negative sample count");
    total += u.num_samples;
  }
  if (total == 0) throw std::invalid_argument("fedavg: zero total sample count");

  Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(updates.front().weights.rows(),
                                              updates.front().weights.cols());
  for (const auto& u : updates) {
    avg += (static_cast<double>(u.num_samples) / static_cast<double>(total)) * u.weights;
  }
  return avg;
}

double evaluate(const SoftmaxModel& model, const LocalDataset& testset) {
  if (testset.labels.empty()) throw std::invalid_argument("evaluate: empty test set");
  const Eigen::MatrixXd logits =
      with_bias(testset.features) * model.weights.transpose();
  long long correct = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    int best = 0;
    for (int k = 1; k < logits.cols(); ++k) {
      if (logits(i, k) > logits(i, best)) best = k;
    }
    if (best == testset.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(logits.rows());
}

}  // namespace fedbid
