#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fedbid/random.hpp"
#include "fedbid/types.hpp"

namespace fedbid {

struct LocalDataset {
  Eigen::MatrixXd features;  // n x d
  std::vector<int> labels;   // n, each in [0, K)
  int owner_id = 0;
  int num_relabeled = 0;     // labels redrawn because the owner is Blurred
};

struct Partition {
  enum class Kind { IID, NonIID };
  Kind kind = Kind::IID;
  int shards_per_owner = 0;  // classes per owner; only meaningful for NonIID

  static Partition iid() { return {Kind::IID, 0}; }
  static Partition non_iid(int shards) { return {Kind::NonIID, shards}; }
};

struct PartitionConfig {
  bool non_iid = false;
  int shards_per_owner = 2;
  int num_classes = 10;
};

// Throws ConfigError when NonIID shards_per_owner is outside [1, K].
Partition partition_mode(const PartitionConfig& config);

// K x d matrix of class centers, entries N(0, scale^2).
Eigen::MatrixXd make_class_centers(int num_classes, int dim, double scale, Rng& rng);

// The classes an owner draws from: all K for IID, `shards_per_owner`
// distinct classes (seeded by the owner) for NonIID. Sorted ascending.
std::vector<int> owner_classes(const DataOwner& owner, const Partition& partition,
                               int num_classes);

// n = owner.num_samples points drawn around the class centers with unit
// variance. Blurred owners get a fraction noise_rate_blurred of labels redrawn
// uniformly from the owner's class support.
LocalDataset synth_dataset(const DataOwner& owner, const Eigen::MatrixXd& class_centers,
                           double noise_rate_blurred, const Partition& partition,
                           Rng& rng);

// Balanced-by-expectation clean test set.
LocalDataset synth_test_set(int size, const Eigen::MatrixXd& class_centers, Rng& rng);

// Multinomial logistic regression; weights are K x (d + 1), bias last.
struct SoftmaxModel {
  Eigen::MatrixXd weights;

  static SoftmaxModel zeros(int num_classes, int dim) {
    return {Eigen::MatrixXd::Zero(num_classes, dim + 1)};
  }
  int num_classes() const { return static_cast<int>(weights.rows()); }
  int dim() const { return static_cast<int>(weights.cols()) - 1; }
  bool finite() const { return weights.allFinite(); }
};

// n x K row-wise softmax probabilities.
Eigen::MatrixXd predict_proba(const SoftmaxModel& model, const Eigen::MatrixXd& features);

// Mean cross-entropy and its gradient with respect to the weights.
double cross_entropy(const SoftmaxModel& model, const LocalDataset& data);
Eigen::MatrixXd cross_entropy_gradient(const SoftmaxModel& model, const LocalDataset& data);

// Full-batch gradient descent. Throws DivergenceError on a non-finite update.
SoftmaxModel local_train(const SoftmaxModel& model, const LocalDataset& data,
                         int local_epochs, double lr);

struct ModelUpdate {
  Eigen::MatrixXd weights;
  long long num_samples = 0;
};

// Sample-count weighted average.
Eigen::MatrixXd fedavg(std::span<const ModelUpdate> updates);

// Fraction of argmax-correct predictions; ties go to the lowest class id.
double evaluate(const SoftmaxModel& model, const LocalDataset& testset);

struct FlSettings {
  int local_epochs = 100;
  double lr = 0.05;
  double noise_rate_blurred = 0.4;
  Partition partition = Partition::iid();
};

// One FedAvg round: every owner trains locally from `global`, then the
// updates are averaged in ascending owner-id order. An empty cohort returns
// `global` unchanged.
template <typename DatasetFn>
SoftmaxModel federated_round(const SoftmaxModel& global,
                             std::span<const DataOwner> cohort,
                             const FlSettings& settings, DatasetFn&& dataset_for) {
  if (cohort.empty()) return global;
  std::vector<const DataOwner*> sorted;
  for (const auto& owner : cohort) sorted.push_back(&owner);
  std::sort(sorted.begin(), sorted.end(),
            [](const DataOwner* a, const DataOwner* b) { return a->id < b->id; });
  std::vector<ModelUpdate> updates;
  updates.reserve(sorted.size());
  for (const DataOwner* owner : sorted) {
    const LocalDataset data = dataset_for(*owner);
    SoftmaxModel local = local_train(global, data, settings.local_epochs, settings.lr);
    updates.push_back({std::move(local.weights), static_cast<long long>(data.labels.size())});
  }
  return {fedavg(updates)};
}

}  // namespace fedbid
