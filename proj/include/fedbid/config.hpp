#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedbid/bidding.hpp"
#include "fedbid/fl_trainer.hpp"
#include "fedbid/market.hpp"
#include "fedbid/utility_estimator.hpp"

namespace fedbid {

// Every field maps to one key of the JSON config file; see docs/config.md.
struct RunConfig {
  std::uint64_t master_seed = 0;
  int pool_size = 100;
  SampleRange sample_range{1000, 10000};

  // Budgets are given in nominal units and multiplied by currency_scale.
  double budget = 150.0;
  std::vector<double> budgets;  // per-agent override, same length as strategies
  double currency_scale = 0.01;

  std::vector<Strategy> strategies{std::begin(kAllStrategies), std::end(kAllStrategies)};
  double const_bid = 0.5;
  double rand_max = 1.0;
  double lin_coef = 1.0;

  EstimatorParams estimator{};
  int win_buckets = kDefaultWinBuckets;
  int bootstrap_rounds = 20;

  bool non_iid = false;
  int shards_per_owner = 2;
  double noise_rate_blurred = 0.4;

  int fl_num_features = 8;
  int fl_num_classes = 10;
  double fl_center_scale = 1.5;
  int fl_local_epochs = 100;
  double fl_lr = 0.05;
  int fl_test_size = 2000;

  // Optional real-data run; all four paths or none.
  std::string idx_train_images;
  std::string idx_train_labels;
  std::string idx_test_images;
  std::string idx_test_labels;

  std::string output_dir = "out";

  int num_agents() const { return static_cast<int>(strategies.size()); }
  // Effective (scaled) budget of agent index i.
  double agent_budget(int i) const;
  bool uses_idx() const { return !idx_train_images.empty(); }
  PartitionConfig partition_config() const {
    return {non_iid, shards_per_owner, fl_num_classes};
  }
};

// The keys accepted in a config file.
const std::vector<std::string>& config_keys();

// Throws ConfigError naming the offending key.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config_file(const std::filesystem::path& path);
void validate(const RunConfig& config);

// Fully resolved config, every key present.
nlohmann::json to_json(const RunConfig& config);

// Closest known key by edit distance, empty if nothing is reasonably close.
std::string suggest_key(const std::string& unknown);

}  // namespace fedbid
