#include "fedbid/config.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>

#include "fedbid/errors.hpp"

namespace fedbid {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& key, const std::string& why) {
  throw ConfigError("config key \"" + key + "\": " + why);
}

template <typename T>
T get_as(const json& doc, const std::string& key) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    fail(key, "has the wrong type");
  }
}

template <typename T>
void read(const json& doc, const std::string& key, T& out) {
  if (doc.contains(key)) out = get_as<T>(doc, key);
}

void read_number(const json& doc, const std::string& key, double& out) {
  if (!doc.contains(key)) return;
  if (!doc.at(key).is_number()) fail(key, "must be a number");
  out = doc.at(key).get<double>();
}

void read_int(const json& doc, const std::string& key, int& out) {
  if (!doc.contains(key)) return;
  const json& v = doc.at(key);
  if (!v.is_number_integer()) fail(key, "must be an integer");
  if (v.is_number_unsigned() ? v.get<std::uint64_t>() > std::numeric_limits<int>::max()
                             : (v.get<std::int64_t>() > std::numeric_limits<int>::max() ||
                                v.get<std::int64_t>() < std::numeric_limits<int>::min())) {
    fail(key, "is out of range");
  }
  out = v.get<int>();
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1,
                         prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

double RunConfig::agent_budget(int i) const {
  const double nominal = budgets.empty() ? budget : budgets.at(i);
  return nominal * currency_scale;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "master_seed",         "pool_size",          "sample_min",
      "sample_max",          "budget",             "budgets",
      "currency_scale",      "strategies",         "const_bid",
      "rand_max",            "lin_coef",           "estimator_learning_rate",
      "estimator_epochs",    "estimator_clamp_eps", "win_buckets",
      "bootstrap_rounds",    "partition",          "shards_per_owner",
      "noise_rate_blurred",  "fl_num_features",    "fl_num_classes",
      "fl_center_scale",     "fl_local_epochs",    "fl_lr",
      "fl_test_size",        "idx_train_images",   "idx_train_labels",
      "idx_test_images",     "idx_test_labels",    "output_dir",
  };
  return keys;
}

std::string suggest_key(const std::string& unknown) {
  std::string best;
  std::size_t best_d = std::string::npos;
  for (const auto& key : config_keys()) {
    const std::size_t d = edit_distance(unknown, key);
    if (d < best_d) {
      best_d = d;
      best = key;
    }
  }
  return best_d <= std::max<std::size_t>(2, unknown.size() / 3) ? best : std::string{};
}

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config: top level must be a JSON object");
  const auto& keys = config_keys();
  for (const auto& [key, value] : doc.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      std::string msg = "unknown key";
      if (const std::string hint = suggest_key(key); !hint.empty()) {
        msg += "; did you mean \"" + hint + "\"?";
      }
      fail(key, msg);
    }
  }

  RunConfig cfg;
  if (!doc.contains("master_seed")) fail("master_seed", "is required");
  const json& seed = doc.at("master_seed");
  if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<std::int64_t>() < 0)) {
    fail("master_seed", "must be a non-negative integer");
  }
  cfg.master_seed = doc.at("master_seed").get<std::uint64_t>();

  read_int(doc, "pool_size", cfg.pool_size);
  read_int(doc, "sample_min", cfg.sample_range.min);
  read_int(doc, "sample_max", cfg.sample_range.max);
  read_number(doc, "budget", cfg.budget);
  if (doc.contains("budgets")) {
    const auto& arr = doc.at("budgets");
    if (!arr.is_array()) fail("budgets", "must be an array of numbers");
    cfg.budgets.clear();
    for (const auto& v : arr) {
      if (!v.is_number()) fail("budgets", "must be an array of numbers");
      cfg.budgets.push_back(v.get<double>());
    }
  }
  read_number(doc, "currency_scale", cfg.currency_scale);
  if (doc.contains("strategies")) {
    const auto& arr = doc.at("strategies");
    if (!arr.is_array()) fail("strategies", "must be an array of strategy names");
    cfg.strategies.clear();
    for (const auto& v : arr) {
      if (!v.is_string()) fail("strategies", "must be an array of strategy names");
      const auto s = parse_strategy(v.get<std::string>());
      if (!s) {
        fail("strategies", "unknown strategy \"" + v.get<std::string>() +
                               "\" (expected Const, Rand, Bmub, Lin, FBs or FBc)");
      }
      cfg.strategies.push_back(*s);
    }
  }
  read_number(doc, "const_bid", cfg.const_bid);
  read_number(doc, "rand_max", cfg.rand_max);
  read_number(doc, "lin_coef", cfg.lin_coef);
  read_number(doc, "estimator_learning_rate", cfg.estimator.learning_rate);
  read_int(doc, "estimator_epochs", cfg.estimator.epochs);
  read_number(doc, "estimator_clamp_eps", cfg.estimator.clamp_eps);
  read_int(doc, "win_buckets", cfg.win_buckets);
  read_int(doc, "bootstrap_rounds", cfg.bootstrap_rounds);
  if (doc.contains("partition")) {
    const std::string p = get_as<std::string>(doc, "partition");
    if (p == "iid") {
      cfg.non_iid = false;
    } else if (p == "niid") {
      cfg.non_iid = true;
    } else {
      fail("partition", "must be \"iid\" or \"niid\"");
    }
  }
  read_int(doc, "shards_per_owner", cfg.shards_per_owner);
  read_number(doc, "noise_rate_blurred", cfg.noise_rate_blurred);
  read_int(doc, "fl_num_features", cfg.fl_num_features);
  read_int(doc, "fl_num_classes", cfg.fl_num_classes);
  read_number(doc, "fl_center_scale", cfg.fl_center_scale);
  read_int(doc, "fl_local_epochs", cfg.fl_local_epochs);
  read_number(doc, "fl_lr", cfg.fl_lr);
  read_int(doc, "fl_test_size", cfg.fl_test_size);
  read(doc, "idx_train_images", cfg.idx_train_images);
  read(doc, "idx_train_labels", cfg.idx_train_labels);
  read(doc, "idx_test_images", cfg.idx_test_images);
  read(doc, "idx_test_labels", cfg.idx_test_labels);
  read(doc, "output_dir", cfg.output_dir);

  validate(cfg);
  return cfg;
}

RunConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

void validate(const RunConfig& c) {
  if (c.pool_size < 2) fail("pool_size", "must be >= 2");
  if (c.sample_range.min < 1) fail("sample_min", "must be >= 1");
  if (c.sample_range.max < c.sample_range.min) fail("sample_max", "must be >= sample_min");
  if (!(c.budget > 0.0)) fail("budget", "must be > 0");
  if (!c.budgets.empty()) {
    if (c.budgets.size() != c.strategies.size()) {
      fail("budgets", "must have one entry per strategy");
    }
    for (double b : c.budgets) {
      if (!(b > 0.0)) fail("budgets", "every budget must be > 0");
    }
  }
  if (!(c.currency_scale > 0.0)) fail("currency_scale", "must be > 0");
  if (c.strategies.empty()) fail("strategies", "must name at least one strategy");
  if (!(c.const_bid > 0.0)) fail("const_bid", "must be > 0");
  if (!(c.rand_max > 0.0)) fail("rand_max", "must be > 0");
  if (!(c.lin_coef > 0.0)) fail("lin_coef", "must be > 0");
  if (!(c.estimator.learning_rate > 0.0)) fail("estimator_learning_rate", "must be > 0");
  if (c.estimator.epochs < 0) fail("estimator_epochs", "must be >= 0");
  if (!(c.estimator.clamp_eps > 0.0 && c.estimator.clamp_eps < 1.0)) {
    fail("estimator_clamp_eps", "must lie in (0, 1)");
  }
  if (c.win_buckets < 2) fail("win_buckets", "must be >= 2");
  if (c.bootstrap_rounds < 0) fail("bootstrap_rounds", "must be >= 0");
  if (c.fl_num_classes < 2) fail("fl_num_classes", "must be >= 2");
  if (c.non_iid && (c.shards_per_owner < 1 || c.shards_per_owner > c.fl_num_classes)) {
    fail("shards_per_owner", "must lie in [1, fl_num_classes]");
  }
  if (!(c.noise_rate_blurred >= 0.0 && c.noise_rate_blurred <= 1.0)) {
    fail("noise_rate_blurred", "must lie in [0, 1]");
  }
  if (c.fl_num_features < 1) fail("fl_num_features", "must be >= 1");
  if (!(c.fl_center_scale > 0.0)) fail("fl_center_scale", "must be > 0");
  if (c.fl_local_epochs < 0) fail("fl_local_epochs", "must be >= 0");
  if (!(c.fl_lr > 0.0)) fail("fl_lr", "must be > 0");
  if (c.fl_test_size < 1) fail("fl_test_size", "must be >= 1");
  const int idx_set = !c.idx_train_images.empty() + !c.idx_train_labels.empty() +
                      !c.idx_test_images.empty() + !c.idx_test_labels.empty();
  if (idx_set != 0 && idx_set != 4) {
    fail("idx_train_images", "the four idx_* paths must be given together");
  }
  if (c.output_dir.empty()) fail("output_dir", "must not be empty");
}

json to_json(const RunConfig& c) {
  json strategies = json::array();
  for (Strategy s : c.strategies) strategies.push_back(std::string(to_string(s)));
  return json{
      {"master_seed", c.master_seed},
      {"pool_size", c.pool_size},
      {"sample_min", c.sample_range.min},
      {"sample_max", c.sample_range.max},
      {"budget", c.budget},
      {"budgets", c.budgets},
      {"currency_scale", c.currency_scale},
      {"strategies", strategies},
      {"const_bid", c.const_bid},
      {"rand_max", c.rand_max},
      {"lin_coef", c.lin_coef},
      {"estimator_learning_rate", c.estimator.learning_rate},
      {"estimator_epochs", c.estimator.epochs},
      {"estimator_clamp_eps", c.estimator.clamp_eps},
      {"win_buckets", c.win_buckets},
      {"bootstrap_rounds", c.bootstrap_rounds},
      {"partition", c.non_iid ? "niid" : "iid"},
      {"shards_per_owner", c.shards_per_owner},
      {"noise_rate_blurred", c.noise_rate_blurred},
      {"fl_num_features", c.fl_num_features},
      {"fl_num_classes", c.fl_num_classes},
      {"fl_center_scale", c.fl_center_scale},
      {"fl_local_epochs", c.fl_local_epochs},
      {"fl_lr", c.fl_lr},
      {"fl_test_size", c.fl_test_size},
      {"idx_train_images", c.idx_train_images},
      {"idx_train_labels", c.idx_train_labels},
      {"idx_test_images", c.idx_test_images},
      {"idx_test_labels", c.idx_test_labels},
      {"output_dir", c.output_dir},
  };
}

}  // namespace fedbid
