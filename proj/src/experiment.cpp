#include "fedbid/experiment.hpp"

#include <fstream>
#include <limits>

#include "fedbid/errors.hpp"
#include "fedbid/idx.hpp"
#include "fedbid/report.hpp"

namespace fedbid {
namespace {

using nlohmann::json;

// Re-throws with the run phase prefixed, keeping the exception type.
template <typename F>
auto in_phase(const char* phase, F&& body) -> decltype(body()) {
  const std::string prefix = std::string(phase) + ": ";
  try {
    return body();
  } catch (const ConfigError& e) {
    throw ConfigError(prefix + e.what());
  } catch (const InsufficientDataError& e) {
    throw InsufficientDataError(prefix + e.what());
  } catch (const DivergenceError& e) {
    throw DivergenceError(prefix + e.what(), e.step());
  } catch (const FormatError& e) {
    throw FormatError(prefix + e.what());
  }
}

std::string agent_label(const ConsumerAgent& agent) {
  return "agent " + std::to_string(agent.id) + " (" + std::string(to_string(agent.strategy)) +
         ")";
}

json to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

LocalDataset as_dataset(const IdxDataset& idx) {
  LocalDataset data;
  data.features = idx.images;
  data.labels = idx.labels;
  return data;
}

}  // namespace

std::vector<ConsumerAgent> make_agents(const RunConfig& config) {
  std::vector<ConsumerAgent> agents;
  StrategyParams params;
  params.const_bid = config.const_bid;
  params.rand_max = config.rand_max;
  params.lin_coef = config.lin_coef;
  for (int i = 0; i < config.num_agents(); ++i) {
    ConsumerAgent agent =
        ConsumerAgent::make(i + 1, config.strategies[i], config.agent_budget(i), params);
    agent.clamp_eps = config.estimator.clamp_eps;
    agents.push_back(std::move(agent));
  }
  return agents;
}

BootstrapResult bootstrap_history(const RunConfig& config) {
  validate(config);
  BootstrapResult out;
  out.pool = generate_do_pool(config.pool_size, config.sample_range, config.master_seed);
  out.agents = make_agents(config);
  out.histories.resize(out.agents.size());
  out.calibration.resize(out.agents.size());

  std::vector<ConsumerAgent> explorers = out.agents;
  for (auto& agent : explorers) {
    agent.strategy = Strategy::Rand;
    agent.budget = std::numeric_limits<double>::infinity();
    agent.remaining_budget = agent.budget;
  }

  for (int round = 0; round < config.bootstrap_rounds; ++round) {
    const MarketResult warmup = run_market(
        {out.pool, explorers, derive_seed(config.master_seed, Stream::kBootstrap, round)});
    for (const AuctionOutcome& outcome : warmup.log) {
      const DataOwner& owner = out.pool[static_cast<std::size_t>(outcome.request.owner_id - 1)];
      for (const Bid& bid : outcome.bids) {
        const bool won = outcome.winner && *outcome.winner == bid.agent_id;
        HistoryRecord record;
        record.features = outcome.request.features;
        record.bid = bid.value;
        record.won = won;
        record.clearing_price = won ? outcome.clearing_price : 0.0;
        if (won) record.realized_utility = true_utility(owner);
        out.histories[static_cast<std::size_t>(bid.agent_id - 1)].push_back(std::move(record));
      }
      ++out.auctions;
    }
  }

  for (std::size_t a = 0; a < out.agents.size(); ++a) {
    ConsumerAgent& agent = out.agents[a];
    const auto& history = out.histories[a];
    AgentCalibration& cal = out.calibration[a];
    cal.agent_id = agent.id;
    cal.strategy = agent.strategy;
    cal.bootstrap_bids = static_cast<int>(history.size());
    for (const auto& r : history) cal.bootstrap_wins += r.won ? 1 : 0;

    if (!uses_utility(agent.strategy)) continue;
    if (cal.bootstrap_wins == 0) {
      throw InsufficientDataError(agent_label(agent) +
                                  " won no bootstrap auctions; increase bootstrap_rounds "
                                  "or rand_max");
    }

    // The loss is a plain sum over wins, so the configured rate is applied
    // per record to keep the step size independent of history length.
    EstimatorParams params = config.estimator;
    params.learning_rate /= cal.bootstrap_wins;
    const FitResult fitted = fit(history, params);
    agent.theta = fitted.theta;
    cal.theta = fitted.theta;
    cal.estimator_initial_loss = fitted.initial_loss;
    cal.estimator_final_loss = fitted.final_loss;

    if (!is_fed_bidder(agent.strategy)) continue;
    const WinCurve curve = empirical_win_curve(history, config.win_buckets);
    agent.params.win_model.form = win_form_for(agent.strategy);
    agent.params.win_model.c = calibrate_c(curve, agent.params.win_model.form);
    cal.c_hat = agent.params.win_model.c;

    std::vector<double> utilities;
    utilities.reserve(history.size());
    for (const auto& r : history) {
      utilities.push_back(predict(agent.theta, r.features, agent.clamp_eps));
    }
    const LambdaSolution sol =
        solve_lambda(utilities, agent.params.win_model, agent.budget, config.pool_size);
    agent.params.lambda = sol.lambda;
    cal.lambda = sol;
  }
  return out;
}

MarketPhase run_market_phase(const RunConfig& config) {
  MarketPhase phase;
  phase.bootstrap = in_phase("bootstrap", [&] { return bootstrap_history(config); });
  phase.market = in_phase("market", [&] {
    return run_market({phase.bootstrap.pool, phase.bootstrap.agents, config.master_seed});
  });
  phase.metrics = compute_metrics(phase.market);
  return phase;
}

std::vector<double> cohort_accuracies(const RunConfig& config,
                                      const std::vector<DataOwner>& pool,
                                      const MarketResult& market,
                                      const Partition& partition) {
  FlSettings settings;
  settings.local_epochs = config.fl_local_epochs;
  settings.lr = config.fl_lr;
  settings.noise_rate_blurred = config.noise_rate_blurred;
  settings.partition = partition;

  auto cohort_of = [&](const AgentLedger& ledger) {
    std::vector<DataOwner> cohort;
    for (int id : ledger.won_owner_ids) cohort.push_back(pool.at(static_cast<std::size_t>(id - 1)));
    return cohort;
  };

  std::vector<double> accuracies;
  if (config.uses_idx()) {
    const IdxDataset train = load_idx(config.idx_train_images, config.idx_train_labels);
    const LocalDataset test = as_dataset(load_idx(config.idx_test_images, config.idx_test_labels));
    const int dim = static_cast<int>(train.images.cols());
    for (const auto& ledger : market.agents) {
      const auto cohort = cohort_of(ledger);
      const SoftmaxModel model = federated_round(
          SoftmaxModel::zeros(config.fl_num_classes, dim), cohort, settings,
          [&](const DataOwner& owner) {
            Rng rng = make_rng(owner.local_seed, Stream::kIdxSampling);
            return sample_owner_dataset(train, owner, partition, config.fl_num_classes,
                                        config.noise_rate_blurred, rng);
          });
      accuracies.push_back(evaluate(model, test));
    }
    return accuracies;
  }

  Rng center_rng = make_rng(config.master_seed, Stream::kClassCenters);
  const Eigen::MatrixXd centers = make_class_centers(
      config.fl_num_classes, config.fl_num_features, config.fl_center_scale, center_rng);
  Rng test_rng = make_rng(config.master_seed, Stream::kTestSet);
  const LocalDataset test = synth_test_set(config.fl_test_size, centers, test_rng);
  for (const auto& ledger : market.agents) {
    const auto cohort = cohort_of(ledger);
    const SoftmaxModel model = federated_round(
        SoftmaxModel::zeros(config.fl_num_classes, config.fl_num_features), cohort, settings,
        [&](const DataOwner& owner) {
          Rng rng(mix64(owner.local_seed));
          return synth_dataset(owner, centers, config.noise_rate_blurred, partition, rng);
        });
    accuracies.push_back(evaluate(model, test));
  }
  return accuracies;
}

RunArtifacts run_experiment(const RunConfig& config) {
  validate(config);
  MarketPhase phase = run_market_phase(config);
  const Partition partition =
      in_phase("config", [&] { return partition_mode(config.partition_config()); });
  const std::vector<double> accuracies = in_phase("training", [&] {
    return cohort_accuracies(config, phase.bootstrap.pool, phase.market, partition);
  });
  for (std::size_t a = 0; a < phase.metrics.agents.size(); ++a) {
    phase.metrics.agents[a].fl_accuracy = accuracies[a];
  }

  RunArtifacts artifacts;
  artifacts.config = config;
  artifacts.metrics = phase.metrics;
  artifacts.market_csv = market_csv(phase.market, phase.bootstrap.pool);
  artifacts.summary_csv = summary_csv(phase.metrics, partition);

  json agents = json::array();
  for (std::size_t a = 0; a < phase.bootstrap.agents.size(); ++a) {
    const ConsumerAgent& agent = phase.bootstrap.agents[a];
    const AgentCalibration& cal = phase.bootstrap.calibration[a];
    json entry = {
        {"agent", agent.id},
        {"strategy", std::string(to_string(agent.strategy))},
        {"budget", agent.budget},
        {"bootstrap_bids", cal.bootstrap_bids},
        {"bootstrap_wins", cal.bootstrap_wins},
        {"theta", cal.theta ? to_json(*cal.theta) : json(nullptr)},
        {"estimator_initial_loss",
         cal.estimator_initial_loss ? json(*cal.estimator_initial_loss) : json(nullptr)},
        {"estimator_final_loss",
         cal.estimator_final_loss ? json(*cal.estimator_final_loss) : json(nullptr)},
        {"win_form", is_fed_bidder(agent.strategy)
                         ? json(std::string(to_string(agent.params.win_model.form)))
                         : json(nullptr)},
        {"c_hat", cal.c_hat ? json(*cal.c_hat) : json(nullptr)},
        {"lambda", cal.lambda ? json(cal.lambda->lambda) : json(nullptr)},
    };
    if (cal.lambda) {
      entry["lambda_expected_spend_per_request"] = cal.lambda->expected_spend_per_request;
      entry["lambda_target_spend_per_request"] = cal.lambda->target;
      entry["lambda_iterations"] = cal.lambda->iterations;
      entry["lambda_zero_utility_warning"] = cal.lambda->zero_utility_warning;
    }
    agents.push_back(std::move(entry));
  }
  artifacts.calibration = {
      {"schema",
       {{"calibration", kCalibrationVersion},
        {"market_csv", kMarketCsvVersion},
        {"summary_csv", kSummaryCsvVersion}}},
      {"master_seed", config.master_seed},
      {"currency_scale", config.currency_scale},
      {"bootstrap_rounds", config.bootstrap_rounds},
      {"bootstrap_auctions", phase.bootstrap.auctions},
      {"agents", std::move(agents)},
  };
  return artifacts;
}

void write_artifacts(const RunArtifacts& artifacts, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const char* name, const std::string& text) {
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
  };
  write(kMarketCsvName, artifacts.market_csv);
  write(kSummaryCsvName, artifacts.summary_csv);
  write(kCalibrationName, artifacts.calibration.dump(2) + "\n");
  write(kResolvedConfigName, to_json(artifacts.config).dump(2) + "\n");
}

}  // namespace fedbid
