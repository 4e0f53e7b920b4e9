#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedbid/config.hpp"
#include "fedbid/market.hpp"

namespace fedbid {

// What the warm-up phase learned for one agent.
struct AgentCalibration {
  int agent_id = 0;
  Strategy strategy = Strategy::Const;
  int bootstrap_bids = 0;
  int bootstrap_wins = 0;
  std::optional<Eigen::VectorXd> theta;
  std::optional<double> estimator_initial_loss;
  std::optional<double> estimator_final_loss;
  std::optional<double> c_hat;
  std::optional<LambdaSolution> lambda;
};

struct BootstrapResult {
  std::vector<DataOwner> pool;
  std::vector<ConsumerAgent> agents;  // fitted, ready for the competitive market
  std::vector<std::vector<HistoryRecord>> histories;  // per agent
  std::vector<AgentCalibration> calibration;           // per agent
  int auctions = 0;
};

// Agents as configured, before any fitting.
std::vector<ConsumerAgent> make_agents(const RunConfig& config);

// Warm-up markets in which every agent bids Rand without a budget cap. Each
// agent that bids from utility then fits its estimator on its wins; FBs / FBc
// also calibrate c from their win curve and solve lambda for their budget.
// Throws InsufficientDataError if such an agent won nothing.
BootstrapResult bootstrap_history(const RunConfig& config);

struct MarketPhase {
  BootstrapResult bootstrap;
  MarketResult market;
  MetricsReport metrics;
};

// Bootstrap followed by the competitive market (no FL training).
MarketPhase run_market_phase(const RunConfig& config);

// Test accuracy of a FedAvg model trained on each agent's won owners, in agent
// order. An agent with no owners keeps the untrained (all-zero) model.
std::vector<double> cohort_accuracies(const RunConfig& config,
                                      const std::vector<DataOwner>& pool,
                                      const MarketResult& market,
                                      const Partition& partition);

struct RunArtifacts {
  std::string market_csv;
  std::string summary_csv;
  nlohmann::json calibration;
  MetricsReport metrics;
  RunConfig config;
};

inline constexpr const char* kMarketCsvName = "market.csv";
inline constexpr const char* kSummaryCsvName = "summary.csv";
inline constexpr const char* kCalibrationName = "calibration.json";
inline constexpr const char* kResolvedConfigName = "config.resolved.json";

RunArtifacts run_experiment(const RunConfig& config);

// Writes the artifacts into `dir` (created if needed).
void write_artifacts(const RunArtifacts& artifacts, const std::filesystem::path& dir);

}  // namespace fedbid
