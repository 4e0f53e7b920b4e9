#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fedbid/bidding.hpp"
#include "fedbid/random.hpp"
#include "fedbid/types.hpp"

namespace fedbid {

struct SampleRange {
  int min = 1000;
  int max = 10000;
};

// Owners 1..ceil(P/2) are Blurred, the rest Clean; sizes uniform in range.
std::vector<DataOwner> generate_do_pool(int pool_size, SampleRange range,
                                        std::uint64_t master_seed);

BidRequest make_bid_request(const DataOwner& owner, int pool_size);

struct Bid {
  int agent_id = 0;
  double value = 0.0;
};

struct AuctionOutcome {
  BidRequest request;
  std::vector<Bid> bids;
  std::optional<int> winner;
  double clearing_price = 0.0;
};

// First-price sealed-bid auction. Highest positive bid wins and pays its bid;
// ties are broken uniformly with tie_rng.
AuctionOutcome run_auction(BidRequest request, std::vector<Bid> bids, Rng& tie_rng);

struct ConsumerAgent {
  int id = 0;
  Strategy strategy = Strategy::Const;
  double budget = 0.0;
  double remaining_budget = 0.0;
  Eigen::VectorXd theta;  // estimator parameters; unused by Const and Rand
  double clamp_eps = 1e-6;
  StrategyParams params;  // includes win model and lambda for FBs / FBc

  static ConsumerAgent make(int id, Strategy strategy, double budget,
                            StrategyParams params = {});
};

// Estimated utility of a request for this agent (0 for agents without theta).
double estimated_utility(const ConsumerAgent& agent, const BidRequest& request);

// Unclamped bid of an agent for one request.
double compute_bid(const ConsumerAgent& agent, const BidRequest& request, Rng& rng);

struct MarketConfig {
  std::vector<DataOwner> pool;
  std::vector<ConsumerAgent> agents;
  std::uint64_t seed = 0;
};

struct AgentLedger {
  int agent_id = 0;
  Strategy strategy = Strategy::Const;
  double budget = 0.0;
  double remaining_budget = 0.0;
  std::vector<AuctionOutcome> won;
  std::vector<int> won_owner_ids;
  double total_spend = 0.0;
  long long total_samples = 0;
};

struct MarketResult {
  std::vector<AgentLedger> agents;  // same order as MarketConfig::agents
  std::vector<AuctionOutcome> log;  // one per request, in arrival order
  std::uint64_t seed = 0;
};

// One request per owner in a seeded random order. Agents with budget left
// bid; a bid above the remaining budget is clamped to it.
MarketResult run_market(const MarketConfig& config);

struct AgentMetrics {
  int agent_id = 0;
  Strategy strategy = Strategy::Const;
  double budget = 0.0;
  int num_owners_won = 0;
  long long total_samples = 0;
  double spend = 0.0;
  std::optional<double> unit_price_per_1000;  // absent when nothing was won
  std::optional<double> fl_accuracy;
};

struct MetricsReport {
  std::vector<AgentMetrics> agents;
};

MetricsReport compute_metrics(const MarketResult& result);

}  // namespace fedbid
