#include "fedbid/market.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "fedbid/errors.hpp"
#include "fedbid/utility_estimator.hpp"

namespace fedbid {

std::vector<DataOwner> generate_do_pool(int pool_size, SampleRange range,
                                        std::uint64_t master_seed) {
  if (pool_size < 2) throw ConfigError("pool_size must be >= 2");
  if (range.min < 1 || range.max < range.min) {
    throw ConfigError("sample range must satisfy 1 <= min <= max");
  }
  Rng rng = make_rng(master_seed, Stream::kPool);
  std::uniform_int_distribution<int> size_dist(range.min, range.max);
  const int blurred = (pool_size + 1) / 2;

  std::vector<DataOwner> pool;
  pool.reserve(pool_size);
  for (int id = 1; id <= pool_size; ++id) {
    DataOwner owner;
    owner.id = id;
    owner.num_samples = size_dist(rng);
    owner.quality_tier = id <= blurred ? QualityTier::Blurred : QualityTier::Clean;
    owner.local_seed = derive_seed(master_seed, Stream::kOwnerData, id);
    pool.push_back(owner);
  }
  return pool;
}

BidRequest make_bid_request(const DataOwner& owner, int pool_size) {
  BidRequest request;
  request.owner_id = owner.id;
  request.features.resize(kFeatureDim);
  request.features << 1.0, static_cast<double>(owner.id) / pool_size,
      owner.num_samples / 10000.0;
  return request;
}

AuctionOutcome run_auction(BidRequest request, std::vector<Bid> bids, Rng& tie_rng) {
  AuctionOutcome outcome;
  outcome.request = std::move(request);
  outcome.bids = std::move(bids);

  double best = 0.0;
  std::vector<int> leaders;
  for (const auto& bid : outcome.bids) {
    if (!(bid.value > 0.0)) continue;
    if (bid.value > best) {
      best = bid.value;
      leaders.assign(1, bid.agent_id);
    } else if (bid.value == best) {
      leaders.push_back(bid.agent_id);
    }
  }
  if (leaders.empty()) return outcome;

  std::size_t pick = 0;
  if (leaders.size() > 1) {
    pick = std::uniform_int_distribution<std::size_t>(0, leaders.size() - 1)(tie_rng);
  }
  outcome.winner = leaders[pick];
  outcome.clearing_price = best;
  return outcome;
}

ConsumerAgent ConsumerAgent::make(int id, Strategy strategy, double budget,
                                  StrategyParams params) {
  ConsumerAgent agent;
  agent.id = id;
  agent.strategy = strategy;
  agent.budget = budget;
  agent.remaining_budget = budget;
  agent.theta = Eigen::VectorXd::Zero(kFeatureDim);
  agent.params = params;
  agent.params.win_model.form = win_form_for(strategy);
  return agent;
}

double estimated_utility(const ConsumerAgent& agent, const BidRequest& request) {
  if (!uses_utility(agent.strategy)) return 0.0;
  return predict(agent.theta, request.features, agent.clamp_eps);
}

double compute_bid(const ConsumerAgent& agent, const BidRequest& request, Rng& rng) {
  const double s = std::max(estimated_utility(agent, request), 0.0);
  switch (agent.strategy) {
    case Strategy::Const:
      return bid_const(agent.params);
    case Strategy::Rand:
      return bid_rand(agent.params, rng);
    case Strategy::Bmub:
      return bid_bmub(s, rng);
    case Strategy::Lin:
      return bid_lin(s, agent.params);
    case Strategy::FBs:
      return bid_fbs(s, agent.params.win_model.c, agent.params.lambda);
    case Strategy::FBc:
      return bid_fbc(s, agent.params.win_model.c, agent.params.lambda);
  }
  return 0.0;
}

MarketResult run_market(const MarketConfig& config) {
  if (config.agents.empty()) throw ConfigError("run_market: no agents");
  if (config.pool.empty()) throw ConfigError("run_market: empty owner pool");

  const int pool_size = static_cast<int>(config.pool.size());
  MarketResult result;
  result.seed = config.seed;

  std::unordered_map<int, std::size_t> index_of;
  for (const auto& agent : config.agents) {
    if (!index_of.emplace(agent.id, result.agents.size()).second) {
      throw ConfigError("run_market: duplicate agent id");
    }
    if (!(agent.budget >= 0.0)) throw ConfigError("run_market: negative budget");
    AgentLedger ledger;
    ledger.agent_id = agent.id;
    ledger.strategy = agent.strategy;
    ledger.budget = agent.budget;
    ledger.remaining_budget = agent.budget;
    result.agents.push_back(std::move(ledger));
  }

  std::vector<std::size_t> order(config.pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng order_rng = make_rng(config.seed, Stream::kRequestOrder);
  std::shuffle(order.begin(), order.end(), order_rng);

  result.log.reserve(order.size());
  for (std::size_t t = 0; t < order.size(); ++t) {
    const DataOwner& owner = config.pool[order[t]];
    BidRequest request = make_bid_request(owner, pool_size);

    std::vector<Bid> bids;
    for (std::size_t a = 0; a < config.agents.size(); ++a) {
      const ConsumerAgent& agent = config.agents[a];
      const AgentLedger& ledger = result.agents[a];
      if (!(ledger.total_spend < ledger.budget)) continue;
      Rng bid_rng = make_rng(config.seed, Stream::kAgentBid,
                             static_cast<std::uint64_t>(agent.id), t);
      double value = compute_bid(agent, request, bid_rng);
      if (!std::isfinite(value) || value < 0.0) value = 0.0;
      value = std::min(value, ledger.budget - ledger.total_spend);
      // Keep cumulative spend <= budget exactly, not just up to rounding.
      while (ledger.total_spend + value > ledger.budget) {
        value = std::nextafter(value, 0.0);
      }
      bids.push_back({agent.id, value});
    }

    Rng tie_rng = make_rng(config.seed, Stream::kTieBreak, t);
    AuctionOutcome outcome = run_auction(std::move(request), std::move(bids), tie_rng);
    if (outcome.winner) {
      AgentLedger& ledger = result.agents[index_of.at(*outcome.winner)];
      ledger.total_spend += outcome.clearing_price;
      ledger.remaining_budget = ledger.budget - ledger.total_spend;
      ledger.total_samples += owner.num_samples;
      ledger.won_owner_ids.push_back(owner.id);
      ledger.won.push_back(outcome);
    }
    result.log.push_back(std::move(outcome));
  }
  return result;
}

MetricsReport compute_metrics(const MarketResult& result) {
  MetricsReport report;
  for (const auto& ledger : result.agents) {
    AgentMetrics m;
    m.agent_id = ledger.agent_id;
    m.strategy = ledger.strategy;
    m.budget = ledger.budget;
    m.num_owners_won = static_cast<int>(ledger.won.size());
    m.total_samples = ledger.total_samples;
    m.spend = ledger.total_spend;
    if (ledger.total_samples > 0) {
      m.unit_price_per_1000 = ledger.total_spend / (ledger.total_samples / 1000.0);
    }
    report.agents.push_back(m);
  }
  return report;
}

}  // namespace fedbid
