// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fedbid/bidding.hpp"
#include "fedbid/config.hpp"
#include "fedbid/experiment.hpp"
#include "fedbid/utility_estimator.hpp"
#include "fedbid/win_model.hpp"
#include "support/oracles.hpp"

namespace {

using namespace fedbid;
using fedbid::testing::OracleForm;

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const std::function<Verdict()>& check) {
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = check();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!v.pass) ++failures;
  std::printf("%s %2d %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str(),
              secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<testing::BidTriple> triples() {
  std::mt19937_64 rng(20240601);
  std::vector<testing::BidTriple> out(1000);
  for (auto& t : out) t = testing::random_triple(rng);
  return out;
}

Verdict closed_form_certification() {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  int bad = 0;
  for (const auto& t : triples()) {
    const double os = testing::oracle_optimal_bid(t.s, OracleForm::Simple, t.c, t.lambda);
    const double oc = testing::oracle_optimal_bid(t.s, OracleForm::Complex, t.c, t.lambda);
    const double es = std::abs(bid_fbs(t.s, t.c, t.lambda) - os) / (1.0 + os);
    const double ec = std::abs(bid_fbc(t.s, t.c, t.lambda) - oc) / (1.0 + oc);
    worst = std::max({worst, es, ec});
    bad += (es > 1e-4) + (ec > 1e-4);
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {bad == 0 && secs < 60.0,
          fmt("max |b - oracle|/(1+oracle) = %.2e over 2x1000 triples, %d above 1e-4, %.1f s",
              worst, bad, secs)};
}

Verdict foc_residual() {
  double worst = 0.0;
  for (const auto& t : triples()) {
    const double rs = check_foc(t.s, bid_fbs(t.s, t.c, t.lambda), {WinForm::Simple, t.c}, t.lambda);
    const double rc = check_foc(t.s, bid_fbc(t.s, t.c, t.lambda), {WinForm::Complex, t.c}, t.lambda);
    worst = std::max({worst, std::abs(rs) / (1.0 + t.s), std::abs(rc) / (1.0 + t.s)});
  }
  return {worst <= 1e-9, fmt("max |residual|/(1+s) = %.2e (limit 1e-9)", worst)};
}

Verdict cubic_identity() {
  double worst = 0.0;
  for (const auto& t : triples()) {
    const double b = bid_fbc(t.s, t.c, t.lambda);
    const double rhs = 2.0 * t.c * t.c * t.s / (t.lambda + 1.0);
    worst = std::max(worst, std::abs(b * b * b + 3.0 * t.c * t.c * b - rhs) / (1.0 + std::abs(rhs)));
  }
  return {worst <= 1e-8, fmt("max |b^3 + 3c^2 b - rhs|/(1+|rhs|) = %.2e (limit 1e-8)", worst)};
}

Verdict estimator_gradient() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0), y(0.0, 2.5);
  std::uniform_int_distribution<int> size(1, 40);
  double worst = 0.0;
  for (int draw = 0; draw < 100; ++draw) {
    LabeledHistory h;
    const int m = size(rng);
    h.features.resize(m, 3);
    h.utility.resize(m);
    for (int i = 0; i < m; ++i) {
      h.features.row(i) << u(rng), u(rng), u(rng);
      h.utility(i) = y(rng);
    }
    Eigen::VectorXd theta = Eigen::Vector3d(u(rng), u(rng), u(rng));
    const double reach = (h.features * theta).cwiseAbs().maxCoeff();
    if (reach > 0.9) theta *= 0.9 / reach;
    const Eigen::VectorXd fd = testing::numerical_gradient(
        [&](const Eigen::VectorXd& t) { return loss(t, h); }, theta, 1e-6);
    worst = std::max(worst, testing::relative_error(gradient(theta, h), fd));
  }
  return {worst <= 1e-5, fmt("max relative error = %.2e over 100 instances (limit 1e-5)", worst)};
}

Verdict lambda_solver() {
  double worst_gap = 0.0;
  int increases = 0, cases = 0;
  for (std::uint64_t set = 1; set <= 5; ++set) {
    std::mt19937_64 rng(set * 1009);
    std::uniform_real_distribution<double> s(0.0, 3.0);
    std::vector<double> samples(500);
    for (auto& x : samples) x = s(rng);
    for (WinForm form : {WinForm::Simple, WinForm::Complex}) {
      const WinningFunctionModel model{form, 0.5 + 0.2 * static_cast<double>(set)};
      const int n = 100;
      // Budget at 40% of the unconstrained spend, so the constraint binds.
      const double budget = 0.4 * n * expected_spend_per_request(samples, model, 0.0);
      const LambdaSolution full = solve_lambda(samples, model, budget, n);
      const LambdaSolution half = solve_lambda(samples, model, budget / 2.0, n);
      for (const auto& sol : {full, half}) {
        worst_gap = std::max(worst_gap,
                             std::abs(sol.expected_spend_per_request - sol.target) / sol.target);
      }
      increases += half.lambda > full.lambda && full.lambda > 0.0;
      ++cases;
    }
  }
  return {worst_gap <= 0.01 && increases == cases,
          fmt("max |g - B/N|/(B/N) = %.2e (limit 1e-2); lambda rose on halving in %d/%d",
              worst_gap, increases, cases)};
}

Verdict calibration_recovery() {
  struct Case {
    WinForm form;
    double c_star;
  };
  std::string detail;
  bool pass = true;
  for (const Case k : {Case{WinForm::Simple, 2.0}, Case{WinForm::Complex, 1.5}}) {
    int ok = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      std::mt19937_64 rng(seed * 7919);
      std::uniform_real_distribution<double> bid(0.0, 5.0 * k.c_star), u(0.0, 1.0);
      std::vector<HistoryRecord> records(10000);
      for (auto& r : records) {
        r.bid = bid(rng);
        const double w = k.form == WinForm::Simple
                             ? r.bid / (k.c_star + r.bid)
                             : r.bid * r.bid / (k.c_star * k.c_star + r.bid * r.bid);
        r.won = u(rng) < w;
      }
      const double c_hat = calibrate_c(empirical_win_curve(records), k.form);
      const double err = std::abs(c_hat - k.c_star) / k.c_star;
      worst = std::max(worst, err);
      ok += err <= 0.05;
    }
    pass &= ok >= 9;
    detail += fmt("%s c*=%.1f: %d/10 within 5%% (worst %.3f); ", std::string(to_string(k.form)).c_str(), k.c_star,
                  ok, worst);
  }
  return {pass, detail};
}

RunConfig default_config(std::uint64_t seed, double budget, bool non_iid = false) {
  nlohmann::json doc = {{"master_seed", seed}, {"budget", budget}};
  if (non_iid) doc["partition"] = "niid";
  return parse_config(doc);
}

constexpr double kBudgets[] = {50.0, 150.0, 300.0};

// Market-only runs shared by criteria 7, 8 and 10.
struct MarketRun {
  double budget;
  std::uint64_t seed;
  MarketPhase phase;
};

double market_runs_seconds = 0.0;

const std::vector<MarketRun>& market_runs() {
  static const std::vector<MarketRun> runs = [] {
    const auto start = std::chrono::steady_clock::now();
    std::vector<MarketRun> out;
    for (double budget : kBudgets) {
      for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        out.push_back({budget, seed, run_market_phase(default_config(seed, budget))});
      }
    }
    market_runs_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
  }();
  return runs;
}

Verdict budget_safety_and_determinism() {
  int violations = 0, ledgers = 0;
  for (const auto& run : market_runs()) {
    for (const auto& ledger : run.phase.market.agents) {
      double spent = 0.0;
      for (const auto& won : ledger.won) {
        spent += won.clearing_price;
        violations += spent > ledger.budget;
      }
      violations += ledger.total_spend > ledger.budget;
      ++ledgers;
    }
  }
  int identical = 0;
  const std::uint64_t seeds[] = {7, 8};
  for (std::uint64_t seed : seeds) {
    const RunArtifacts a = run_experiment(default_config(seed, 150.0));
    const RunArtifacts b = run_experiment(default_config(seed, 150.0));
    identical += a.market_csv == b.market_csv && a.summary_csv == b.summary_csv &&
                 a.calibration.dump() == b.calibration.dump();
  }
  return {violations == 0 && identical == 2,
          fmt("%d budget violations over %d agent ledgers; %d/2 repeated runs byte-identical",
              violations, ledgers, identical)};
}

const AgentMetrics& metrics_for(const MetricsReport& m, Strategy s) {
  return *std::find_if(m.agents.begin(), m.agents.end(),
                       [s](const AgentMetrics& a) { return a.strategy == s; });
}

// Unit price with nothing bought counts as worse than any finite price.
double unit_price_or_inf(const AgentMetrics& m) {
  return m.unit_price_per_1000.value_or(INFINITY);
}

Verdict table1_direction() {
  const auto start = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail;
  for (double budget : kBudgets) {
    int fbs_ok = 0, fbc_ok = 0;
    double adv_fbs = 0.0, adv_fbc = 0.0;
    double sum_lin = 0.0, sum_fbs = 0.0, sum_fbc = 0.0;
    for (const auto& run : market_runs()) {
      if (run.budget != budget) continue;
      const MetricsReport& m = run.phase.metrics;
      const AgentMetrics& lin = metrics_for(m, Strategy::Lin);
      const AgentMetrics& fbs = metrics_for(m, Strategy::FBs);
      const AgentMetrics& fbc = metrics_for(m, Strategy::FBc);
      auto dominates = [&](const AgentMetrics& fb) {
        return fb.total_samples >= lin.total_samples &&
               unit_price_or_inf(fb) <= unit_price_or_inf(lin);
      };
      fbs_ok += dominates(fbs);
      fbc_ok += dominates(fbc);
      adv_fbs += static_cast<double>(fbs.total_samples - lin.total_samples) / 10.0;
      adv_fbc += static_cast<double>(fbc.total_samples - lin.total_samples) / 10.0;
      sum_lin += static_cast<double>(lin.total_samples) / 10.0;
      sum_fbs += static_cast<double>(fbs.total_samples) / 10.0;
      sum_fbc += static_cast<double>(fbc.total_samples) / 10.0;
    }
    const double best_adv = std::max(adv_fbs, adv_fbc);
    pass &= fbs_ok >= 8 && fbc_ok >= 8 && best_adv > 0.0;
    detail += fmt("budget %g: FBs %d/10, FBc %d/10, mean #Total Lin %.0f FBs %.0f FBc %.0f; ",
                  budget, fbs_ok, fbc_ok, sum_lin, sum_fbs, sum_fbc);
  }
  // The 30 markets are shared with criterion 7; their cost counts here too.
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() +
      market_runs_seconds;
  pass &= secs < 300.0;
  return {pass, detail + fmt("%.1f s including the 30 markets", secs)};
}

Verdict table2_direction() {
  constexpr int kSeeds = 5;
  double mean[2][6] = {};
  for (int p = 0; p < 2; ++p) {
    for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
      const RunArtifacts art = run_experiment(default_config(seed, 150.0, p == 1));
      for (std::size_t a = 0; a < 6; ++a) {
        mean[p][a] += *art.metrics.agents[a].fl_accuracy / kSeeds;
      }
    }
  }
  auto idx = [](Strategy s) { return static_cast<std::size_t>(s); };
  bool pass = true;
  std::string detail;
  for (int p = 0; p < 2; ++p) {
    const double rand_acc = mean[p][idx(Strategy::Rand)];
    pass &= mean[p][idx(Strategy::FBs)] >= rand_acc && mean[p][idx(Strategy::FBc)] >= rand_acc;
    detail += p == 0 ? "IID" : "NIID";
    for (Strategy s : kAllStrategies) detail += fmt(" %s=%.4f", std::string(to_string(s)).c_str(), mean[p][idx(s)]);
    detail += "; ";
  }
  int ordered = 0;
  for (std::size_t a = 0; a < 6; ++a) ordered += mean[1][a] <= mean[0][a];
  pass &= ordered == 6;
  return {pass, detail + fmt("NIID <= IID for %d/6 strategies", ordered)};
}

Verdict estimator_sanity() {
  long long pairs = 0, wins = 0;
  for (const auto& run : market_runs()) {
    if (run.budget != 150.0) continue;
    const auto& pool = run.phase.bootstrap.pool;
    const int p = static_cast<int>(pool.size());
    for (const auto& agent : run.phase.bootstrap.agents) {
      if (!uses_utility(agent.strategy)) continue;
      // Blurred owner i paired with clean owner i + P/2 at the blurred owner's size.
      for (int i = 1; i <= p / 2; ++i) {
        const double q_n = pool[static_cast<std::size_t>(i - 1)].num_samples / 10000.0;
        const Eigen::Vector3d blurred(1.0, static_cast<double>(i) / p, q_n);
        const Eigen::Vector3d clean(1.0, static_cast<double>(i + p / 2) / p, q_n);
        wins += predict(agent.theta, clean, agent.clamp_eps) >
                predict(agent.theta, blurred, agent.clamp_eps);
        ++pairs;
      }
    }
  }
  const double share = static_cast<double>(wins) / static_cast<double>(pairs);
  return {share >= 0.95, fmt("clean > blurred in %lld/%lld pairs (%.1f%%, limit 95%%)", wins,
                             pairs, 100.0 * share)};
}

}  // namespace

int main() {
  report(1, "closed-form bids match brute-force optimum", closed_form_certification);
  report(2, "first-order condition residual", foc_residual);
  report(3, "cubic identity for FBc", cubic_identity);
  report(4, "estimator gradient vs finite differences", estimator_gradient);
  report(5, "lambda solver hits budget and responds to it", lambda_solver);
  report(6, "win-function calibration recovery", calibration_recovery);
  report(7, "budget safety and determinism", budget_safety_and_determinism);
  report(8, "FB variants vs Lin on #Total and unit price", table1_direction);
  report(9, "FB cohorts vs Rand cohorts on accuracy", table2_direction);
  report(10, "estimator ranks clean above blurred", estimator_sanity);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
