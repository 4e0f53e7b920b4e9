#include "fedbid/bidding.hpp"

#include <algorithm>
#include <array>

namespace fedbid {
namespace {

constexpr std::array<std::string_view, 6> kStrategyNames = {
    "Const", "Rand", "Bmub", "Lin", "FBs", "FBc"};

constexpr double kLambdaRelTol = 0.01;
constexpr int kLambdaMaxIter = 200;

}  // namespace

std::string_view to_string(Strategy strategy) {
  return kStrategyNames[static_cast<std::size_t>(strategy)];
}

std::optional<Strategy> parse_strategy(std::string_view name) {
  for (std::size_t i = 0; i < kStrategyNames.size(); ++i) {
    if (kStrategyNames[i] == name) return static_cast<Strategy>(i);
  }
  return std::nullopt;
}

void validate(const StrategyParams& params) {
  if (!(params.const_bid > 0.0)) throw std::invalid_argument("const_bid must be > 0");
  if (!(params.rand_max > 0.0)) throw std::invalid_argument("rand_max must be > 0");
  if (!(params.lin_coef > 0.0)) throw std::invalid_argument("lin_coef must be > 0");
  if (!(params.lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  if (!(params.win_model.c > 0.0)) throw std::invalid_argument("win model c must be > 0");
}

double bid_const(const StrategyParams& params) { return params.const_bid; }

double bid_rand(const StrategyParams& params, Rng& rng) {
  return params.rand_max * (1.0 - uniform01(rng));
}

double bid_bmub(double s, Rng& rng) {
  // Always consume one draw so a request's position in the stream does not
  // depend on the utility value.
  const double u = 1.0 - uniform01(rng);
  return s > 0.0 ? s * u : 0.0;
}

double bid_lin(double s, const StrategyParams& params) {
  return params.lin_coef * std::max(s, 0.0);
}

double optimal_bid(double s, const WinningFunctionModel& model, double lambda) {
  return model.form == WinForm::Simple ? bid_fbs(s, model.c, lambda)
                                       : bid_fbc(s, model.c, lambda);
}

double check_foc(double s, double b, const WinningFunctionModel& model,
                 double lambda) {
  const double l1 = lambda + 1.0;
  return l1 * win_prob<double>(model.form, model.c, b) -
         (s - l1 * b) * win_prob_derivative<double>(model.form, model.c, b);
}

double expected_spend_per_request(std::span<const double> utility_samples,
                                  const WinningFunctionModel& model,
                                  double lambda) {
  if (utility_samples.empty()) return 0.0;
  double sum = 0.0;
  for (double s : utility_samples) {
    const double b = optimal_bid(std::max(s, 0.0), model, lambda);
    sum += b * win_prob<double>(model.form, model.c, b);
  }
  return sum / static_cast<double>(utility_samples.size());
}

LambdaSolution solve_lambda(std::span<const double> utility_samples,
                            const WinningFunctionModel& model, double budget,
                            int num_requests) {
  if (utility_samples.empty()) {
    throw std::invalid_argument("solve_lambda: no utility samples");
  }
  if (!(budget > 0.0) || num_requests < 1) {
    throw std::invalid_argument("solve_lambda: need budget > 0 and num_requests >= 1");
  }
  LambdaSolution sol;
  sol.target = budget / num_requests;
  sol.zero_utility_warning = std::all_of(
      utility_samples.begin(), utility_samples.end(), [](double s) { return s <= 0.0; });

  auto g = [&](double lambda) {
    return expected_spend_per_request(utility_samples, model, lambda);
  };

  const double g0 = g(0.0);
  if (sol.zero_utility_warning || g0 <= sol.target) {
    sol.lambda = 0.0;
    sol.expected_spend_per_request = g0;
    return sol;
  }

  double lo = 0.0;
  double hi = 1.0;
  double g_hi = g(hi);
  while (g_hi >= sol.target) {
    lo = hi;
    hi *= 2.0;
    g_hi = g(hi);
  }

  double mid = hi;
  double g_mid = g_hi;
  for (int it = 1; it <= kLambdaMaxIter; ++it) {
    mid = 0.5 * (lo + hi);
    g_mid = g(mid);
    sol.iterations = it;
    if (std::abs(g_mid - sol.target) <= kLambdaRelTol * sol.target) break;
    if (g_mid > sol.target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  sol.lambda = mid;
  sol.expected_spend_per_request = g_mid;
  return sol;
}

}  // namespace fedbid
