#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>

#include "fedbid/random.hpp"
#include "fedbid/win_model.hpp"

namespace fedbid {

enum class Strategy { Const, Rand, Bmub, Lin, FBs, FBc };

inline constexpr Strategy kAllStrategies[] = {Strategy::Const, Strategy::Rand,
                                              Strategy::Bmub,  Strategy::Lin,
                                              Strategy::FBs,   Strategy::FBc};

std::string_view to_string(Strategy strategy);
std::optional<Strategy> parse_strategy(std::string_view name);

// Strategies that bid from an estimated utility and therefore need a fitted
// estimator.
constexpr bool uses_utility(Strategy s) {
  return s == Strategy::Bmub || s == Strategy::Lin || s == Strategy::FBs ||
         s == Strategy::FBc;
}

constexpr bool is_fed_bidder(Strategy s) {
  return s == Strategy::FBs || s == Strategy::FBc;
}

constexpr WinForm win_form_for(Strategy s) {
  return s == Strategy::FBc ? WinForm::Complex : WinForm::Simple;
}

struct StrategyParams {
  double const_bid = 0.5;
  double rand_max = 1.0;
  double lin_coef = 1.0;
  WinningFunctionModel win_model{};
  double lambda = 0.0;
};

void validate(const StrategyParams& params);

// Baselines.
double bid_const(const StrategyParams& params);
double bid_rand(const StrategyParams& params, Rng& rng);  // uniform (0, rand_max]
double bid_bmub(double s, Rng& rng);                      // uniform (0, s]; 0 if s <= 0
double bid_lin(double s, const StrategyParams& params);   // lin_coef * max(s, 0)

namespace detail {
template <typename Scalar>
void check_bid_inputs(Scalar s, Scalar c, Scalar lambda) {
  if (!(s >= Scalar(0)) || !(c > Scalar(0)) || !(lambda >= Scalar(0))) {
    throw std::invalid_argument(
        "optimal bid: require s >= 0, c > 0, lambda >= 0");
  }
}
}  // namespace detail

// Utility-maximizing bid under W(b) = b / (c + b):
//   b = sqrt(c^2 + s c / (lambda + 1)) - c
// evaluated in the cancellation-free form s k / (sqrt(c^2 + s k) + c),
// k = c / (lambda + 1).
template <typename Scalar>
Scalar bid_fbs(Scalar s, Scalar c, Scalar lambda) {
  detail::check_bid_inputs(s, c, lambda);
  using std::sqrt;
  const Scalar sk = s * c / (lambda + Scalar(1));
  return sk / (sqrt(c * c + sk) + c);
}

// Utility-maximizing bid under W(b) = b^2 / (c^2 + b^2), the real root of
//   b^3 + 3 c^2 b = 2 c^2 s / (lambda + 1).
// With k = c (lambda + 1), r = sqrt(k^2 + s^2) and t = ((s + r) / k)^(1/3),
// Cardano gives b = c (t - 1/t). That difference cancels for small s, so it is
// rewritten through t^3 - 1 = (s + s^2 / (r + k)) / k.
template <typename Scalar>
Scalar bid_fbc(Scalar s, Scalar c, Scalar lambda) {
  detail::check_bid_inputs(s, c, lambda);
  using std::cbrt;
  using std::sqrt;
  const Scalar k = c * (lambda + Scalar(1));
  const Scalar r = sqrt(k * k + s * s);
  const Scalar t = cbrt((s + r) / k);
  const Scalar t3_minus_1 = (s + s * s / (r + k)) / k;
  return c * t3_minus_1 * (t + Scalar(1)) / ((t * t + t + Scalar(1)) * t);
}

// Closed-form optimal bid for the model's form.
double optimal_bid(double s, const WinningFunctionModel& model, double lambda);

// First-order optimality residual (lambda + 1) W(b) - (s - (lambda + 1) b) W'(b).
// Zero at the optimum; negative when overbidding.
double check_foc(double s, double b, const WinningFunctionModel& model,
                 double lambda);

struct LambdaSolution {
  double lambda = 0.0;
  double expected_spend_per_request = 0.0;
  double target = 0.0;  // budget / num_requests
  int iterations = 0;
  bool zero_utility_warning = false;  // every utility sample was 0
};

// Mean of b(s; lambda) * W(b(s; lambda)) over the samples.
double expected_spend_per_request(std::span<const double> utility_samples,
                                  const WinningFunctionModel& model,
                                  double lambda);

// Chooses lambda so that expected spend per request matches budget /
// num_requests to within 1%, or returns 0 if the budget does not bind.
LambdaSolution solve_lambda(std::span<const double> utility_samples,
                            const WinningFunctionModel& model, double budget,
                            int num_requests);

}  // namespace fedbid
