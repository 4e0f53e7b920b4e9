#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "fedbid/types.hpp"

namespace fedbid {

enum class WinForm { Simple, Complex };

constexpr std::string_view to_string(WinForm form) {
  return form == WinForm::Simple ? "simple" : "complex";
}

// Probability that a bid wins, as a function of the bid alone.
//   Simple:  W(b) = b / (c + b)
//   Complex: W(b) = b^2 / (c^2 + b^2)
struct WinningFunctionModel {
  WinForm form = WinForm::Simple;
  double c = 1.0;
};

template <typename Scalar>
Scalar win_prob(WinForm form, Scalar c, Scalar b) {
  if (form == WinForm::Simple) return b / (c + b);
  const Scalar b2 = b * b;
  return b2 / (c * c + b2);
}

template <typename Scalar>
Scalar win_prob_derivative(WinForm form, Scalar c, Scalar b) {
  if (form == WinForm::Simple) {
    const Scalar d = c + b;
    return c / (d * d);
  }
  const Scalar d = c * c + b * b;
  return Scalar(2) * b * c * c / (d * d);
}

inline double win_prob(const WinningFunctionModel& model, double b) {
  if (!(b >= 0.0)) throw std::invalid_argument("win_prob: bid must be >= 0");
  return win_prob<double>(model.form, model.c, b);
}

inline double win_prob_derivative(const WinningFunctionModel& model, double b) {
  if (!(b >= 0.0)) {
    throw std::invalid_argument("win_prob_derivative: bid must be >= 0");
  }
  return win_prob_derivative<double>(model.form, model.c, b);
}

struct WinBucket {
  double mid_bid = 0.0;
  double win_rate = 0.0;
  int count = 0;
};

// Non-empty buckets only, sorted by bid.
using WinCurve = std::vector<WinBucket>;

inline constexpr int kDefaultWinBuckets = 20;

// Equal-width buckets over [0, max bid]; per-bucket mean of the win flag.
WinCurve empirical_win_curve(std::span<const HistoryRecord> records,
                             int num_buckets = kDefaultWinBuckets);

// Count-weighted squared residual of W(mid; c) against the bucket rates.
double calibration_objective(const WinCurve& curve, WinForm form, double c);

struct CalibrationInterval {
  double lo = 0.0;
  double hi = 0.0;
};

// The c search interval used by calibrate_c: [1e-4, 10 * largest bucket bid].
CalibrationInterval calibration_interval(const WinCurve& curve);

// Least-squares c by golden-section search over calibration_interval().
// Throws InsufficientDataError for curves that carry no shape information.
double calibrate_c(const WinCurve& curve, WinForm form);

}  // namespace fedbid
