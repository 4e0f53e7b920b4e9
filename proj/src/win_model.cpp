#include "fedbid/win_model.hpp"

#include <algorithm>

#include "fedbid/errors.hpp"
#include "fedbid/golden_section.hpp"

namespace fedbid {

WinCurve empirical_win_curve(std::span<const HistoryRecord> records,
                             int num_buckets) {
  if (records.empty()) {
    throw InsufficientDataError("empirical_win_curve: no records");
  }
  if (num_buckets < 2) {
    throw std::invalid_argument("empirical_win_curve: num_buckets must be >= 2");
  }
  double max_bid = 0.0;
  for (const auto& r : records) max_bid = std::max(max_bid, r.bid);

  std::vector<int> wins(num_buckets, 0);
  std::vector<int> counts(num_buckets, 0);
  const double width = max_bid > 0.0 ? max_bid / num_buckets : 1.0;
  for (const auto& r : records) {
    int k = static_cast<int>(std::max(r.bid, 0.0) / width);
    k = std::min(k, num_buckets - 1);
    ++counts[k];
    if (r.won) ++wins[k];
  }

  WinCurve curve;
  for (int k = 0; k < num_buckets; ++k) {
    if (counts[k] == 0) continue;
    curve.push_back({(k + 0.5) * width,
                     static_cast<double>(wins[k]) / counts[k], counts[k]});
  }
  return curve;
}

double calibration_objective(const WinCurve& curve, WinForm form, double c) {
  double sum = 0.0;
  for (const auto& bucket : curve) {
    const double r = win_prob<double>(form, c, bucket.mid_bid) - bucket.win_rate;
    sum += bucket.count * r * r;
  }
  return sum;
}

CalibrationInterval calibration_interval(const WinCurve& curve) {
  double max_mid = 0.0;
  for (const auto& bucket : curve) max_mid = std::max(max_mid, bucket.mid_bid);
  return {1e-4, 10.0 * max_mid};
}

double calibrate_c(const WinCurve& curve, WinForm form) {
  if (curve.size() < 2) {
    throw InsufficientDataError(
        "calibrate_c: need at least 2 non-empty bid buckets; widen bid exploration");
  }
  const bool all_lost = std::all_of(curve.begin(), curve.end(),
                                    [](const WinBucket& b) { return b.win_rate == 0.0; });
  const bool all_won = std::all_of(curve.begin(), curve.end(),
                                   [](const WinBucket& b) { return b.win_rate == 1.0; });
  if (all_lost || all_won) {
    throw InsufficientDataError(
        "calibrate_c: degenerate win curve (every bucket rate is 0 or every rate is 1); "
        "widen bid exploration");
  }
  const auto [lo, hi] = calibration_interval(curve);
  const auto result = golden_section_minimize(
      [&](double c) { return calibration_objective(curve, form, c); }, lo, hi,
      1e-7);
  return result.x;
}

}  // namespace fedbid
