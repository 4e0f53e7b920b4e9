#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include <Eigen/Dense>

namespace fedbid {

enum class QualityTier { Clean, Blurred };

constexpr std::string_view to_string(QualityTier tier) {
  return tier == QualityTier::Clean ? "clean" : "blurred";
}

struct DataOwner {
  int id = 0;  // 1-based sequence number
  int num_samples = 0;
  QualityTier quality_tier = QualityTier::Clean;
  std::uint64_t local_seed = 0;
};

// Feature layout is fixed for a run: [bias, id / P, num_samples / 10000].
inline constexpr int kFeatureDim = 3;

struct BidRequest {
  int owner_id = 0;
  Eigen::VectorXd features;
};

// One past auction as seen by a single consumer.
struct HistoryRecord {
  Eigen::VectorXd features;
  std::optional<double> realized_utility;  // only observed on wins
  double bid = 0.0;
  bool won = false;
  double clearing_price = 0.0;  // 0 when lost
};

}  // namespace fedbid
