#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fedbid/fl_trainer.hpp"
#include "fedbid/market.hpp"

namespace fedbid {

// Bumped whenever a column is added, removed or renamed.
inline constexpr int kMarketCsvVersion = 1;
inline constexpr int kSummaryCsvVersion = 1;
inline constexpr int kCalibrationVersion = 1;

// Shortest round-trip decimal form, so CSVs are byte-stable and re-parse exactly.
std::string format_double(double value);

std::vector<std::string> market_csv_header(const MarketResult& result);
std::vector<std::string> summary_csv_header(const Partition& partition);

// One row per auction in arrival order.
std::string market_csv(const MarketResult& result, const std::vector<DataOwner>& pool);

// One row per agent. unit_price and accuracy are empty when undefined.
std::string summary_csv(const MetricsReport& metrics, const Partition& partition);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(std::string_view name) const;  // -1 when absent
};

// Minimal reader for the files written above (no quoting).
CsvTable parse_csv(std::string_view text);

}  // namespace fedbid
