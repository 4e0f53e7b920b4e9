#include "fedbid/report.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "fedbid/errors.hpp"

namespace fedbid {
namespace {

std::string join(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line += ',';
    line += fields[i];
  }
  line += '\n';
  return line;
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::vector<std::string> market_csv_header(const MarketResult& result) {
  std::vector<std::string> header = {"auction",     "owner_id", "num_samples", "quality",
                                     "winner",      "clearing_price"};
  for (const auto& ledger : result.agents) {
    header.push_back("bid_" + std::to_string(ledger.agent_id));
  }
  return header;
}

std::vector<std::string> summary_csv_header(const Partition& partition) {
  return {"agent",      "strategy", "budget",
          "total_samples", "unit_price", "spend",
          partition.kind == Partition::Kind::IID ? "accuracy_iid" : "accuracy_niid"};
}

std::string market_csv(const MarketResult& result, const std::vector<DataOwner>& pool) {
  std::string out = join(market_csv_header(result));
  for (std::size_t t = 0; t < result.log.size(); ++t) {
    const AuctionOutcome& o = result.log[t];
    const auto it = std::find_if(pool.begin(), pool.end(), [&](const DataOwner& d) {
      return d.id == o.request.owner_id;
    });
    if (it == pool.end()) throw std::invalid_argument("market_csv: owner not in pool");
    const DataOwner& owner = *it;
    std::vector<std::string> row = {
        std::to_string(t + 1),
        std::to_string(owner.id),
        std::to_string(owner.num_samples),
        std::string(to_string(owner.quality_tier)),
        o.winner ? std::to_string(*o.winner) : std::string{},
        format_double(o.clearing_price),
    };
    for (const auto& ledger : result.agents) {
      std::string cell;
      for (const auto& bid : o.bids) {
        if (bid.agent_id == ledger.agent_id) cell = format_double(bid.value);
      }
      row.push_back(std::move(cell));
    }
    out += join(row);
  }
  return out;
}

std::string summary_csv(const MetricsReport& metrics, const Partition& partition) {
  std::string out = join(summary_csv_header(partition));
  for (const auto& m : metrics.agents) {
    out += join({
        std::to_string(m.agent_id),
        std::string(to_string(m.strategy)),
        format_double(m.budget),
        std::to_string(m.total_samples),
        m.unit_price_per_1000 ? format_double(*m.unit_price_per_1000) : std::string{},
        format_double(m.spend),
        m.fl_accuracy ? format_double(*m.fl_accuracy) : std::string{},
    });
  }
  return out;
}

int CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  std::size_t start = 0;
  bool first = true;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    start = end + 1;
    if (line.empty()) continue;
    auto fields = split(line);
    if (first) {
      table.header = std::move(fields);
      first = false;
    } else {
      if (fields.size() != table.header.size()) {
        throw FormatError("csv: row has " + std::to_string(fields.size()) +
                          " fields, header has " + std::to_string(table.header.size()));
      }
      table.rows.push_back(std::move(fields));
    }
  }
  return table;
}

}  // namespace fedbid
