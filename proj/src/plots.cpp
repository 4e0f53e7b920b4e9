#include "fedbid/plots.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "fedbid/experiment.hpp"
#include "fedbid/report.hpp"

namespace fedbid {
namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string escape(const std::string& text) {
  std::string out;
  for (char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string num(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

std::string read_seed(const fs::path& dir) {
  const fs::path cal = dir / kCalibrationName;
  if (!fs::exists(cal)) return "unknown";
  const auto doc = nlohmann::json::parse(read_file(cal), nullptr, false);
  if (doc.is_discarded() || !doc.contains("master_seed")) return "unknown";
  return doc["master_seed"].dump();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

std::string bar_chart_svg(const std::string& title, const std::string& y_label,
                          const std::vector<Bar>& bars) {
  constexpr double kWidth = 640, kHeight = 400;
  constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  double vmax = 0.0;
  for (const auto& b : bars) {
    if (!b.missing) vmax = std::max(vmax, b.value);
  }
  if (vmax <= 0.0) vmax = 1.0;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
      << escape(title) << "</text>\n";
  svg << "<text transform=\"translate(16," << kTop + plot_h / 2
      << ") rotate(-90)\" text-anchor=\"middle\">" << escape(y_label) << "</text>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w
      << "\" y2=\"" << kTop + plot_h << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kTop + plot_h << "\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double v = vmax * tick / 4.0;
    const double y = kTop + plot_h - plot_h * tick / 4.0;
    svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">"
        << num(v) << "</text>\n";
  }

  const double slot = bars.empty() ? plot_w : plot_w / static_cast<double>(bars.size());
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const double x = kLeft + slot * static_cast<double>(i);
    const double cx = x + slot / 2;
    if (bars[i].missing) {
      svg << "<text x=\"" << cx << "\" y=\"" << kTop + plot_h - 6
          << "\" text-anchor=\"middle\">n/a</text>\n";
    } else {
      const double h = plot_h * bars[i].value / vmax;
      svg << "<rect x=\"" << x + slot * 0.15 << "\" y=\"" << kTop + plot_h - h << "\" width=\""
          << slot * 0.7 << "\" height=\"" << h << "\" fill=\"#4c72b0\"/>\n";
      svg << "<text x=\"" << cx << "\" y=\"" << kTop + plot_h - h - 4
          << "\" text-anchor=\"middle\">" << num(bars[i].value) << "</text>\n";
    }
    svg << "<text x=\"" << cx << "\" y=\"" << kTop + plot_h + 18
        << "\" text-anchor=\"middle\">" << escape(bars[i].label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

PlotReport emit_plots(const fs::path& artifacts_dir) {
  if (!fs::is_directory(artifacts_dir)) {
    throw std::runtime_error("plot: not a directory: " + artifacts_dir.string());
  }
  std::vector<fs::path> summaries;
  for (const auto& entry : fs::recursive_directory_iterator(artifacts_dir)) {
    if (entry.is_regular_file() && entry.path().filename() == kSummaryCsvName) {
      summaries.push_back(entry.path());
    }
  }
  std::sort(summaries.begin(), summaries.end());

  PlotReport report;
  if (summaries.empty()) {
    report.notices.push_back("no " + std::string(kSummaryCsvName) + " under " +
                             artifacts_dir.string() + "; no charts written");
    return report;
  }

  for (const fs::path& summary_path : summaries) {
    const CsvTable table = parse_csv(read_file(summary_path));
    if (table.rows.empty()) {
      report.notices.push_back(summary_path.string() + " has no rows; no charts written");
      continue;
    }
    const int col_agent = table.column("agent");
    const int col_strategy = table.column("strategy");
    const int col_budget = table.column("budget");
    const int col_total = table.column("total_samples");
    const int col_price = table.column("unit_price");
    if (col_agent < 0 || col_strategy < 0 || col_budget < 0 || col_total < 0 || col_price < 0) {
      report.notices.push_back(summary_path.string() + " has an unexpected header; skipped");
      continue;
    }

    std::map<double, std::pair<std::string, std::vector<const std::vector<std::string>*>>>
        by_budget;
    for (const auto& row : table.rows) {
      auto& slot = by_budget[std::stod(row[col_budget])];
      slot.first = row[col_budget];
      slot.second.push_back(&row);
    }

    const fs::path dir = summary_path.parent_path();
    const std::string seed = read_seed(dir);
    const fs::path out_dir = dir / "plots";
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());

    for (const auto& [budget, entry] : by_budget) {
      const auto& [budget_text, rows] = entry;
      std::vector<Bar> totals, prices;
      for (const auto* row : rows) {
        const std::string label = (*row)[col_strategy] + " #" + (*row)[col_agent];
        totals.push_back({label, std::stod((*row)[col_total]), false});
        const std::string& price = (*row)[col_price];
        prices.push_back({label, price.empty() ? 0.0 : std::stod(price), price.empty()});
      }
      const std::string stem = "_budget" + budget_text + "_seed" + seed + ".svg";
      const fs::path total_path = out_dir / ("total_samples" + stem);
      const fs::path price_path = out_dir / ("unit_price" + stem);
      write_file(total_path, bar_chart_svg("#Total, budget " + budget_text + ", seed " + seed,
                                           "samples acquired", totals));
      write_file(price_path,
                 bar_chart_svg("Unit price per 1,000 samples, budget " + budget_text +
                                   ", seed " + seed,
                               "price per 1,000 samples", prices));
      report.files.push_back(total_path);
      report.files.push_back(price_path);
    }
  }
  return report;
}

}  // namespace fedbid
