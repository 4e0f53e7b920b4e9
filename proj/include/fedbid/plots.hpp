#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace fedbid {

struct Bar {
  std::string label;
  double value = 0.0;
  bool missing = false;  // drawn as an empty slot marked "n/a"
};

// Self-contained SVG, no timestamps or other run-varying metadata.
std::string bar_chart_svg(const std::string& title, const std::string& y_label,
                          const std::vector<Bar>& bars);

struct PlotReport {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> notices;
};

// For every summary.csv under `artifacts_dir`, writes one #Total and one unit
// price chart per budget into a plots/ directory next to it. Filenames carry
// the run seed. Throws on I/O failure.
PlotReport emit_plots(const std::filesystem::path& artifacts_dir);

}  // namespace fedbid
