#pragma once

#include <string>
#include <vector>

#include "qwem/taskvec.hpp"

namespace qwem {

struct Series {
  std::string label;
  std::vector<double> x, y;
  bool dashed = false;  // dashed stroke (theory overlays)
};

struct ChartConfig {
  int width = 880;
  int height = 540;
  std::string title, xlabel, ylabel;
  bool logx = false;
  bool logy = false;
  std::vector<double> x_markers;  // dotted vertical reference lines
};

// Self-contained SVG text; deterministic (no timestamps, fixed palette).
std::string line_chart_svg(const std::vector<Series>& series, const ChartConfig& cfg);
std::string scatter_chart_svg(const std::vector<Series>& series, const ChartConfig& cfg);

// Histogram bars (density-normalized) plus optional overlay curves.
std::string histogram_svg(const Histogram& hist, const std::vector<Series>& overlays,
                          const ChartConfig& cfg);

}  // namespace qwem
