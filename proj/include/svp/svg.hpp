#pragma once

#include <string>
#include <vector>

namespace svp {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

/// Static SVG with a log10 y axis. Non-positive or non-finite points are skipped.
std::string semilog_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                        const std::vector<PlotSeries>& series);

}  // namespace svp
