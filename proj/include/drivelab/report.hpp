#ifndef DRIVELAB_REPORT_HPP
#define DRIVELAB_REPORT_HPP

#include <string>
#include <vector>

namespace drivelab {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Log-log scatter with markers and an optional dashed power-law fit line;
/// output bytes are deterministic for identical inputs.
std::string svg_loglog_plot(const PlotSeries& series, double fit_a, double fit_b, double fit_r,
                            bool with_fit, const std::string& title, const std::string& x_label,
                            const std::string& y_label);

/// Log-x / linear-y multi-series line plot (closed-loop score curves).
std::string svg_logx_plot(const std::vector<PlotSeries>& series, const std::string& title,
                          const std::string& x_label, const std::string& y_label);

}  // namespace drivelab

#endif  // DRIVELAB_REPORT_HPP
