#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

// Plain SVG charts for the report stage.
namespace stmc::report {

/// Sample quantile by linear interpolation between order statistics
/// (Hyndman-Fan type 7): h = (n - 1) q, x[floor h] + (h - floor h) *
/// (x[floor h + 1] - x[floor h]). NaN for an empty sample.
double quantile_type7(std::vector<double> values, double q);

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
  bool step = false;  // draw as a right-continuous step function
};

struct ChartOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  /// Horizontal reference lines drawn at +v and -v; the first is dotted,
  /// later ones dashed.
  std::vector<double> corridors;
  /// Horizontal reference lines drawn dashed in red.
  std::vector<double> marks;
  /// Strip charts: red dashed 10% and 90% quantile ticks per strip.
  bool quantile_lines = false;
  /// Fixed y range; derived from the data when lo >= hi.
  double y_lo = 0;
  double y_hi = 0;
};

std::string line_chart(std::span<const Series> series,
                       const ChartOptions& options);

/// One column of dots per category.
struct Strip {
  std::string category;
  std::vector<double> values;
};

std::string strip_chart(std::span<const Strip> strips,
                        const ChartOptions& options);

}  // namespace stmc::report
