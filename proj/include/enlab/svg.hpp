#pragma once

#include <string>
#include <vector>

namespace enlab {

struct SvgSeries {
  std::string label;
  std::vector<double> xs;
  std::vector<double> ys;
};

struct SvgOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;  // non-positive values are dropped
};

// Static line chart; output is deterministic for identical inputs.
std::string render_svg_chart(const std::vector<SvgSeries>& series, const SvgOptions& options);
void write_svg_chart(const std::string& path, const std::vector<SvgSeries>& series,
                     const SvgOptions& options);

}  // namespace enlab
