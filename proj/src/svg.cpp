#include "enlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "enlab/common.hpp"

namespace enlab {

namespace {

constexpr double kWidth = 800, kHeight = 500;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

std::string render_svg_chart(const std::vector<SvgSeries>& series, const SvgOptions& options) {
  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  auto tx = [&](double v) { return options.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return options.log_y ? std::log10(v) : v; };
  for (const auto& s : series) {
    for (size_t i = 0; i < s.xs.size(); ++i) {
      if (options.log_x && !(s.xs[i] > 0.0)) continue;
      if (options.log_y && !(s.ys[i] > 0.0)) continue;
      if (!std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i])) continue;
      x_min = std::min(x_min, tx(s.xs[i]));
      x_max = std::max(x_max, tx(s.xs[i]));
      y_min = std::min(y_min, ty(s.ys[i]));
      y_max = std::max(y_max, ty(s.ys[i]));
    }
  }
  if (!(x_max > x_min)) x_max = x_min + 1.0;
  if (!(y_max > y_min)) {
    y_min -= 0.5;
    y_max += 0.5;
  }
  const double pad = 0.03 * (y_max - y_min);
  y_min -= pad;
  y_max += pad;

  auto px = [&](double v) {
    return kLeft + (tx(v) - x_min) / (x_max - x_min) * (kWidth - kLeft - kRight);
  };
  auto py = [&](double v) {
    return kHeight - kBottom - (ty(v) - y_min) / (y_max - y_min) * (kHeight - kTop - kBottom);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\" "
         "font-family=\"sans-serif\">"
      << options.title << "</text>\n";

  // Axes with 5 ticks per side.
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\""
      << kWidth - kRight << "\" y2=\"" << kHeight - kBottom
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kHeight - kBottom << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x_min + (x_max - x_min) * i / 4.0;
    const double fy = y_min + (y_max - y_min) * i / 4.0;
    const double cx = kLeft + (kWidth - kLeft - kRight) * i / 4.0;
    const double cy = kHeight - kBottom - (kHeight - kTop - kBottom) * i / 4.0;
    const double label_x = options.log_x ? std::pow(10.0, fx) : fx;
    const double label_y = options.log_y ? std::pow(10.0, fy) : fy;
    svg << "<line x1=\"" << cx << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << cx
        << "\" y2=\"" << kHeight - kBottom + 4 << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << cx << "\" y=\"" << kHeight - kBottom + 18
        << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">"
        << num(label_x) << "</text>\n";
    svg << "<line x1=\"" << kLeft - 4 << "\" y1=\"" << cy << "\" x2=\"" << kLeft << "\" y2=\""
        << cy << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << kLeft - 8 << "\" y=\"" << cy + 4
        << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" << num(label_y)
        << "</text>\n";
  }
  svg << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">"
      << options.x_label << (options.log_x ? " (log)" : "") << "</text>\n";
  svg << "<text x=\"18\" y=\"" << (kTop + kHeight - kBottom) / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" "
         "transform=\"rotate(-90 18 "
      << (kTop + kHeight - kBottom) / 2 << ")\">" << options.y_label
      << (options.log_y ? " (log)" : "") << "</text>\n";

  int color = 0;
  double legend_y = kTop + 8;
  for (const auto& s : series) {
    const char* stroke = kPalette[color % 8];
    std::ostringstream pts;
    bool open = false;
    for (size_t i = 0; i < s.xs.size(); ++i) {
      if ((options.log_x && !(s.xs[i] > 0.0)) || (options.log_y && !(s.ys[i] > 0.0)) ||
          !std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i])) {
        if (open) {
          svg << "<polyline fill=\"none\" stroke=\"" << stroke
              << "\" stroke-width=\"1.5\" points=\"" << pts.str() << "\"/>\n";
          pts.str("");
          open = false;
        }
        continue;
      }
      pts << num(px(s.xs[i])) << "," << num(py(s.ys[i])) << " ";
      open = true;
    }
    if (open)
      svg << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" points=\""
          << pts.str() << "\"/>\n";
    svg << "<rect x=\"" << kWidth - kRight - 150 << "\" y=\"" << legend_y - 9
        << "\" width=\"12\" height=\"4\" fill=\"" << stroke << "\"/>\n"
        << "<text x=\"" << kWidth - kRight - 132 << "\" y=\"" << legend_y
        << "\" font-size=\"12\" font-family=\"sans-serif\">" << s.label << "</text>\n";
    legend_y += 16;
    ++color;
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_svg_chart(const std::string& path, const std::vector<SvgSeries>& series,
                     const SvgOptions& options) {
  std::ofstream out(path);
  if (!out) throw parameter_error("cannot write SVG file " + path);
  out << render_svg_chart(series, options);
}

}  // namespace enlab
