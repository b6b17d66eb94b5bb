#include "stmc/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "stmc/csv.hpp"

namespace stmc::report {

double quantile_type7(std::vector<double> values, double q) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - std::floor(h)) * (values[hi] - values[lo]);
}

namespace {

constexpr double kWidth = 720, kHeight = 440;
constexpr double kLeft = 70, kRight = 160, kTop = 40, kBottom = 50;
const char* const kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                "#bcbd22", "#17becf"};

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Frame {
  double x_lo, x_hi, y_lo, y_hi;

  double px(double x) const {
    return kLeft + (x - x_lo) / (x_hi - x_lo) * (kWidth - kLeft - kRight);
  }
  double py(double y) const {
    return kHeight - kBottom -
           (y - y_lo) / (y_hi - y_lo) * (kHeight - kTop - kBottom);
  }
};

void widen(double& lo, double& hi) {
  if (!(lo < hi)) {
    lo -= 0.5;
    hi += 0.5;
  }
}

void header(std::ostringstream& o, const ChartOptions& opt, const Frame& f,
            bool numeric_x) {
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
    << "\" height=\"" << kHeight << "\" font-family=\"sans-serif\" "
    << "font-size=\"11\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << kWidth / 2 - kRight / 2 << "\" y=\"22\" "
    << "text-anchor=\"middle\" font-size=\"14\">" << escape(opt.title)
    << "</text>\n";
  const double x0 = f.px(f.x_lo), x1 = f.px(f.x_hi);
  const double y0 = f.py(f.y_lo), y1 = f.py(f.y_hi);
  o << "<rect x=\"" << num(x0) << "\" y=\"" << num(y1) << "\" width=\""
    << num(x1 - x0) << "\" height=\"" << num(y0 - y1)
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    double y = f.y_lo + (f.y_hi - f.y_lo) * i / 4;
    o << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(f.py(y) + 4)
      << "\" text-anchor=\"end\">" << tick(y) << "</text>\n";
    if (numeric_x) {
      double x = f.x_lo + (f.x_hi - f.x_lo) * i / 4;
      o << "<text x=\"" << num(f.px(x)) << "\" y=\"" << num(y0 + 16)
        << "\" text-anchor=\"middle\">" << tick(x) << "</text>\n";
    }
  }
  o << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(kHeight - 10)
    << "\" text-anchor=\"middle\">" << escape(opt.x_label) << "</text>\n"
    << "<text transform=\"translate(16," << num((y0 + y1) / 2)
    << ") rotate(-90)\" text-anchor=\"middle\">" << escape(opt.y_label)
    << "</text>\n";
  auto hline = [&](double y, const char* style) {
    if (y < f.y_lo || y > f.y_hi) return;
    o << "<line x1=\"" << num(x0) << "\" x2=\"" << num(x1) << "\" y1=\""
      << num(f.py(y)) << "\" y2=\"" << num(f.py(y)) << "\" " << style
      << "/>\n";
  };
  for (std::size_t i = 0; i < opt.corridors.size(); ++i) {
    const char* style = i == 0
                            ? "stroke=\"gray\" stroke-dasharray=\"2,3\""
                            : "stroke=\"gray\" stroke-dasharray=\"8,4\"";
    hline(opt.corridors[i], style);
    hline(-opt.corridors[i], style);
  }
  for (double m : opt.marks)
    hline(m, "stroke=\"red\" stroke-dasharray=\"8,4\"");
}

void legend(std::ostringstream& o, std::size_t i, const std::string& label) {
  const double x = kWidth - kRight + 12, y = kTop + 14.0 * i + 6;
  o << "<rect x=\"" << num(x) << "\" y=\"" << num(y - 8) << "\" width=\"10\" "
    << "height=\"10\" fill=\"" << kPalette[i % std::size(kPalette)]
    << "\"/>\n<text x=\"" << num(x + 14) << "\" y=\"" << num(y)
    << "\">" << escape(label) << "</text>\n";
}

void y_range(const ChartOptions& opt, double& lo, double& hi) {
  if (opt.y_lo < opt.y_hi) {
    lo = opt.y_lo;
    hi = opt.y_hi;
    return;
  }
  for (double c : opt.corridors) {
    lo = std::min(lo, -c);
    hi = std::max(hi, c);
  }
  for (double m : opt.marks) {
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  widen(lo, hi);
}

}  // namespace

std::string line_chart(std::span<const Series> series,
                       const ChartOptions& options) {
  double xl = std::numeric_limits<double>::infinity(), xh = -xl;
  double yl = xl, yh = -xl;
  for (const auto& s : series)
    for (auto [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      xl = std::min(xl, x);
      xh = std::max(xh, x);
      yl = std::min(yl, y);
      yh = std::max(yh, y);
    }
  if (!std::isfinite(xl)) xl = xh = yl = yh = 0;
  widen(xl, xh);
  y_range(options, yl, yh);
  Frame f{xl, xh, yl, yh};
  std::ostringstream o;
  header(o, options, f, true);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* colour = kPalette[i % std::size(kPalette)];
    std::string pts;
    double prev_y = 0;
    bool first = true;
    for (auto [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (s.step && !first)
        pts += num(f.px(x)) + "," + num(f.py(prev_y)) + " ";
      pts += num(f.px(x)) + "," + num(f.py(y)) + " ";
      prev_y = y;
      first = false;
    }
    if (!pts.empty()) {
      pts.pop_back();
      o << "<polyline fill=\"none\" stroke=\"" << colour
        << "\" stroke-width=\"1.5\" points=\"" << pts << "\"/>\n";
    }
    for (auto [x, y] : s.points) {
      if (s.step || !std::isfinite(x) || !std::isfinite(y)) continue;
      o << "<circle cx=\"" << num(f.px(x)) << "\" cy=\"" << num(f.py(y))
        << "\" r=\"2.5\" fill=\"" << colour << "\"/>\n";
    }
    legend(o, i, s.label);
  }
  o << "</svg>\n";
  return o.str();
}

std::string strip_chart(std::span<const Strip> strips,
                        const ChartOptions& options) {
  double yl = std::numeric_limits<double>::infinity(), yh = -yl;
  for (const auto& s : strips)
    for (double v : s.values) {
      if (!std::isfinite(v)) continue;
      yl = std::min(yl, v);
      yh = std::max(yh, v);
    }
  if (!std::isfinite(yl)) yl = yh = 0;
  y_range(options, yl, yh);
  Frame f{-0.5, static_cast<double>(strips.size()) - 0.5, yl, yh};
  if (strips.empty()) f.x_hi = 0.5;
  std::ostringstream o;
  header(o, options, f, false);
  for (std::size_t i = 0; i < strips.size(); ++i) {
    const double cx = f.px(static_cast<double>(i));
    o << "<text x=\"" << num(cx) << "\" y=\"" << num(f.py(yl) + 16)
      << "\" text-anchor=\"middle\">" << escape(strips[i].category)
      << "</text>\n";
    const char* colour = kPalette[i % std::size(kPalette)];
    std::size_t j = 0;
    for (double v : strips[i].values) {
      if (!std::isfinite(v)) continue;
      // Deterministic horizontal jitter.
      double dx = static_cast<double>(j++ % 7) * 3 - 9;
      o << "<circle cx=\"" << num(cx + dx) << "\" cy=\"" << num(f.py(v))
        << "\" r=\"2\" fill=\"" << colour << "\" fill-opacity=\"0.6\"/>\n";
    }
    auto q = [&](double p) { return quantile_type7(strips[i].values, p); };
    if (options.quantile_lines && !strips[i].values.empty())
      for (double p : {0.1, 0.9}) {
        double y = f.py(q(p));
        o << "<line x1=\"" << num(cx - 18) << "\" x2=\"" << num(cx + 18)
          << "\" y1=\"" << num(y) << "\" y2=\"" << num(y)
          << "\" stroke=\"red\" stroke-dasharray=\"4,3\"/>\n";
      }
    if (!strips[i].values.empty()) {
      double med = q(0.5);
      o << "<line x1=\"" << num(cx - 14) << "\" x2=\"" << num(cx + 14)
        << "\" y1=\"" << num(f.py(med)) << "\" y2=\"" << num(f.py(med))
        << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    }
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace stmc::report
