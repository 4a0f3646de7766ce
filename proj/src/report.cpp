#include "drivelab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>

namespace drivelab {

namespace {

constexpr int kW = 640, kH = 480;
constexpr int kMarginL = 70, kMarginR = 25, kMarginT = 40, kMarginB = 55;

const char* kSeriesColors[] = {"#3a6ea5", "#c0392b", "#27825c", "#b8860b",
                               "#6a4fa3", "#777777", "#d06090"};

struct Axis {
  double lo, hi;
  bool log;

  double to_px(double v, double px0, double px1) const {
    const double t = log ? (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo))
                         : (v - lo) / (hi - lo);
    return px0 + t * (px1 - px0);
  }
};

void fmt(std::string& out, const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  out += buf;
}

void axis_ticks_log(std::string& out, const Axis& ax, bool horizontal) {
  const int e0 = static_cast<int>(std::floor(std::log10(ax.lo)));
  const int e1 = static_cast<int>(std::ceil(std::log10(ax.hi)));
  for (int e = e0; e <= e1; ++e) {
    for (int m : {1, 2, 5}) {
      const double v = m * std::pow(10.0, e);
      if (v < ax.lo * 0.999 || v > ax.hi * 1.001) continue;
      if (horizontal) {
        const double x = ax.to_px(v, kMarginL, kW - kMarginR);
        fmt(out, "<line x1=\"%.1f\" y1=\"%d\" x2=\"%.1f\" y2=\"%d\" stroke=\"#cccccc\"/>\n", x,
            kMarginT, x, kH - kMarginB);
        fmt(out,
            "<text x=\"%.1f\" y=\"%d\" font-size=\"10\" text-anchor=\"middle\">%g</text>\n", x,
            kH - kMarginB + 14, v);
      } else {
        const double y = kH - kMarginB - (ax.to_px(v, 0, kH - kMarginB - kMarginT));
        fmt(out, "<line x1=\"%d\" y1=\"%.1f\" x2=\"%d\" y2=\"%.1f\" stroke=\"#cccccc\"/>\n",
            kMarginL, y, kW - kMarginR, y);
        fmt(out, "<text x=\"%d\" y=\"%.1f\" font-size=\"10\" text-anchor=\"end\">%g</text>\n",
            kMarginL - 4, y + 3, v);
      }
    }
  }
}

std::string svg_header(const std::string& title, const std::string& x_label,
                       const std::string& y_label) {
  std::string out;
  fmt(out, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\">\n", kW, kH);
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  fmt(out, "<text x=\"%d\" y=\"22\" font-size=\"14\" text-anchor=\"middle\">%s</text>\n", kW / 2,
      title.c_str());
  fmt(out, "<text x=\"%d\" y=\"%d\" font-size=\"12\" text-anchor=\"middle\">%s</text>\n", kW / 2,
      kH - 12, x_label.c_str());
  fmt(out,
      "<text x=\"16\" y=\"%d\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      "%d)\">%s</text>\n",
      kH / 2, kH / 2, y_label.c_str());
  return out;
}

void frame_rect(std::string& out) {
  fmt(out,
      "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"none\" stroke=\"#333333\"/>\n",
      kMarginL, kMarginT, kW - kMarginL - kMarginR, kH - kMarginT - kMarginB);
}

Axis make_axis(std::vector<double> values, bool log) {
  double lo = 1e300, hi = -1e300;
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (log) {
    lo = std::pow(10.0, std::floor(std::log10(lo * 0.95)));
    hi = std::pow(10.0, std::ceil(std::log10(hi * 1.05)));
    if (hi <= lo) hi = lo * 10.0;
  } else {
    const double pad = std::max(1e-6, (hi - lo) * 0.08);
    lo -= pad;
    hi += pad;
  }
  return {lo, hi, log};
}

}  // namespace

std::string svg_loglog_plot(const PlotSeries& series, double fit_a, double fit_b, double fit_r,
                            bool with_fit, const std::string& title, const std::string& x_label,
                            const std::string& y_label) {
  std::string out = svg_header(title, x_label, y_label);
  Axis xa = make_axis(series.x, true);
  Axis ya = make_axis(series.y, true);
  axis_ticks_log(out, xa, true);
  {
    // Vertical axis shares the tick generator through a small shim.
    const int e0 = static_cast<int>(std::floor(std::log10(ya.lo)));
    const int e1 = static_cast<int>(std::ceil(std::log10(ya.hi)));
    for (int e = e0; e <= e1; ++e) {
      for (int m : {1, 2, 5}) {
        const double v = m * std::pow(10.0, e);
        if (v < ya.lo * 0.999 || v > ya.hi * 1.001) continue;
        const double y = ya.to_px(v, kH - kMarginB, kMarginT);
        fmt(out, "<line x1=\"%d\" y1=\"%.1f\" x2=\"%d\" y2=\"%.1f\" stroke=\"#cccccc\"/>\n",
            kMarginL, y, kW - kMarginR, y);
        fmt(out, "<text x=\"%d\" y=\"%.1f\" font-size=\"10\" text-anchor=\"end\">%g</text>\n",
            kMarginL - 4, y + 3, v);
      }
    }
  }
  frame_rect(out);

  if (with_fit && fit_a > 0.0) {
    std::string pts;
    for (int k = 0; k <= 40; ++k) {
      const double lx = std::log10(xa.lo) + (std::log10(xa.hi) - std::log10(xa.lo)) * k / 40.0;
      const double x = std::pow(10.0, lx);
      const double y = fit_a * std::pow(x, fit_b);
      if (y < ya.lo || y > ya.hi) continue;
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.1f,%.1f ", xa.to_px(x, kMarginL, kW - kMarginR),
                    ya.to_px(y, kH - kMarginB, kMarginT));
      pts += buf;
    }
    fmt(out,
        "<polyline points=\"%s\" fill=\"none\" stroke=\"#c0392b\" stroke-dasharray=\"6,4\"/>\n",
        pts.c_str());
    fmt(out,
        "<text x=\"%d\" y=\"%d\" font-size=\"12\">Y = %.4g * X^%.4g, r = %.4g</text>\n",
        kMarginL + 10, kMarginT + 18, fit_a, fit_b, fit_r);
  }

  for (std::size_t i = 0; i < series.x.size(); ++i) {
    fmt(out, "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"4\" fill=\"#3a6ea5\"/>\n",
        xa.to_px(series.x[i], kMarginL, kW - kMarginR),
        ya.to_px(series.y[i], kH - kMarginB, kMarginT));
  }
  out += "</svg>\n";
  return out;
}

std::string svg_logx_plot(const std::vector<PlotSeries>& series, const std::string& title,
                          const std::string& x_label, const std::string& y_label) {
  std::string out = svg_header(title, x_label, y_label);
  std::vector<double> all_x, all_y;
  for (const PlotSeries& s : series) {
    all_x.insert(all_x.end(), s.x.begin(), s.x.end());
    all_y.insert(all_y.end(), s.y.begin(), s.y.end());
  }
  Axis xa = make_axis(all_x, true);
  Axis ya{0.0, 1.05, false};
  if (!all_y.empty()) {
    const double mx = *std::max_element(all_y.begin(), all_y.end());
    if (mx > 1.0) ya.hi = mx * 1.1;
  }
  axis_ticks_log(out, xa, true);
  for (double v = 0.0; v <= ya.hi; v += 0.2) {
    const double y = ya.to_px(v, kH - kMarginB, kMarginT);
    fmt(out, "<line x1=\"%d\" y1=\"%.1f\" x2=\"%d\" y2=\"%.1f\" stroke=\"#cccccc\"/>\n", kMarginL,
        y, kW - kMarginR, y);
    fmt(out, "<text x=\"%d\" y=\"%.1f\" font-size=\"10\" text-anchor=\"end\">%.1f</text>\n",
        kMarginL - 4, y + 3, v);
  }
  frame_rect(out);

  for (std::size_t si = 0; si < series.size(); ++si) {
    const PlotSeries& s = series[si];
    const char* color = kSeriesColors[si % 7];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.1f,%.1f ", xa.to_px(s.x[i], kMarginL, kW - kMarginR),
                    ya.to_px(s.y[i], kH - kMarginB, kMarginT));
      pts += buf;
    }
    fmt(out, "<polyline points=\"%s\" fill=\"none\" stroke=\"%s\" stroke-width=\"1.6\"/>\n",
        pts.c_str(), color);
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      fmt(out, "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"3\" fill=\"%s\"/>\n",
          xa.to_px(s.x[i], kMarginL, kW - kMarginR), ya.to_px(s.y[i], kH - kMarginB, kMarginT),
          color);
    }
    fmt(out, "<text x=\"%d\" y=\"%d\" font-size=\"11\" fill=\"%s\">%s</text>\n",
        kW - kMarginR - 130, kMarginT + 16 + static_cast<int>(si) * 14, color, s.name.c_str());
  }
  out += "</svg>\n";
  return out;
}

}  // namespace drivelab
