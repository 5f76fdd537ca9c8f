#pragma once

// Minimal static SVG charts for the export-plots command.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <fmt/format.h>

namespace plugwatt::svg {

struct BoxStats {
  std::string label;
  double min, q1, median, q3, max;
};

struct Series {
  std::string name;
  std::vector<double> y;
  std::string colour;
};

namespace detail {

constexpr double kWidth = 720, kHeight = 420;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;

inline std::string escape(const std::string& s) {
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

// Maps data coordinates onto the plotting area.
struct Frame {
  double x0, x1, y0, y1;

  double px(double x) const {
    return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight);
  }
  double py(double y) const {
    return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom);
  }
};

inline std::pair<double, double> padded(double lo, double hi) {
  if (!(hi > lo)) {
    lo -= 1;
    hi += 1;
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

inline double nice_step(double span) {
  const double raw = span / 6;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0})
    if (raw <= m * mag) return m * mag;
  return 10 * mag;
}

inline std::string open(const std::string& title) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{2}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{3}</text>\n",
      kWidth, kHeight, kWidth / 2, escape(title));
}

inline std::string y_axis(const Frame& f, const std::string& label) {
  std::string out = fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n", kLeft,
                                kTop, kHeight - kBottom);
  const double step = nice_step(f.y1 - f.y0);
  for (double v = std::ceil(f.y0 / step) * step; v <= f.y1; v += step) {
    const double y = f.py(v);
    out += fmt::format(
        "<line x1=\"{0}\" y1=\"{1:.1f}\" x2=\"{2}\" y2=\"{1:.1f}\" stroke=\"#ddd\"/>"
        "<text x=\"{3}\" y=\"{4:.1f}\" text-anchor=\"end\">{5:g}</text>\n",
        kLeft, y, kWidth - kRight, kLeft - 6, y + 4, std::fabs(v) < step * 1e-9 ? 0.0 : v);
  }
  out += fmt::format("<text transform=\"translate(18,{0}) rotate(-90)\" text-anchor=\"middle\">{1}</text>\n",
                     (kTop + kHeight - kBottom) / 2, escape(label));
  return out;
}

inline std::string x_axis(const Frame& f, const std::string& label, bool ticks) {
  std::string out = fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n", kLeft,
                                kHeight - kBottom, kWidth - kRight);
  if (ticks) {
    const double step = nice_step(f.x1 - f.x0);
    for (double v = std::ceil(f.x0 / step) * step; v <= f.x1; v += step)
      out += fmt::format("<text x=\"{0:.1f}\" y=\"{1}\" text-anchor=\"middle\">{2:g}</text>\n", f.px(v),
                         kHeight - kBottom + 16, v);
  }
  out += fmt::format("<text x=\"{0}\" y=\"{1}\" text-anchor=\"middle\">{2}</text>\n", (kLeft + kWidth - kRight) / 2,
                     kHeight - 18, escape(label));
  return out;
}

inline std::string polyline(const Frame& f, const std::vector<double>& xs, const std::vector<double>& ys,
                            const std::string& colour) {
  std::string pts;
  for (std::size_t i = 0; i < xs.size() && i < ys.size(); ++i)
    if (std::isfinite(ys[i])) pts += fmt::format("{:.1f},{:.1f} ", f.px(xs[i]), f.py(ys[i]));
  return fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", colour, pts);
}

}  // namespace detail

/// One box per group: whiskers at min and max, box from q1 to q3.
inline std::string box_plot(const std::string& title, const std::string& y_label,
                            const std::vector<BoxStats>& boxes) {
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& b : boxes) {
    lo = std::min(lo, b.min);
    hi = std::max(hi, b.max);
  }
  if (boxes.empty()) lo = 0, hi = 1;
  auto [y0, y1] = detail::padded(lo, hi);
  const detail::Frame f{0, static_cast<double>(std::max<std::size_t>(boxes.size(), 1)), y0, y1};
  std::string out = detail::open(title) + detail::y_axis(f, y_label) + detail::x_axis(f, "phase", false);
  const double w = 0.4 * (f.px(1) - f.px(0));
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto& b = boxes[i];
    const double cx = f.px(static_cast<double>(i) + 0.5);
    out += fmt::format(
        "<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{0:.1f}\" y2=\"{2:.1f}\" stroke=\"black\"/>\n"
        "<rect x=\"{3:.1f}\" y=\"{4:.1f}\" width=\"{5:.1f}\" height=\"{6:.1f}\" fill=\"#9ecae1\" stroke=\"black\"/>\n"
        "<line x1=\"{3:.1f}\" y1=\"{7:.1f}\" x2=\"{8:.1f}\" y2=\"{7:.1f}\" stroke=\"black\" stroke-width=\"2\"/>\n"
        "<text x=\"{0:.1f}\" y=\"{9}\" text-anchor=\"middle\">{10}</text>\n",
        cx, f.py(b.min), f.py(b.max), cx - w / 2, f.py(b.q3), w, f.py(b.q1) - f.py(b.q3), f.py(b.median),
        cx + w / 2, detail::kHeight - detail::kBottom + 16, detail::escape(b.label));
  }
  return out + "</svg>\n";
}

/// Lines over a shared x axis, with an optional shaded band behind them.
inline std::string line_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                             const std::vector<double>& xs, const std::vector<Series>& series,
                             const std::vector<double>& band_lo = {}, const std::vector<double>& band_hi = {}) {
  double lo = INFINITY, hi = -INFINITY;
  auto extend = [&](const std::vector<double>& v) {
    for (double y : v)
      if (std::isfinite(y)) lo = std::min(lo, y), hi = std::max(hi, y);
  };
  for (const auto& s : series) extend(s.y);
  extend(band_lo);
  extend(band_hi);
  if (!std::isfinite(lo)) lo = 0, hi = 1;
  auto [y0, y1] = detail::padded(lo, hi);
  const double x0 = xs.empty() ? 0 : xs.front(), x1 = xs.empty() || xs.back() == x0 ? x0 + 1 : xs.back();
  const detail::Frame f{x0, x1, y0, y1};
  std::string out = detail::open(title) + detail::y_axis(f, y_label) + detail::x_axis(f, x_label, true);

  if (!band_lo.empty() && band_lo.size() == xs.size() && band_hi.size() == xs.size()) {
    std::string pts;
    for (std::size_t i = 0; i < xs.size(); ++i) pts += fmt::format("{:.1f},{:.1f} ", f.px(xs[i]), f.py(band_hi[i]));
    for (std::size_t i = xs.size(); i-- > 0;) pts += fmt::format("{:.1f},{:.1f} ", f.px(xs[i]), f.py(band_lo[i]));
    out += fmt::format("<polygon fill=\"#c6dbef\" fill-opacity=\"0.7\" stroke=\"none\" points=\"{}\"/>\n", pts);
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    out += detail::polyline(f, xs, series[s].y, series[s].colour);
    const double ly = detail::kTop + 14 * static_cast<double>(s);
    out += fmt::format(
        "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"/>"
        "<text x=\"{4}\" y=\"{5}\">{6}</text>\n",
        detail::kWidth - 170, ly, detail::kWidth - 150, series[s].colour, detail::kWidth - 144, ly + 4,
        detail::escape(series[s].name));
  }
  return out + "</svg>\n";
}

}  // namespace plugwatt::svg
