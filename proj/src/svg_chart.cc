#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "lowsnr/analysis.h"

namespace lowsnr {
namespace {

constexpr std::array<const char*, 6> kColors = {"#1f77b4", "#d62728", "#2ca02c",
                                                "#ff7f0e", "#9467bd", "#8c564b"};
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;

std::string escape(const std::string& s) {
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

struct Axis {
  bool log = false;
  double lo = 0.0, hi = 1.0;  // in transformed units

  double transform(double v) const { return log ? std::log10(v) : v; }
  bool drawable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }

  void fit(double min_t, double max_t) {
    if (!(min_t <= max_t)) {
      min_t = 0.0;
      max_t = 1.0;
    }
    if (log) {
      lo = std::floor(min_t);
      hi = std::max(std::ceil(max_t), lo + 1.0);
    } else {
      const double pad = max_t > min_t ? 0.05 * (max_t - min_t) : std::max(1.0, std::abs(min_t));
      lo = min_t - pad;
      hi = max_t + pad;
    }
  }

  std::vector<double> ticks() const {
    std::vector<double> t;
    if (log) {
      const double step = std::max(1.0, std::ceil((hi - lo) / 8.0));
      for (double e = lo; e <= hi + 1e-9; e += step) t.push_back(e);
    } else {
      for (int i = 0; i <= 5; ++i) t.push_back(lo + (hi - lo) * i / 5.0);
    }
    return t;
  }

  std::string label(double t) const {
    std::ostringstream s;
    if (log) {
      s << "1e" << static_cast<int>(std::lround(t));
    } else {
      s.precision(3);
      s << t;
    }
    return s.str();
  }
};

}  // namespace

std::string line_chart_svg(std::span<const Series> series, const ChartOptions& options) {
  Axis ax{options.log_x}, ay{options.log_y};
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const Series& s : series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!ax.drawable(s.x[i]) || !ay.drawable(s.y[i])) continue;
      x0 = std::min(x0, ax.transform(s.x[i]));
      x1 = std::max(x1, ax.transform(s.x[i]));
      y0 = std::min(y0, ay.transform(s.y[i]));
      y1 = std::max(y1, ay.transform(s.y[i]));
    }
  }
  ax.fit(x0, x1);
  ay.fit(y0, y1);

  const double W = options.width, H = options.height;
  const double pw = W - kLeft - kRight, ph = H - kTop - kBottom;
  auto px = [&](double t) { return kLeft + pw * (t - ax.lo) / (ax.hi - ax.lo); };
  auto py = [&](double t) { return kTop + ph * (1.0 - (t - ay.lo) / (ay.hi - ay.lo)); };

  std::ostringstream o;
  o.precision(6);
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"" << kTop / 2 + 4
    << "\" text-anchor=\"middle\" font-size=\"14\">" << escape(options.title) << "</text>\n";

  for (double t : ax.ticks()) {
    o << "<line x1=\"" << px(t) << "\" y1=\"" << kTop << "\" x2=\"" << px(t) << "\" y2=\""
      << kTop + ph << "\" stroke=\"#ddd\"/>\n";
    o << "<text x=\"" << px(t) << "\" y=\"" << kTop + ph + 16 << "\" text-anchor=\"middle\">"
      << ax.label(t) << "</text>\n";
  }
  for (double t : ay.ticks()) {
    o << "<line x1=\"" << kLeft << "\" y1=\"" << py(t) << "\" x2=\"" << kLeft + pw << "\" y2=\""
      << py(t) << "\" stroke=\"#ddd\"/>\n";
    o << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(t) + 4 << "\" text-anchor=\"end\">"
      << ay.label(t) << "</text>\n";
  }
  o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">"
    << escape(options.x_label) << "</text>\n";
  o << "<text transform=\"translate(16," << kTop + ph / 2
    << ") rotate(-90)\" text-anchor=\"middle\">" << escape(options.y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    const char* color = kColors[k % kColors.size()];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!ax.drawable(s.x[i]) || !ay.drawable(s.y[i])) continue;
      o << px(ax.transform(s.x[i])) << ',' << py(ay.transform(s.y[i])) << ' ';
    }
    o << "\"/>\n";
    const double ly = kTop + 16 + 16 * static_cast<double>(k);
    o << "<line x1=\"" << kLeft + pw - 150 << "\" y1=\"" << ly - 4 << "\" x2=\"" << kLeft + pw - 130
      << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << kLeft + pw - 125 << "\" y=\"" << ly << "\">" << escape(s.name)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string gap_chart_svg(std::span<const std::vector<TraceRow>> traces,
                          std::span<const std::string> names) {
  std::vector<Series> series;
  for (std::size_t k = 0; k < traces.size(); ++k) {
    Series s;
    s.name = k < names.size() ? names[k] : "run " + std::to_string(k + 1);
    for (const TraceRow& r : traces[k]) {
      s.x.push_back(r.iter);
      s.y.push_back(r.gap);
    }
    series.push_back(std::move(s));
  }
  ChartOptions opt;
  opt.title = "Relative duality gap";
  opt.x_label = "iteration";
  opt.y_label = "gap";
  opt.log_y = true;
  return line_chart_svg(series, opt);
}

std::string error_chart_svg(const ApproximationReport& report) {
  Series s;
  s.name = "1 - ln(1+x)/x";
  for (const ApproximationRow& r : report.rows) {
    s.x.push_back(r.snr_per_dof);
    s.y.push_back(r.relative_error);
  }
  Series threshold;
  threshold.name = "regime threshold";
  threshold.x = {report.regime_threshold, report.regime_threshold};
  if (!s.y.empty()) {
    const auto [lo, hi] = std::minmax_element(s.y.begin(), s.y.end());
    threshold.y = {std::max(*lo, 1e-300), *hi};
  }
  ChartOptions opt;
  opt.title = "Error of the linear capacity model";
  opt.x_label = "SNR per degree of freedom";
  opt.y_label = "relative error";
  opt.log_x = true;
  opt.log_y = true;
  const std::array<Series, 2> both = {s, threshold};
  return line_chart_svg(both, opt);
}

}  // namespace lowsnr
