#include "lizard/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lizard/error.hpp"
#include "lizard/textio.hpp"

namespace lizard::svg {

namespace {

std::string num(double v) { return format_fixed(v, 2); }

// Two-tone ramp: -1 -> blue, 0 -> white, +1 -> red.
std::string ramp_color(double v) {
  v = std::clamp(v, -1.0, 1.0);
  const int fade = static_cast<int>(std::lround(255.0 * (1.0 - std::abs(v))));
  std::ostringstream s;
  if (v >= 0.0)
    s << "rgb(255," << fade << ',' << fade << ')';
  else
    s << "rgb(" << fade << ',' << fade << ",255)";
  return s.str();
}

void open_doc(std::ostringstream& out, double width, double height) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
      << "width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\">\n";
}

void heatmap_body(std::ostringstream& out, const CorrelationReport& report,
                  double x0, double y0) {
  const Index m = report.matrix.rows();
  const double cell = 64.0;
  const double label_w = 150.0;

  out << "<g font-family=\"monospace\" font-size=\"11\">\n";
  for (Index j = 0; j < m; ++j)
    out << "<text x=\"" << num(x0 + label_w + (static_cast<double>(j) + 0.5) *
                                                  cell)
        << "\" y=\"" << num(y0 + 12.0)
        << "\" text-anchor=\"middle\" transform=\"rotate(-40 "
        << num(x0 + label_w + (static_cast<double>(j) + 0.5) * cell) << ' '
        << num(y0 + 12.0) << ")\">"
        << report.columns[static_cast<std::size_t>(j)] << "</text>\n";
  for (Index i = 0; i < m; ++i) {
    const double row_y = y0 + 80.0 + static_cast<double>(i) * cell;
    out << "<text x=\"" << num(x0 + label_w - 8.0) << "\" y=\""
        << num(row_y + cell / 2.0 + 4.0) << "\" text-anchor=\"end\">"
        << report.columns[static_cast<std::size_t>(i)] << "</text>\n";
    for (Index j = 0; j < m; ++j) {
      const double x = x0 + label_w + static_cast<double>(j) * cell;
      const double v = report.matrix(i, j);
      out << "<rect class=\"cell\" x=\"" << num(x) << "\" y=\"" << num(row_y)
          << "\" width=\"" << num(cell) << "\" height=\"" << num(cell)
          << "\" fill=\"" << ramp_color(v)
          << "\" stroke=\"#444\" stroke-width=\"0.5\"/>\n";
      out << "<text x=\"" << num(x + cell / 2.0) << "\" y=\""
          << num(row_y + cell / 2.0 + 4.0) << "\" text-anchor=\"middle\">"
          << format_fixed(v, 2) << "</text>\n";
    }
  }
  out << "</g>\n";
}

double heatmap_height(const CorrelationReport& report) {
  return 80.0 + 64.0 * static_cast<double>(report.matrix.rows()) + 20.0;
}

void bars_body(std::ostringstream& out, const CorrelationReport& report,
               double x0, double y0) {
  const double label_w = 150.0;
  const double half_w = 220.0;
  const double bar_h = 26.0;
  const double gap = 8.0;
  const double axis_x = x0 + label_w + half_w;

  out << "<g font-family=\"monospace\" font-size=\"11\">\n";
  out << "<text x=\"" << num(x0) << "\" y=\"" << num(y0 + 14.0)
      << "\" font-size=\"13\">spearman correlation with energy_efficiency"
      << "</text>\n";
  const double top = y0 + 30.0;
  const auto n = static_cast<double>(report.target_ranking.size());
  out << "<line x1=\"" << num(axis_x) << "\" y1=\"" << num(top) << "\" x2=\""
      << num(axis_x) << "\" y2=\""
      << num(top + n * (bar_h + gap)) << "\" stroke=\"#444\"/>\n";
  for (std::size_t k = 0; k < report.target_ranking.size(); ++k) {
    const auto& [name, rho] = report.target_ranking[k];
    const double y = top + static_cast<double>(k) * (bar_h + gap);
    const double w = std::abs(rho) * half_w;
    const double x = rho >= 0.0 ? axis_x : axis_x - w;
    out << "<rect class=\"bar\" x=\"" << num(x) << "\" y=\"" << num(y)
        << "\" width=\"" << num(w) << "\" height=\"" << num(bar_h)
        << "\" fill=\"" << ramp_color(rho) << "\" stroke=\"#444\"/>\n";
    out << "<text x=\"" << num(x0 + label_w - 8.0) << "\" y=\""
        << num(y + bar_h / 2.0 + 4.0) << "\" text-anchor=\"end\">" << name
        << "</text>\n";
    out << "<text x=\"" << num(axis_x + (rho >= 0.0 ? w + 6.0 : -w - 6.0))
        << "\" y=\"" << num(y + bar_h / 2.0 + 4.0) << "\" text-anchor=\""
        << (rho >= 0.0 ? "start" : "end") << "\">" << format_fixed(rho, 6)
        << "</text>\n";
  }
  out << "</g>\n";
}

double bars_height(const CorrelationReport& report) {
  return 30.0 + static_cast<double>(report.target_ranking.size()) * 34.0 +
         20.0;
}

}  // namespace

std::string heatmap(const CorrelationReport& report) {
  std::ostringstream out;
  const double width =
      150.0 + 64.0 * static_cast<double>(report.matrix.rows()) + 40.0;
  open_doc(out, width, heatmap_height(report));
  heatmap_body(out, report, 10.0, 10.0);
  out << "</svg>\n";
  return out.str();
}

std::string ranking_bars(const CorrelationReport& report) {
  std::ostringstream out;
  open_doc(out, 640.0, bars_height(report) + 20.0);
  bars_body(out, report, 10.0, 10.0);
  out << "</svg>\n";
  return out.str();
}

std::string correlation_charts(const CorrelationReport& report) {
  std::ostringstream out;
  const double hm_h = heatmap_height(report);
  const double width = std::max(
      150.0 + 64.0 * static_cast<double>(report.matrix.rows()) + 40.0, 660.0);
  open_doc(out, width, hm_h + bars_height(report) + 30.0);
  heatmap_body(out, report, 10.0, 10.0);
  bars_body(out, report, 10.0, hm_h + 10.0);
  out << "</svg>\n";
  return out.str();
}

std::string prediction_lines(Eigen::Ref<const Vec> actual,
                             Eigen::Ref<const Vec> predicted) {
  if (actual.size() != predicted.size() || actual.size() < 1)
    throw ArgumentError("prediction chart: series length mismatch");

  const double width = 860.0, height = 420.0;
  const double left = 60.0, right = 20.0, top = 40.0, bottom = 40.0;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  double lo = std::min(actual.minCoeff(), predicted.minCoeff());
  double hi = std::max(actual.maxCoeff(), predicted.maxCoeff());
  if (hi <= lo) hi = lo + 1.0;
  const Index n = actual.size();

  auto x_of = [&](Index i) {
    return n == 1 ? left + plot_w / 2.0
                  : left + plot_w * static_cast<double>(i) /
                               static_cast<double>(n - 1);
  };
  auto y_of = [&](double v) {
    return top + plot_h * (1.0 - (v - lo) / (hi - lo));
  };
  auto polyline = [&](Eigen::Ref<const Vec> series, const char* color) {
    std::ostringstream pts;
    for (Index i = 0; i < n; ++i)
      pts << num(x_of(i)) << ',' << num(y_of(series[i])) << ' ';
    return "<polyline class=\"data\" fill=\"none\" stroke=\"" +
           std::string(color) + "\" stroke-width=\"1.5\" points=\"" +
           pts.str() + "\"/>\n";
  };

  std::ostringstream out;
  open_doc(out, width, height);
  out << "<g font-family=\"monospace\" font-size=\"11\">\n";
  // axes
  out << "<line x1=\"" << num(left) << "\" y1=\"" << num(top) << "\" x2=\""
      << num(left) << "\" y2=\"" << num(top + plot_h)
      << "\" stroke=\"#000\"/>\n";
  out << "<line x1=\"" << num(left) << "\" y1=\"" << num(top + plot_h)
      << "\" x2=\"" << num(left + plot_w) << "\" y2=\"" << num(top + plot_h)
      << "\" stroke=\"#000\"/>\n";
  out << "<text x=\"" << num(left - 6.0) << "\" y=\"" << num(top + 4.0)
      << "\" text-anchor=\"end\">" << format_fixed(hi, 3) << "</text>\n";
  out << "<text x=\"" << num(left - 6.0) << "\" y=\"" << num(top + plot_h)
      << "\" text-anchor=\"end\">" << format_fixed(lo, 3) << "</text>\n";
  out << "<text x=\"" << num(left) << "\" y=\"" << num(height - 8.0)
      << "\">0</text>\n";
  out << "<text x=\"" << num(left + plot_w) << "\" y=\"" << num(height - 8.0)
      << "\" text-anchor=\"end\">" << (n - 1) << "</text>\n";
  out << "<text x=\"" << num(width / 2.0) << "\" y=\"" << num(height - 8.0)
      << "\" text-anchor=\"middle\">sample index</text>\n";
  // legend
  out << "<rect x=\"" << num(left + 10.0) << "\" y=\"" << num(top - 26.0)
      << "\" width=\"12\" height=\"12\" fill=\"#1f77b4\"/>\n";
  out << "<text x=\"" << num(left + 28.0) << "\" y=\"" << num(top - 16.0)
      << "\">actual</text>\n";
  out << "<rect x=\"" << num(left + 100.0) << "\" y=\"" << num(top - 26.0)
      << "\" width=\"12\" height=\"12\" fill=\"#d62728\"/>\n";
  out << "<text x=\"" << num(left + 118.0) << "\" y=\"" << num(top - 16.0)
      << "\">predicted</text>\n";
  out << "</g>\n";
  out << polyline(actual, "#1f77b4");
  out << polyline(predicted, "#d62728");
  out << "</svg>\n";
  return out.str();
}

}  // namespace lizard::svg
