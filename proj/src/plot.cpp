#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <stdexcept>

#include "dynsched/experiments.hpp"

namespace dynsched {
namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 500.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 190.0;  // room for the legend
constexpr double kTop = 30.0;
constexpr double kBottom = 60.0;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fmt(double v, const char* spec = "%.6g") {
  char buf[32];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string xml_escape(const std::string& s) {
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

bool numeric_column(std::string_view c) { return c == "n" || c == "p" || c == "beta"; }

std::string column_text(const SweepRow& r, std::string_view c) {
  if (c == "kernel") return std::string(to_string(r.kernel));
  if (c == "n") return std::to_string(r.n);
  if (c == "p") return std::to_string(r.p);
  if (c == "strategy") return std::string(to_string(r.strategy));
  if (c == "scenario") return r.scenario;
  if (c == "beta") return r.beta ? fmt(*r.beta) : "";
  throw std::invalid_argument("unknown plot column: " + std::string(c));
}

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

struct Range {
  double lo, hi;
};

Range padded(double lo, double hi) {
  double span = hi - lo;
  if (span <= 0.0) span = std::max(std::abs(lo), 1.0) * 0.2;
  return {lo - 0.05 * span, hi + 0.05 * span};
}

}  // namespace

void emit_svg_plot(const SweepTable& table, std::string_view x_column, std::string_view series_column,
                   std::ostream& out) {
  if (table.empty()) throw std::invalid_argument("nothing to plot");
  column_text(table.front(), x_column);
  column_text(table.front(), series_column);

  // Categorical x axes place categories at 0, 1, 2, ... in first-seen order.
  const bool numeric_x = numeric_column(x_column);
  std::vector<std::string> categories;
  auto x_of = [&](const SweepRow& r) -> std::optional<double> {
    const std::string text = column_text(r, x_column);
    if (text.empty()) return std::nullopt;
    if (numeric_x) return std::stod(text);
    auto it = std::find(categories.begin(), categories.end(), text);
    if (it == categories.end()) {
      categories.push_back(text);
      return static_cast<double>(categories.size() - 1);
    }
    return static_cast<double>(it - categories.begin());
  };

  std::vector<Series> series;
  std::map<double, std::pair<double, int>> analysis;  // x -> (sum, count)
  for (const auto& r : table) {
    const auto x = x_of(r);
    if (!x) continue;
    const std::string name = column_text(r, series_column);
    auto it = std::find_if(series.begin(), series.end(), [&](const Series& s) { return s.name == name; });
    if (it == series.end()) {
      series.push_back({name, {}});
      it = std::prev(series.end());
    }
    it->points.emplace_back(*x, r.stats.mean);
    if (r.analysis_pred) {
      auto& slot = analysis[*x];
      slot.first += *r.analysis_pred;
      slot.second += 1;
    }
  }
  if (!analysis.empty()) {
    Series a{"analysis", {}};
    for (const auto& [x, acc] : analysis) a.points.emplace_back(x, acc.first / acc.second);
    series.push_back(std::move(a));
  }
  if (series.empty()) throw std::invalid_argument("no plottable rows");
  for (auto& s : series) std::stable_sort(s.points.begin(), s.points.end());

  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  const Range xr = padded(xmin, xmax);
  const Range yr = padded(ymin, ymax);
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * plot_w; };
  auto py = [&](double y) { return kTop + plot_h - (y - yr.lo) / (yr.hi - yr.lo) * plot_h; };

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";

  // Axes and ticks.
  out << "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w << "\" y2=\""
      << kTop + plot_h << "\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + plot_h
      << "\"/>\n";
  out << "</g>\n<g class=\"ticks\">\n";
  constexpr int kTicks = 5;
  if (numeric_x) {
    for (int t = 0; t <= kTicks; ++t) {
      const double v = xmin + (xmax - xmin) * t / kTicks;
      const double x = px(v);
      out << "<line x1=\"" << fmt(x, "%.2f") << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << fmt(x, "%.2f")
          << "\" y2=\"" << kTop + plot_h + 5 << "\" stroke=\"black\"/>\n";
      out << "<text x=\"" << fmt(x, "%.2f") << "\" y=\"" << kTop + plot_h + 20 << "\" text-anchor=\"middle\">"
          << fmt(v, "%.4g") << "</text>\n";
      if (xmax == xmin) break;
    }
  } else {
    for (std::size_t c = 0; c < categories.size(); ++c) {
      const double x = px(static_cast<double>(c));
      out << "<text x=\"" << fmt(x, "%.2f") << "\" y=\"" << kTop + plot_h + 20 << "\" text-anchor=\"middle\">"
          << xml_escape(categories[c]) << "</text>\n";
    }
  }
  for (int t = 0; t <= kTicks; ++t) {
    const double v = ymin + (ymax - ymin) * t / kTicks;
    const double y = py(v);
    out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << fmt(y, "%.2f") << "\" x2=\"" << kLeft << "\" y2=\""
        << fmt(y, "%.2f") << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << kLeft - 8 << "\" y=\"" << fmt(y + 4, "%.2f") << "\" text-anchor=\"end\">"
        << fmt(v, "%.4g") << "</text>\n";
    if (ymax == ymin) break;
  }
  out << "</g>\n";
  out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\">"
      << xml_escape(std::string(x_column)) << "</text>\n";
  out << "<text x=\"15\" y=\"" << kTop + plot_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
      << kTop + plot_h / 2 << ")\">normalized communication</text>\n";

  // Data.
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % std::size(kPalette)];
    const bool dashed = series[s].name == "analysis";
    out << "<g class=\"series\" data-name=\"" << xml_escape(series[s].name) << "\">\n";
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\""
        << (dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"";
    for (std::size_t i = 0; i < series[s].points.size(); ++i) {
      if (i) out << ' ';
      out << fmt(px(series[s].points[i].first), "%.2f") << ',' << fmt(py(series[s].points[i].second), "%.2f");
    }
    out << "\"/>\n";
    for (const auto& [x, y] : series[s].points)
      out << "<circle cx=\"" << fmt(px(x), "%.2f") << "\" cy=\"" << fmt(py(y), "%.2f") << "\" r=\"3\" fill=\""
          << color << "\"/>\n";
    out << "</g>\n";
  }

  // Legend.
  const double lx = kLeft + plot_w + 20;
  for (std::size_t s = 0; s < series.size(); ++s) {
    const double ly = kTop + 10 + 20.0 * static_cast<double>(s);
    const char* color = kPalette[s % std::size(kPalette)];
    out << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 25 << "\" y2=\"" << ly << "\" stroke=\""
        << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << lx + 32 << "\" y=\"" << ly + 4 << "\">" << xml_escape(series[s].name) << "</text>\n";
  }
  out << "</svg>\n";
}

void emit_svg_plot(const SweepTable& table, std::string_view x_column, std::string_view series_column,
                   const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  emit_svg_plot(table, x_column, series_column, out);
}

}  // namespace dynsched
