#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "perfshift/errors.hpp"
#include "perfshift/experiment.hpp"

namespace perfshift {

namespace {

struct Series {
  std::string label;
  std::string color;
  bool dashed = false;
  std::vector<std::pair<double, double>> points;  // (delta_pi, value)
};

std::string f2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string fg(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

void validate_metric_names(const std::vector<std::string>& metrics) {
  if (metrics.empty()) throw ValidationError("plot: no metrics selected");
  for (const auto& name : metrics) {
    if (std::find_if(kMetricNames.begin(), kMetricNames.end(),
                     [&](const char* m) { return name == m; }) == kMetricNames.end()) {
      std::string known;
      for (const char* m : kMetricNames) known += std::string(known.empty() ? "" : ", ") + m;
      throw ValidationError("plot: unknown metric '" + name + "' (valid: " + known + ")");
    }
  }
}

constexpr double kPlotW = 300.0;
constexpr double kPlotH = 240.0;
constexpr double kMarginL = 56.0;
constexpr double kMarginR = 16.0;
constexpr double kMarginT = 40.0;
constexpr double kMarginB = 46.0;
constexpr double kLegendH = 26.0;

}  // namespace

void emit_plot(const SweepResult& result, const std::vector<std::string>& metrics,
               const std::string& path) {
  validate_metric_names(metrics);
  if (result.rows.empty()) throw ValidationError("plot: empty sweep result");

  // Render the observable variant when present, otherwise counterfactual.
  bool has_observable = false;
  for (const auto& row : result.rows) {
    if (row.variant == OutcomeVariant::observable) has_observable = true;
  }
  const OutcomeVariant variant =
      has_observable ? OutcomeVariant::observable : OutcomeVariant::counterfactual;

  std::vector<Path> paths;
  for (Path p : {Path::oracle, Path::mc}) {
    for (const auto& row : result.rows) {
      if (row.variant == variant && row.path == p) {
        paths.push_back(p);
        break;
      }
    }
  }

  const double panel_w = kMarginL + kPlotW + kMarginR;
  const double panel_h = kMarginT + kPlotH + kMarginB;
  const double fig_w = panel_w * static_cast<double>(metrics.size());
  const double fig_h = kLegendH + panel_h;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fg(fig_w) << "\" height=\""
      << fg(fig_h) << "\" viewBox=\"0 0 " << fg(fig_w) << " " << fg(fig_h) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // Shared legend.
  {
    const struct {
      const char* label;
      const char* color;
    } entries[] = {{"group 0", "#1f77b4"}, {"group 1", "#d62728"}, {"abs diff", "#2ca02c"}};
    double x = 12.0;
    for (const auto& e : entries) {
      out << "<line x1=\"" << f2(x) << "\" y1=\"14\" x2=\"" << f2(x + 22) << "\" y2=\"14\" "
          << "stroke=\"" << e.color << "\" stroke-width=\"2\"/>\n";
      out << "<text x=\"" << f2(x + 27) << "\" y=\"18\" font-family=\"sans-serif\" "
          << "font-size=\"12\">" << e.label << "</text>\n";
      x += 110.0;
    }
    if (paths.size() > 1) {
      out << "<line x1=\"" << f2(x) << "\" y1=\"14\" x2=\"" << f2(x + 22)
          << "\" y2=\"14\" stroke=\"#555555\" stroke-width=\"2\"/>\n";
      out << "<text x=\"" << f2(x + 27) << "\" y=\"18\" font-family=\"sans-serif\" "
          << "font-size=\"12\">oracle (solid)</text>\n";
      x += 130.0;
      out << "<line x1=\"" << f2(x) << "\" y1=\"14\" x2=\"" << f2(x + 22)
          << "\" y2=\"14\" stroke=\"#555555\" stroke-width=\"2\" stroke-dasharray=\"5,3\"/>\n";
      out << "<text x=\"" << f2(x + 27) << "\" y=\"18\" font-family=\"sans-serif\" "
          << "font-size=\"12\">mc (dashed)</text>\n";
    }
  }

  for (std::size_t mi = 0; mi < metrics.size(); ++mi) {
    const std::string& metric = metrics[mi];
    const double ox = panel_w * static_cast<double>(mi) + kMarginL;  // plot origin x
    const double oy = kLegendH + kMarginT;                           // plot origin y (top)

    // Gather series and the x-range.
    std::vector<Series> series;
    std::vector<std::pair<double, double>> k_marks;  // (x, k) for the top annotation
    double x_min = 0.0, x_max = 0.0;
    bool have_x = false;
    for (Path p : paths) {
      Series s0{"group 0", "#1f77b4", p == Path::mc, {}};
      Series s1{"group 1", "#d62728", p == Path::mc, {}};
      Series sd{"abs diff", "#2ca02c", p == Path::mc, {}};
      for (const auto& row : result.rows) {
        if (row.variant != variant || row.path != p) continue;
        if (!row.delta_pi.has_value()) continue;
        const double x = *row.delta_pi;
        if (!have_x) {
          x_min = x_max = x;
          have_x = true;
        } else {
          x_min = std::min(x_min, x);
          x_max = std::max(x_max, x);
        }
        if (p == paths.front()) k_marks.emplace_back(x, row.k);
        if (auto v = metric_by_name(row.group[0], metric)) s0.points.emplace_back(x, *v);
        if (auto v = metric_by_name(row.group[1], metric)) s1.points.emplace_back(x, *v);
        if (auto v = metric_by_name(row.abs_diff, metric)) sd.points.emplace_back(x, *v);
      }
      series.push_back(std::move(s0));
      series.push_back(std::move(s1));
      series.push_back(std::move(sd));
    }
    if (!have_x) {
      x_min = 0.0;
      x_max = 1.0;
    }
    if (x_max - x_min < 1e-12) {  // degenerate span: pad so markers sit mid-panel
      x_min -= 0.5;
      x_max += 0.5;
    }

    auto sx = [&](double x) { return ox + (x - x_min) / (x_max - x_min) * kPlotW; };
    auto sy = [&](double y) { return oy + (1.0 - y) * kPlotH; };

    // Frame and ticks. Metric values are probabilities, so y is fixed [0,1].
    out << "<rect x=\"" << f2(ox) << "\" y=\"" << f2(oy) << "\" width=\"" << f2(kPlotW)
        << "\" height=\"" << f2(kPlotH)
        << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    for (int t = 0; t <= 4; ++t) {
      const double yv = 0.25 * t;
      out << "<line x1=\"" << f2(ox - 4) << "\" y1=\"" << f2(sy(yv)) << "\" x2=\"" << f2(ox)
          << "\" y2=\"" << f2(sy(yv)) << "\" stroke=\"#333333\"/>\n";
      out << "<text x=\"" << f2(ox - 8) << "\" y=\"" << f2(sy(yv) + 4)
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fg(yv)
          << "</text>\n";
      const double xv = x_min + (x_max - x_min) * 0.25 * t;
      out << "<line x1=\"" << f2(sx(xv)) << "\" y1=\"" << f2(oy + kPlotH) << "\" x2=\""
          << f2(sx(xv)) << "\" y2=\"" << f2(oy + kPlotH + 4) << "\" stroke=\"#333333\"/>\n";
      char xbuf[32];
      std::snprintf(xbuf, sizeof(xbuf), "%.3g", xv);
      out << "<text x=\"" << f2(sx(xv)) << "\" y=\"" << f2(oy + kPlotH + 17)
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << xbuf
          << "</text>\n";
    }

    // Odds-factor annotation along the top edge (first / middle / last point).
    if (!k_marks.empty()) {
      std::vector<std::size_t> picks = {0};
      if (k_marks.size() > 2) picks.push_back(k_marks.size() / 2);
      if (k_marks.size() > 1) picks.push_back(k_marks.size() - 1);
      for (std::size_t idx : picks) {
        const auto& [x, k] = k_marks[idx];
        out << "<line x1=\"" << f2(sx(x)) << "\" y1=\"" << f2(oy - 4) << "\" x2=\"" << f2(sx(x))
            << "\" y2=\"" << f2(oy) << "\" stroke=\"#888888\"/>\n";
        out << "<text x=\"" << f2(sx(x)) << "\" y=\"" << f2(oy - 7)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\" "
            << "fill=\"#555555\">k=" << fg(k) << "</text>\n";
      }
    }

    out << "<text x=\"" << f2(ox + kPlotW / 2) << "\" y=\"" << f2(oy - 22)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" << metric
        << "</text>\n";
    out << "<text x=\"" << f2(ox + kPlotW / 2) << "\" y=\"" << f2(oy + kPlotH + 34)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << "propensity change in selected stratum</text>\n";

    for (const Series& s : series) {
      if (s.points.size() >= 2) {
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"";
        if (s.dashed) out << " stroke-dasharray=\"5,3\"";
        out << " points=\"";
        for (const auto& [x, y] : s.points) out << f2(sx(x)) << "," << f2(sy(y)) << " ";
        out << "\"/>\n";
      }
      for (const auto& [x, y] : s.points) {
        out << "<circle cx=\"" << f2(sx(x)) << "\" cy=\"" << f2(sy(y)) << "\" r=\"2\" fill=\""
            << s.color << "\"/>\n";
      }
    }
  }

  out << "</svg>\n";
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace perfshift
