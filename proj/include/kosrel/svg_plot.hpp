#pragma once

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace kosrel {

struct PlotSeries {
  std::string name;
  std::vector<double> y;  // NaN = gap
};

/// Static line chart of rank trajectories. Rank 1 is drawn at the top.
inline void write_rank_svg(std::ostream& out, const std::string& title,
                           const std::vector<std::string>& x_labels,
                           const std::vector<PlotSeries>& series, const std::string& comment = {}) {
  constexpr double kW = 900, kH = 520, kLeft = 60, kRight = 190, kTop = 40, kBottom = 60;
  const double plot_w = kW - kLeft - kRight, plot_h = kH - kTop - kBottom;
  double max_rank = 1;
  for (const auto& s : series)
    for (double v : s.y)
      if (v == v) max_rank = std::max(max_rank, v);
  const auto n = x_labels.size();
  auto px = [&](std::size_t i) { return kLeft + (n > 1 ? plot_w * static_cast<double>(i) / static_cast<double>(n - 1) : plot_w / 2); };
  auto py = [&](double r) { return kTop + (max_rank > 1 ? plot_h * (r - 1) / (max_rank - 1) : 0.0); };
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  char buf[256];
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (!comment.empty()) out << "<!-- " << comment << " -->\n";
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n",
                kW, kH, kW, kH);
  out << buf;
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kLeft << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n", kLeft,
                kTop + plot_h, kLeft + plot_w, kTop + plot_h);
  out << buf;
  std::snprintf(buf, sizeof buf, "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                kLeft, kTop, kLeft, kTop + plot_h);
  out << buf;
  const std::size_t label_step = std::max<std::size_t>(1, n / 12);
  for (std::size_t i = 0; i < n; i += label_step) {
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">",
                  px(i), kTop + plot_h + 16);
    out << buf << x_labels[i] << "</text>\n";
  }
  for (double r : {1.0, max_rank}) {
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">%.0f</text>\n",
                  kLeft - 6, py(r) + 3, r);
    out << buf;
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = palette[s % 10];
    std::string points;
    for (std::size_t i = 0; i < series[s].y.size() && i < n; ++i) {
      const double v = series[s].y[i];
      if (v != v) continue;
      std::snprintf(buf, sizeof buf, "%.1f,%.1f ", px(i), py(v));
      points += buf;
    }
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"" << points << "\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"11\" fill=\"%s\">",
                  kLeft + plot_w + 10, kTop + 14.0 * static_cast<double>(s + 1), color);
    out << buf << series[s].name << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace kosrel
