#include "swedge/render.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "swedge/error.hpp"
#include "swedge/io.hpp"

namespace swedge {

namespace {

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

struct Frame {
  double x0, y0, w, h;
  double xmin, xmax, ymin, ymax;
  double px(double x) const { return x0 + (x - xmin) / (xmax - xmin) * w; }
  double py(double y) const { return y0 + h - (y - ymin) / (ymax - ymin) * h; }
};

void pad_range(double& lo, double& hi) {
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
}

void axes(std::ostringstream& os, const Frame& f, const std::string& title, const std::string& xlabel,
          const std::string& ylabel) {
  os << "<rect x=\"" << fmt(f.x0) << "\" y=\"" << fmt(f.y0) << "\" width=\"" << fmt(f.w) << "\" height=\""
     << fmt(f.h) << "\" fill=\"none\" stroke=\"#444\"/>\n";
  os << "<text x=\"" << fmt(f.x0 + f.w / 2) << "\" y=\"" << fmt(f.y0 - 8)
     << "\" text-anchor=\"middle\" font-size=\"13\">" << title << "</text>\n";
  os << "<text x=\"" << fmt(f.x0 + f.w / 2) << "\" y=\"" << fmt(f.y0 + f.h + 34)
     << "\" text-anchor=\"middle\" font-size=\"11\">" << xlabel << "</text>\n";
  os << "<text x=\"" << fmt(f.x0 - 42) << "\" y=\"" << fmt(f.y0 + f.h / 2) << "\" font-size=\"11\" "
     << "text-anchor=\"middle\" transform=\"rotate(-90 " << fmt(f.x0 - 42) << ' ' << fmt(f.y0 + f.h / 2)
     << ")\">" << ylabel << "</text>\n";
  for (int t = 0; t <= 4; ++t) {
    const double y = f.ymin + (f.ymax - f.ymin) * t / 4.0;
    os << "<text x=\"" << fmt(f.x0 - 4) << "\" y=\"" << fmt(f.py(y) + 4)
       << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(y) << "</text>\n";
    const double x = f.xmin + (f.xmax - f.xmin) * t / 4.0;
    os << "<text x=\"" << fmt(f.px(x)) << "\" y=\"" << fmt(f.y0 + f.h + 16)
       << "\" text-anchor=\"middle\" font-size=\"10\">" << fmt(x) << "</text>\n";
  }
  if (f.ymin < 0 && f.ymax > 0)
    os << "<line x1=\"" << fmt(f.x0) << "\" x2=\"" << fmt(f.x0 + f.w) << "\" y1=\"" << fmt(f.py(0))
       << "\" y2=\"" << fmt(f.py(0)) << "\" stroke=\"#bbb\"/>\n";
}

void polyline(std::ostringstream& os, const Frame& f, const std::vector<std::pair<double, double>>& pts,
              const char* color, const char* dash) {
  os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\"";
  if (dash) os << " stroke-dasharray=\"" << dash << "\"";
  os << " points=\"";
  for (const auto& [x, y] : pts) os << fmt(f.px(x)) << ',' << fmt(f.py(y)) << ' ';
  os << "\"/>\n";
}

void legend(std::ostringstream& os, double x, double y, const std::string& text, const char* color,
            const char* dash) {
  os << "<line x1=\"" << fmt(x) << "\" x2=\"" << fmt(x + 18) << "\" y1=\"" << fmt(y) << "\" y2=\"" << fmt(y)
     << "\" stroke=\"" << color << "\" stroke-width=\"1.8\"";
  if (dash) os << " stroke-dasharray=\"" << dash << "\"";
  os << "/>\n<text x=\"" << fmt(x + 22) << "\" y=\"" << fmt(y + 4) << "\" font-size=\"10\">" << text
     << "</text>\n";
}

}  // namespace

std::string ascii_grid(const DesignLayout& layout) {
  const int I = layout.clusters();
  const int T = layout.periods();
  std::vector<std::vector<std::string>> cells(I, std::vector<std::string>(T));
  std::size_t width = 1;
  for (int i = 1; i <= I; ++i)
    for (int j = 1; j <= T; ++j) {
      cells[i - 1][j - 1] = cell_label(layout, i, j);
      width = std::max(width, cells[i - 1][j - 1].size());
    }
  const std::string head = "cluster";
  std::ostringstream os;
  auto pad = [](const std::string& s, std::size_t w) { return std::string(w - std::min(w, s.size()), ' ') + s; };
  os << head;
  for (int j = 1; j <= T; ++j) os << "  " << pad("t" + std::to_string(j), width);
  os << '\n';
  for (int i = 1; i <= I; ++i) {
    os << pad(std::to_string(i), head.size());
    for (int j = 1; j <= T; ++j) os << "  " << pad(cells[i - 1][j - 1], width);
    os << '\n';
  }
  return os.str();
}

std::string bias_svg(const std::vector<BiasPanel>& panels) {
  if (panels.empty()) throw InvalidArgument("nothing to plot");
  const double pw = 320, ph = 220, margin = 60, gap = 30;
  const int cols = std::min<int>(2, static_cast<int>(panels.size()));
  const int rows = (static_cast<int>(panels.size()) + cols - 1) / cols;
  const double width = cols * (pw + margin + gap) + 40;
  const double height = rows * (ph + margin + gap + 30) + 20;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\"" << fmt(height)
     << "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const BiasPanel& panel = panels[p];
    const EffectCurve& c = panel.curve;
    const int m = c.interventions();
    if (panel.h.h.rows() != m || panel.h.h.cols() != m * (c.periods() - 1))
      throw InvalidArgument("weight matrix does not match the curve in panel '" + panel.title + "'");
    const Eigen::VectorXd expected = panel.h.h * c.stacked();
    const Eigen::VectorXd truth = c.realized_estimand();
    double lo = std::min({c.stacked().minCoeff(), expected.minCoeff(), 0.0});
    double hi = std::max({c.stacked().maxCoeff(), expected.maxCoeff()});
    pad_range(lo, hi);
    const int col = static_cast<int>(p) % cols;
    const int row = static_cast<int>(p) / cols;
    const Frame f{margin + col * (pw + margin + gap), 30 + row * (ph + margin + gap + 30), pw, ph,
                  1.0, static_cast<double>(std::max(2, c.periods() - 1)), lo, hi};
    axes(os, f, panel.title, "exposure time e", "effect");
    for (int k = 1; k <= m; ++k) {
      const char* color = kColors[(k - 1) % 6];
      std::vector<std::pair<double, double>> pts;
      for (int e = 1; e < c.periods(); ++e) pts.emplace_back(e, c.delta(k, e));
      polyline(os, f, pts, color, nullptr);
      polyline(os, f, {{f.xmin, expected(k - 1)}, {f.xmax, expected(k - 1)}}, color, "6,4");
      polyline(os, f, {{f.xmin, truth(k - 1)}, {f.xmax, truth(k - 1)}}, color, "2,3");
      const double ly = f.y0 + f.h + 48 + 0.0;
      legend(os, f.x0 + (k - 1) * 110, ly, "k=" + std::to_string(k) + " true", color, nullptr);
      legend(os, f.x0 + (k - 1) * 110, ly + 14, "k=" + std::to_string(k) + " expected", color, "6,4");
      legend(os, f.x0 + (k - 1) * 110, ly + 28, "k=" + std::to_string(k) + " average", color, "2,3");
    }
  }
  os << "</svg>\n";
  return os.str();
}

std::string power_svg(const std::vector<PowerRow>& rows) {
  if (rows.empty()) throw InvalidArgument("nothing to plot");
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  double xmin = rows.front().delta1, xmax = xmin;
  for (const auto& r : rows) {
    const std::string key = r.design + " n=" + std::to_string(r.n) + " k=" + std::to_string(r.intervention);
    series[key].emplace_back(r.delta1, r.power);
    xmin = std::min(xmin, r.delta1);
    xmax = std::max(xmax, r.delta1);
  }
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  const double width = 640, height = 420 + 14.0 * static_cast<double>(series.size());
  const Frame f{70, 40, 520, 300, xmin, xmax, 0.0, 100.0};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\"" << fmt(height)
     << "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  axes(os, f, "Empirical power", "delta1", "power (%)");
  int s = 0;
  for (auto& [key, pts] : series) {
    std::sort(pts.begin(), pts.end());
    const char* color = kColors[s % 6];
    const char* dash = key.find("k=2") != std::string::npos ? "6,4" : nullptr;
    polyline(os, f, pts, color, dash);
    legend(os, f.x0, f.y0 + f.h + 50 + 14.0 * s, key, color, dash);
    ++s;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace swedge
