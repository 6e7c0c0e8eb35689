#include "qwem/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "qwem/error.hpp"

namespace qwem {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                          "#8c564b", "#17becf", "#7f7f7f", "#bcbd22", "#e377c2"};
constexpr int kPaletteSize = 10;
constexpr int kMarginLeft = 72, kMarginRight = 24, kMarginTop = 40, kMarginBottom = 56;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out.push_back(c);
  }
  return out;
}

struct Axis {
  // hi <= lo means "no range yet": make_frame ignores such a seed axis.
  double lo = 0.0, hi = 0.0;
  bool log = false;

  double place(double v, double pix_lo, double pix_hi) const {
    double t;
    if (log)
      t = (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo));
    else
      t = (v - lo) / (hi - lo);
    return pix_lo + t * (pix_hi - pix_lo);
  }
};

// Tick positions at 1/2/5 multiples (linear) or decades (log).
std::vector<double> ticks(const Axis& ax) {
  std::vector<double> out;
  if (ax.log) {
    const int e_lo = static_cast<int>(std::floor(std::log10(ax.lo) + 1e-9));
    const int e_hi = static_cast<int>(std::ceil(std::log10(ax.hi) - 1e-9));
    for (int e = e_lo; e <= e_hi; ++e) {
      const double v = std::pow(10.0, e);
      if (v >= ax.lo * (1 - 1e-12) && v <= ax.hi * (1 + 1e-12)) out.push_back(v);
    }
    if (out.size() < 2) out = {ax.lo, ax.hi};
    return out;
  }
  const double span = ax.hi - ax.lo;
  if (span <= 0) return {ax.lo};
  const double raw = span / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  const double first = std::ceil(ax.lo / step) * step;
  for (double v = first; v <= ax.hi + 0.5 * step; v += step)
    out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  return out;
}

// Data bounds over finite (and, on log axes, positive) values.
void grow(Axis& ax, double v) {
  if (!std::isfinite(v)) return;
  if (ax.log && v <= 0.0) return;
  ax.lo = std::min(ax.lo, v);
  ax.hi = std::max(ax.hi, v);
}

struct Frame {
  Axis x, y;
  int width, height;
  double px0, px1, py0, py1;  // plot rectangle; y grows downward in SVG

  double X(double v) const { return x.place(v, px0, px1); }
  double Y(double v) const { return y.place(v, py1, py0); }
};

Frame make_frame(const std::vector<Series>& series, const ChartConfig& cfg,
                 const Axis& seed_x, const Axis& seed_y) {
  Frame f;
  f.width = cfg.width;
  f.height = cfg.height;
  f.x = seed_x;
  f.y = seed_y;
  f.x.log = cfg.logx;
  f.y.log = cfg.logy;
  f.x.lo = f.y.lo = std::numeric_limits<double>::infinity();
  f.x.hi = f.y.hi = -std::numeric_limits<double>::infinity();
  for (const Series& s : series) {
    for (double v : s.x) grow(f.x, v);
    for (double v : s.y) grow(f.y, v);
  }
  if (seed_x.hi > seed_x.lo) {
    grow(f.x, seed_x.lo);
    grow(f.x, seed_x.hi);
  }
  if (seed_y.hi > seed_y.lo) {
    grow(f.y, seed_y.lo);
    grow(f.y, seed_y.hi);
  }
  if (!std::isfinite(f.x.lo) || !std::isfinite(f.y.lo))
    throw UsageError("chart has no drawable finite data");
  const auto pad = [](Axis& ax) {
    if (ax.lo == ax.hi) {
      const double d = ax.log ? 0.0 : std::max(1.0, std::abs(ax.lo));
      if (ax.log) {
        ax.lo *= 0.5;
        ax.hi *= 2.0;
      } else {
        ax.lo -= d;
        ax.hi += d;
      }
    } else if (!ax.log) {
      const double d = 0.03 * (ax.hi - ax.lo);
      ax.lo -= d;
      ax.hi += d;
    }
  };
  pad(f.x);
  pad(f.y);
  f.px0 = kMarginLeft;
  f.px1 = cfg.width - kMarginRight;
  f.py0 = kMarginTop;
  f.py1 = cfg.height - kMarginBottom;
  return f;
}

void open_svg(std::ostringstream& os, const Frame& f, const ChartConfig& cfg) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width
     << "\" height=\"" << f.height << "\" viewBox=\"0 0 " << f.width << " "
     << f.height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<g font-family=\"Helvetica,Arial,sans-serif\" font-size=\"12\">\n";
  if (!cfg.title.empty())
    os << "<text x=\"" << f.width / 2 << "\" y=\"22\" text-anchor=\"middle\" "
          "font-size=\"15\">"
       << escape(cfg.title) << "</text>\n";
  // axes box
  os << "<rect x=\"" << f.px0 << "\" y=\"" << f.py0 << "\" width=\""
     << f.px1 - f.px0 << "\" height=\"" << f.py1 - f.py0
     << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (double t : ticks(f.x)) {
    const double px = f.X(t);
    os << "<line x1=\"" << fmt(px) << "\" y1=\"" << f.py1 << "\" x2=\"" << fmt(px)
       << "\" y2=\"" << f.py1 + 5 << "\" stroke=\"#333\"/>\n";
    os << "<text x=\"" << fmt(px) << "\" y=\"" << f.py1 + 18
       << "\" text-anchor=\"middle\">" << fmt(t) << "</text>\n";
  }
  for (double t : ticks(f.y)) {
    const double py = f.Y(t);
    os << "<line x1=\"" << f.px0 - 5 << "\" y1=\"" << fmt(py) << "\" x2=\"" << f.px0
       << "\" y2=\"" << fmt(py) << "\" stroke=\"#333\"/>\n";
    os << "<text x=\"" << f.px0 - 8 << "\" y=\"" << fmt(py + 4)
       << "\" text-anchor=\"end\">" << fmt(t) << "</text>\n";
  }
  if (!cfg.xlabel.empty())
    os << "<text x=\"" << (f.px0 + f.px1) / 2 << "\" y=\"" << f.height - 14
       << "\" text-anchor=\"middle\">" << escape(cfg.xlabel) << "</text>\n";
  if (!cfg.ylabel.empty())
    os << "<text x=\"18\" y=\"" << (f.py0 + f.py1) / 2
       << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
       << (f.py0 + f.py1) / 2 << ")\">" << escape(cfg.ylabel) << "</text>\n";
  for (double xm : cfg.x_markers) {
    if (!std::isfinite(xm) || xm < f.x.lo || xm > f.x.hi) continue;
    const double px = f.X(xm);
    os << "<line x1=\"" << fmt(px) << "\" y1=\"" << f.py0 << "\" x2=\"" << fmt(px)
       << "\" y2=\"" << f.py1
       << "\" stroke=\"#999\" stroke-dasharray=\"2,4\"/>\n";
  }
}

void legend(std::ostringstream& os, const Frame& f, const std::vector<Series>& series,
            std::size_t color_offset = 0) {
  double ly = f.py0 + 14;
  for (std::size_t s = 0; s < series.size(); ++s) {
    if (series[s].label.empty()) continue;
    const char* color = kPalette[(s + color_offset) % kPaletteSize];
    const double lx = f.px1 - 150;
    os << "<line x1=\"" << lx << "\" y1=\"" << ly - 4 << "\" x2=\"" << lx + 22
       << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\""
       << (series[s].dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
    os << "<text x=\"" << lx + 28 << "\" y=\"" << ly << "\">" << escape(series[s].label)
       << "</text>\n";
    ly += 16;
  }
}

void close_svg(std::ostringstream& os) { os << "</g>\n</svg>\n"; }

// Clips nothing: callers only pass data within the padded bounds; values on a
// log axis that are non-positive are skipped (they set broken flags so the
// polyline restarts).
void draw_series(std::ostringstream& os, const Frame& f, const Series& s,
                 std::size_t idx, bool lines) {
  const char* color = kPalette[idx % kPaletteSize];
  if (lines) {
    std::string points;
    bool open = false;
    std::ostringstream seg;
    const auto flush_seg = [&] {
      if (open) {
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.7\""
           << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\""
           << seg.str() << "\"/>\n";
      }
      seg.str("");
      open = false;
    };
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      const double xv = s.x[k], yv = s.y[k];
      const bool drawable = std::isfinite(xv) && std::isfinite(yv) &&
                            (!f.x.log || xv > 0) && (!f.y.log || yv > 0);
      if (!drawable) {
        flush_seg();
        continue;
      }
      seg << fmt(f.X(xv)) << "," << fmt(f.Y(yv)) << " ";
      open = true;
    }
    flush_seg();
  } else {
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      const double xv = s.x[k], yv = s.y[k];
      if (!std::isfinite(xv) || !std::isfinite(yv)) continue;
      if ((f.x.log && xv <= 0) || (f.y.log && yv <= 0)) continue;
      os << "<circle cx=\"" << fmt(f.X(xv)) << "\" cy=\"" << fmt(f.Y(yv))
         << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
  }
}

std::string chart(const std::vector<Series>& series, const ChartConfig& cfg,
                  bool lines) {
  if (series.empty()) throw UsageError("chart needs at least one series");
  Frame f = make_frame(series, cfg, Axis{}, Axis{});
  std::ostringstream os;
  open_svg(os, f, cfg);
  for (std::size_t s = 0; s < series.size(); ++s)
    draw_series(os, f, series[s], s, lines);
  legend(os, f, series);
  close_svg(os);
  return os.str();
}

}  // namespace

std::string line_chart_svg(const std::vector<Series>& series, const ChartConfig& cfg) {
  return chart(series, cfg, true);
}

std::string scatter_chart_svg(const std::vector<Series>& series,
                              const ChartConfig& cfg) {
  return chart(series, cfg, false);
}

std::string histogram_svg(const Histogram& hist, const std::vector<Series>& overlays,
                          const ChartConfig& cfg) {
  if (hist.counts.empty() || hist.edges.size() != hist.counts.size() + 1)
    throw UsageError("histogram has inconsistent bins");
  std::uint64_t total = 0;
  for (auto c : hist.counts) total += c;
  if (total == 0) throw UsageError("histogram is empty");

  // Density normalization so MP-law overlays share the y scale.
  std::vector<double> density(hist.counts.size());
  double dmax = 0.0;
  for (std::size_t b = 0; b < hist.counts.size(); ++b) {
    const double w = hist.edges[b + 1] - hist.edges[b];
    density[b] = w > 0 ? static_cast<double>(hist.counts[b]) / (total * w) : 0.0;
    dmax = std::max(dmax, density[b]);
  }

  Axis seed_x, seed_y;
  seed_x.lo = hist.edges.front();
  seed_x.hi = hist.edges.back();
  seed_y.lo = 0.0;
  seed_y.hi = dmax;
  ChartConfig c2 = cfg;
  c2.logx = c2.logy = false;  // bars need linear axes
  Frame f = make_frame(overlays, c2, seed_x, seed_y);

  std::ostringstream os;
  open_svg(os, f, c2);
  for (std::size_t b = 0; b < hist.counts.size(); ++b) {
    const double x0 = f.X(hist.edges[b]);
    const double x1 = f.X(hist.edges[b + 1]);
    const double y0 = f.Y(density[b]);
    const double y1 = f.Y(0.0);
    os << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y0) << "\" width=\""
       << fmt(std::max(0.5, x1 - x0 - 0.5)) << "\" height=\"" << fmt(y1 - y0)
       << "\" fill=\"#9ecae1\" stroke=\"#6baed6\"/>\n";
  }
  for (std::size_t s = 0; s < overlays.size(); ++s)
    draw_series(os, f, overlays[s], s + 1, true);
  legend(os, f, overlays, 1);
  close_svg(os);
  return os.str();
}

}  // namespace qwem
