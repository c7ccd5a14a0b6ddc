#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "discreg/harness.hpp"

namespace discreg {

namespace {

constexpr double kWidth = 640, kHeight = 420, kLeft = 70, kRight = 150, kTop = 40, kBottom = 50;

const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                 "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return colors[i % 10];
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
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

std::string star_path(double cx, double cy, double r) {
  std::ostringstream d;
  for (int k = 0; k < 10; ++k) {
    const double radius = k % 2 == 0 ? r : r * 0.45;
    const double angle = -M_PI / 2 + k * M_PI / 5;
    d << (k == 0 ? 'M' : 'L') << cx + radius * std::cos(angle) << ',' << cy + radius * std::sin(angle);
  }
  d << 'Z';
  return d.str();
}

}  // namespace

std::string result_to_svg(const SweepResult& result, const std::string& title) {
  std::ostringstream svg;
  svg.imbue(std::locale::classic());
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) {
    svg << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
        << escape(title) << "</text>\n";
  }
  if (result.rows.empty()) {
    svg << "</svg>\n";
    return svg.str();
  }

  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  std::map<double, std::vector<const SweepRow*>> curves;
  for (const auto& row : result.rows) {
    curves[row.secondary].push_back(&row);
    x_lo = std::min(x_lo, row.sweep);
    x_hi = std::max(x_hi, row.sweep);
    for (double y : {row.ci_low, row.ci_high, row.loss_mean}) {
      if (std::isfinite(y)) {
        y_lo = std::min(y_lo, y);
        y_hi = std::max(y_hi, y);
      }
    }
  }
  if (x_hi == x_lo) { x_lo -= 0.5; x_hi += 0.5; }
  if (!(y_hi > y_lo)) { y_lo -= 0.5; y_hi += 0.5; }
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto sy = [&](double y) { return kTop + (y_hi - y) / (y_hi - y_lo) * ph; };

  // axes + ticks
  svg << "<g stroke=\"black\" fill=\"none\"><rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\""
      << pw << "\" height=\"" << ph << "\"/></g>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = x_lo + (x_hi - x_lo) * t / 4, yv = y_lo + (y_hi - y_lo) * t / 4;
    svg << "<text x=\"" << sx(xv) << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">"
        << xv << "</text>\n";
    svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">" << yv
        << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 10
      << "\" text-anchor=\"middle\">sweep</text>\n";
  svg << "<text x=\"16\" y=\"" << kTop + ph / 2 << "\" transform=\"rotate(-90 16 " << kTop + ph / 2
      << ")\" text-anchor=\"middle\">loss</text>\n";

  std::size_t idx = 0;
  for (auto& [secondary, rows] : curves) {
    std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->sweep < b->sweep; });
    const char* color = palette(idx);
    std::ostringstream band, line;
    band.imbue(std::locale::classic());
    line.imbue(std::locale::classic());
    for (auto* r : rows) band << sx(r->sweep) << ',' << sy(r->ci_high) << ' ';
    for (auto it = rows.rbegin(); it != rows.rend(); ++it) band << sx((*it)->sweep) << ',' << sy((*it)->ci_low) << ' ';
    for (auto* r : rows) line << sx(r->sweep) << ',' << sy(r->loss_mean) << ' ';
    svg << "<polygon points=\"" << band.str() << "\" fill=\"" << color
        << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    svg << "<polyline points=\"" << line.str() << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\"/>\n";
    const SweepRow* best = *std::min_element(rows.begin(), rows.end(), [](auto* a, auto* b) {
      return a->loss_mean < b->loss_mean;
    });
    svg << "<path d=\"" << star_path(sx(best->sweep), sy(best->loss_mean), 7) << "\" fill=\"" << color
        << "\" stroke=\"black\" stroke-width=\"0.5\"/>\n";
    const double ly = kTop + 14 + 18 * static_cast<double>(idx);
    svg << "<line x1=\"" << kWidth - kRight + 12 << "\" y1=\"" << ly << "\" x2=\""
        << kWidth - kRight + 32 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << kWidth - kRight + 38 << "\" y=\"" << ly + 4 << "\">" << secondary
        << "</text>\n";
    ++idx;
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_svg(const SweepResult& result, const std::string& path, const std::string& title) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << result_to_svg(result, title);
}

}  // namespace discreg
