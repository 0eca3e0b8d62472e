#pragma once

// Minimal SVG rendering of sampled paths: one polyline per path and the real
// axis. Presentation only.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "loewner/core.hpp"

namespace loewner::svg {

inline std::string render(const std::vector<SampledPath>& paths, double width = 640.0,
                          double height = 480.0) {
  double x0 = -1.0, x1 = 1.0, y1 = 1.0;
  bool first = true;
  for (const auto& p : paths)
    for (const HPoint& h : p.points()) {
      if (first) {
        x0 = x1 = h.re();
        y1 = h.im();
        first = false;
      }
      x0 = std::min(x0, h.re());
      x1 = std::max(x1, h.re());
      y1 = std::max(y1, h.im());
    }
  double pad = 0.05 * std::max({x1 - x0, y1, 1e-9});
  x0 -= pad;
  x1 += pad;
  y1 += pad;
  double y0 = -pad;
  double scale = std::min(width / (x1 - x0), height / (y1 - y0));
  auto X = [&](double x) { return (x - x0) * scale; };
  auto Y = [&](double y) { return (y1 - y) * scale; };

  static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << (x1 - x0) * scale
     << "\" height=\"" << (y1 - y0) * scale << "\">\n";
  os << "<line x1=\"0\" y1=\"" << Y(0) << "\" x2=\"" << (x1 - x0) * scale << "\" y2=\"" << Y(0)
     << "\" stroke=\"#888\" stroke-width=\"1\"/>\n";
  for (std::size_t k = 0; k < paths.size(); ++k) {
    os << "<polyline fill=\"none\" stroke=\"" << colours[k % 5] << "\" stroke-width=\"1.2\" points=\"";
    for (const HPoint& h : paths[k].points()) os << X(h.re()) << ',' << Y(h.im()) << ' ';
    os << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace loewner::svg
