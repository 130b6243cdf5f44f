/*
 Copyright 2026 The robustroa Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "robustroa/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace robustroa::svg {

namespace {

constexpr int kLeft = 70, kRight = 20, kTop = 30, kBottom = 45;
constexpr std::size_t kMaxPoints = 2000;

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

void limits(const Plot& p, int axis, double& lo, double& hi) {
  lo = axis == 0 ? p.x_lo : p.y_lo;
  hi = axis == 0 ? p.x_hi : p.y_hi;
  if (lo < hi) return;
  lo = std::numeric_limits<double>::infinity();
  hi = -lo;
  for (const auto& s : p.series)
    for (double v : axis == 0 ? s.x : s.y)
      if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
  if (!(lo <= hi)) lo = 0.0, hi = 1.0;
  if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
}

void panel(std::ostringstream& os, const Plot& p, int width, int height, int y0) {
  double xl, xh, yl, yh;
  limits(p, 0, xl, xh);
  limits(p, 1, yl, yh);
  const double pw = width - kLeft - kRight, ph = height - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - xl) / (xh - xl) * pw; };
  auto sy = [&](double y) { return y0 + kTop + (yh - y) / (yh - yl) * ph; };

  os << "<text x=\"" << width / 2 << "\" y=\"" << y0 + 18 << "\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(p.title) << "</text>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << y0 + kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = xl + (xh - xl) * k / 4.0, yv = yl + (yh - yl) * k / 4.0;
    os << "<text x=\"" << sx(xv) << "\" y=\"" << y0 + kTop + ph + 15
       << "\" text-anchor=\"middle\" font-size=\"10\">" << fmt(xv) << "</text>\n";
    os << "<text x=\"" << kLeft - 5 << "\" y=\"" << sy(yv) + 3 << "\" text-anchor=\"end\" font-size=\"10\">"
       << fmt(yv) << "</text>\n";
  }
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << y0 + height - 8
     << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(p.x_label) << "</text>\n";
  os << "<text transform=\"translate(14," << y0 + kTop + ph / 2
     << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"12\">" << escape(p.y_label) << "</text>\n";

  int legend = 0;
  for (const auto& s : p.series) {
    const std::size_t n = std::min(s.x.size(), s.y.size());
    if (n == 0) continue;
    const std::size_t stride = std::max<std::size_t>(1, n / kMaxPoints);
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
       << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"";
    for (std::size_t i = 0; i < n; i += stride) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      const double yc = std::clamp(s.y[i], yl, yh);
      os << fmt(sx(s.x[i])) << ',' << fmt(sy(yc)) << ' ';
    }
    os << "\"/>\n";
    if (!s.label.empty()) {
      const int ly = y0 + kTop + 14 + 14 * legend++;
      os << "<line x1=\"" << kLeft + pw - 120 << "\" y1=\"" << ly - 4 << "\" x2=\"" << kLeft + pw - 100
         << "\" y2=\"" << ly - 4 << "\" stroke=\"" << s.color << "\"" << (s.dashed ? " stroke-dasharray=\"6,4\"" : "")
         << "/>\n<text x=\"" << kLeft + pw - 95 << "\" y=\"" << ly << "\" font-size=\"10\">" << escape(s.label)
         << "</text>\n";
    }
  }
}

}  // namespace

std::string render(const std::vector<Plot>& panels, int width, int panel_height) {
  std::ostringstream os;
  const int height = panel_height * static_cast<int>(std::max<std::size_t>(panels.size(), 1));
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < panels.size(); ++i)
    panel(os, panels[i], width, panel_height, static_cast<int>(i) * panel_height);
  os << "</svg>\n";
  return os.str();
}

}  // namespace robustroa::svg
