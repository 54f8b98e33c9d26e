// core/src/synth_images.cpp

// Copyright 2026  The ndeblur Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "ndeblur/synth_images.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ndeblur {

namespace {

// signed distance < 0 inside
struct Shape {
  bool is_disk = true;
  double cx = 0, cy = 0;
  double r = 1;             // disk radius / rectangle half-width
  double ry = 1;            // rectangle half-height
  double ca = 1, sa = 0;    // rectangle orientation
  double value = 0.5;
  double gx = 0, gy = 0;    // intensity gradient per pixel

  double distance(double x, double y) const {
    const double dx = x - cx, dy = y - cy;
    if (is_disk) return std::hypot(dx, dy) - r;
    const double u = std::abs(ca * dx + sa * dy) - r;
    const double v = std::abs(-sa * dx + ca * dy) - ry;
    return std::max(u, v);
  }
  double shade(double x, double y) const {
    return std::clamp(value + gx * (x - cx) + gy * (y - cy), 0.02, 0.98);
  }
};

// coverage of a pixel from the signed distance at its center; a one-pixel
// linear ramp stands in for exact area antialiasing
double coverage(double d) { return std::clamp(0.5 - d, 0.0, 1.0); }

}  // namespace

Image make_dead_leaves(Rng& rng, int width, int height, const SynthImageConfig& cfg) {
  if (width < 8 || height < 8) throw std::invalid_argument("dead leaves canvas too small");
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  Image img(width, height, 0.3 + 0.4 * u01(rng));
  std::vector<bool> covered(img.size(), false);
  std::size_t uncovered = img.size();

  const double rmin = cfg.min_radius;
  const double rmax = std::max(rmin + 1.0, cfg.max_radius_fraction * std::min(width, height));
  const double a = cfg.size_power;
  // inverse-CDF sampling of p(r) ~ r^-a on [rmin, rmax]
  const double t0 = std::pow(rmin, 1.0 - a), t1 = std::pow(rmax, 1.0 - a);

  for (int s = 0; s < cfg.max_shapes && uncovered > 0; ++s) {
    Shape sh;
    sh.r = std::pow(t0 + (t1 - t0) * u01(rng), 1.0 / (1.0 - a));
    sh.is_disk = u01(rng) < 0.75;
    if (!sh.is_disk) {
      sh.ry = sh.r * (0.25 + 0.75 * u01(rng));
      const double ang = u01(rng) * 3.14159265358979323846;
      sh.ca = std::cos(ang);
      sh.sa = std::sin(ang);
    }
    const double reach = sh.is_disk ? sh.r : std::hypot(sh.r, sh.ry);
    sh.cx = -reach + u01(rng) * (width - 1 + 2.0 * reach);
    sh.cy = -reach + u01(rng) * (height - 1 + 2.0 * reach);
    sh.value = 0.03 + 0.94 * u01(rng);
    if (u01(rng) < cfg.gradient_probability) {
      const double mag = 0.15 * u01(rng) / std::max(sh.r, 1.0);
      const double dir = u01(rng) * 6.28318530717958647692;
      sh.gx = mag * std::cos(dir);
      sh.gy = mag * std::sin(dir);
    }

    const int x0 = std::max(0, static_cast<int>(std::floor(sh.cx - reach - 1)));
    const int x1 = std::min(width - 1, static_cast<int>(std::ceil(sh.cx + reach + 1)));
    const int y0 = std::max(0, static_cast<int>(std::floor(sh.cy - reach - 1)));
    const int y1 = std::min(height - 1, static_cast<int>(std::ceil(sh.cy + reach + 1)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double alpha = coverage(sh.distance(x, y));
        if (alpha <= 0.0) continue;
        double& px = img.at(x, y);
        px = alpha * sh.shade(x, y) + (1.0 - alpha) * px;
        const std::size_t i = static_cast<std::size_t>(y) * width + x;
        if (alpha > 0.999 && !covered[i]) {
          covered[i] = true;
          --uncovered;
        }
      }
    }
  }
  return img;
}

}  // namespace ndeblur
