// core/src/kernel_synth.cpp

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

#include "ndeblur/kernel_synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ndeblur {

namespace {

constexpr double kMaxSampleGap = 0.5;   // px between consecutive spline samples
constexpr double kCoverageFloor = 0.05; // splat mass below which a pixel is untouched

Point2 catmull_rom(const Point2& p0, const Point2& p1, const Point2& p2, const Point2& p3,
                   double t) {
  const double t2 = t * t, t3 = t2 * t;
  auto blend = [&](double a, double b, double c, double d) {
    return 0.5 * (2.0 * b + (-a + c) * t + (2.0 * a - 5.0 * b + 4.0 * c - d) * t2 +
                  (-a + 3.0 * b - 3.0 * c + d) * t3);
  };
  return {blend(p0.x, p1.x, p2.x, p3.x), blend(p0.y, p1.y, p2.y, p3.y)};
}

// Interpolating spline through all control points (endpoints duplicated),
// refined until consecutive samples are closer than kMaxSampleGap.
std::vector<Point2> trace_spline(const std::vector<Point2>& pts) {
  if (pts.size() < 2) return pts;
  std::vector<Point2> out;
  const auto at = [&](int i) {
    return pts[static_cast<std::size_t>(std::clamp(i, 0, static_cast<int>(pts.size()) - 1))];
  };
  for (int seg = 0; seg + 1 < static_cast<int>(pts.size()); ++seg) {
    int m = 8;
    std::vector<Point2> samples;
    for (;;) {
      samples.clear();
      const bool last = seg + 2 == static_cast<int>(pts.size());
      const int count = last ? m + 1 : m;  // include t=1 only on the final segment
      for (int i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) / m;
        samples.push_back(catmull_rom(at(seg - 1), at(seg), at(seg + 1), at(seg + 2), t));
      }
      double worst = 0.0;
      for (std::size_t i = 1; i < samples.size(); ++i)
        worst = std::max(worst, std::hypot(samples[i].x - samples[i - 1].x,
                                           samples[i].y - samples[i - 1].y));
      if (worst < kMaxSampleGap || m >= 8192) break;
      m *= 2;
    }
    out.insert(out.end(), samples.begin(), samples.end());
  }
  return out;
}

// Coverage accumulator: bilinear splat weighted by local arc step, so the
// result approximates traversed arc length and is stable under refinement.
std::vector<double> rasterize_coverage(const std::vector<Point2>& samples, int grid_size,
                                       int canvas) {
  std::vector<double> cov(static_cast<std::size_t>(canvas) * canvas, 0.0);
  const double off = 0.5 * (canvas - 1) - 0.5 * (grid_size - 1);
  Point2 prev = samples.empty() ? Point2{} : samples.front();
  for (const Point2& p : samples) {
    const double step = std::hypot(p.x - prev.x, p.y - prev.y);
    prev = p;
    const double w = std::min(std::max(step, 1e-3), kMaxSampleGap) / kMaxSampleGap;
    const double qx = p.x + off, qy = p.y + off;
    const int x0 = static_cast<int>(std::floor(qx));
    const int y0 = static_cast<int>(std::floor(qy));
    const double fx = qx - x0, fy = qy - y0;
    const double ww[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
    const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
    const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
    for (int i = 0; i < 4; ++i) {
      if (xs[i] < 0 || xs[i] >= canvas || ys[i] < 0 || ys[i] >= canvas) continue;
      cov[static_cast<std::size_t>(ys[i]) * canvas + xs[i]] += w * ww[i];
    }
  }
  return cov;
}

// One rasterization + value-assignment attempt; empty result means the draw
// was degenerate and the caller should retry.
std::vector<double> try_values(const std::vector<Point2>& points, int grid_size, Rng& rng,
                               const KernelSynthConfig& cfg) {
  const std::vector<double> cov =
      rasterize_coverage(trace_spline(points), grid_size, cfg.canvas);
  std::normal_distribution<double> value(cfg.value_mean, cfg.value_std);
  std::vector<double> taps(cov.size(), 0.0);
  double mass = 0.0;
  for (std::size_t i = 0; i < cov.size(); ++i) {
    if (cov[i] <= kCoverageFloor) continue;
    const double v = std::max(value(rng), 0.0);
    taps[i] = v;
    mass += v;
  }
  if (mass <= 0.0) return {};
  for (double& v : taps) v /= mass;
  return taps;
}

int grid_of(const std::vector<Point2>& points, const KernelSynthConfig& cfg) {
  double extent = 0.0;
  for (const Point2& p : points) extent = std::max({extent, p.x, p.y});
  for (int g : cfg.grid_sizes)
    if (extent < g) return g;
  return cfg.grid_sizes.empty() ? cfg.canvas - 1 : cfg.grid_sizes.back();
}

}  // namespace

void KernelSynthConfig::validate() const {
  if (canvas < 3 || canvas % 2 == 0) throw std::invalid_argument("canvas must be odd and >= 3");
  if (control_points < 2) throw std::invalid_argument("need at least 2 control points");
  if (grid_sizes.empty()) throw std::invalid_argument("no grid sizes configured");
  for (int g : grid_sizes)
    if (canvas < g + 1)
      throw std::invalid_argument("canvas must be at least grid size + 1");
}

Point2 center_of_mass(const BlurKernel& k) {
  double sx = 0.0, sy = 0.0, m = 0.0;
  for (int y = 0; y < k.size; ++y) {
    for (int x = 0; x < k.size; ++x) {
      const double v = k.at(x, y);
      sx += v * x;
      sy += v * y;
      m += v;
    }
  }
  return {sx / m, sy / m};
}

BlurKernel center_kernel(const BlurKernel& k) {
  const Point2 com = center_of_mass(k);
  const double c = 0.5 * (k.size - 1);
  const int dx = static_cast<int>(std::lround(c - com.x));
  const int dy = static_cast<int>(std::lround(c - com.y));
  if (dx == 0 && dy == 0) return k;
  std::vector<double> shifted(k.taps.size(), 0.0);
  for (int y = 0; y < k.size; ++y) {
    for (int x = 0; x < k.size; ++x) {
      const double v = k.at(x, y);
      if (v == 0.0) continue;
      const int nx = x + dx, ny = y + dy;
      if (nx < 0 || nx >= k.size || ny < 0 || ny >= k.size)
        throw std::runtime_error("kernel support cannot be centered inside the canvas");
      shifted[static_cast<std::size_t>(ny) * k.size + nx] = v;
    }
  }
  return BlurKernel(k.size, std::move(shifted));
}

BlurKernel kernel_from_control_points(const std::vector<Point2>& points, Rng& rng,
                                      const KernelSynthConfig& cfg) {
  cfg.validate();
  const int grid = grid_of(points, cfg);
  for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
    std::vector<double> taps = try_values(points, grid, rng, cfg);
    if (taps.empty()) continue;
    try {
      return center_kernel(BlurKernel(cfg.canvas, std::move(taps)));
    } catch (const std::runtime_error&) {
      // support fell off the canvas after centering; retry values
    }
  }
  throw std::runtime_error("kernel synthesis failed after bounded retries");
}

BlurKernel sample_kernel(Rng& rng, const KernelSynthConfig& cfg, int grid_size) {
  cfg.validate();
  if (std::find(cfg.grid_sizes.begin(), cfg.grid_sizes.end(), grid_size) == cfg.grid_sizes.end())
    throw std::invalid_argument("grid_size is not in the configured list");
  std::uniform_real_distribution<double> u(0.0, static_cast<double>(grid_size));
  for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
    std::vector<Point2> pts(cfg.control_points);
    for (Point2& p : pts) {
      p.x = u(rng);
      p.y = u(rng);
    }
    std::vector<double> taps = try_values(pts, grid_size, rng, cfg);
    if (taps.empty()) continue;
    try {
      return center_kernel(BlurKernel(cfg.canvas, std::move(taps)));
    } catch (const std::runtime_error&) {
      continue;
    }
  }
  throw std::runtime_error("kernel synthesis failed after bounded retries");
}

std::vector<BlurKernel> batch_kernels(std::uint64_t seed, const KernelSynthConfig& cfg, int n) {
  cfg.validate();
  const int groups = static_cast<int>(cfg.grid_sizes.size());
  if (n % groups != 0)
    throw std::invalid_argument("kernel count must be divisible by the number of grid sizes");
  std::vector<BlurKernel> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const int grid = cfg.grid_sizes[static_cast<std::size_t>(i) / (n / groups)];
    Rng rng = make_rng(seed, RngStream::kKernelSynth, static_cast<std::uint64_t>(i));
    out.push_back(sample_kernel(rng, cfg, grid));
  }
  return out;
}

}  // namespace ndeblur
