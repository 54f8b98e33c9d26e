// core/src/kernel_estimator.cpp

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

#include "ndeblur/kernel_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ndeblur/fourier.hpp"
#include "ndeblur/threading.hpp"

namespace ndeblur {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Shared Fourier-domain quantities for one (a_i, b_i) problem instance; all
// lambda solves reuse them.
struct SolveContext {
  int width = 0, height = 0;      // embedded grid
  std::vector<double> m;          // sum_i |A_i|^2
  ComplexGrid r;                  // sum_i conj(A_i) B_i
  double bb = 0.0;                // sum_i ||b_i||^2 (spatial)
  int support = 0;

  std::size_t n() const { return static_cast<std::size_t>(width) * height; }
};

ComplexGrid embed(const Image& img, int we, int he) {
  Image grid(we, he, 0.0);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) grid.at(x, y) = img.at(x, y);
  return fft2(grid);
}

SolveContext build_context(const std::vector<Image>& a, const std::vector<Image>& b,
                           const EstimatorConfig& cfg) {
  if (a.empty() || a.size() != b.size())
    throw std::invalid_argument("kernel solve: feature lists are empty or mismatched");
  const int w = a[0].width, h = a[0].height;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].width != w || a[i].height != h || b[i].width != w || b[i].height != h)
      throw std::invalid_argument("kernel solve: feature image sizes differ");

  SolveContext ctx;
  ctx.width = w + 2 * cfg.pad_margin;
  ctx.height = h + 2 * cfg.pad_margin;
  ctx.support = cfg.support;
  ctx.m.assign(ctx.n(), 0.0);
  ctx.r.assign(ctx.n(), Complex(0.0, 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    const ComplexGrid ai = embed(a[i], ctx.width, ctx.height);
    const ComplexGrid bi = embed(b[i], ctx.width, ctx.height);
    for (std::size_t z = 0; z < ctx.n(); ++z) {
      ctx.m[z] += std::norm(ai[z]);
      ctx.r[z] += std::conj(ai[z]) * bi[z];
    }
    for (double v : b[i].data) ctx.bb += v * v;
  }
  return ctx;
}

// Support window <-> wrap-around layout. Support coordinates are canvas
// coordinates with the canvas center at the spatial origin of the grid.
std::vector<double> extract_support(const std::vector<double>& grid, const SolveContext& ctx) {
  const int s = ctx.support, c = s / 2;
  std::vector<double> out(static_cast<std::size_t>(s) * s, 0.0);
  auto wrapx = [&](int v) { return ((v % ctx.width) + ctx.width) % ctx.width; };
  auto wrapy = [&](int v) { return ((v % ctx.height) + ctx.height) % ctx.height; };
  for (int y = 0; y < s; ++y)
    for (int x = 0; x < s; ++x)
      out[static_cast<std::size_t>(y) * s + x] =
          grid[static_cast<std::size_t>(wrapy(y - c)) * ctx.width + wrapx(x - c)];
  return out;
}

ComplexGrid support_fft(const std::vector<double>& k, const SolveContext& ctx) {
  const int s = ctx.support, c = s / 2;
  Image grid(ctx.width, ctx.height, 0.0);
  auto wrapx = [&](int v) { return ((v % ctx.width) + ctx.width) % ctx.width; };
  auto wrapy = [&](int v) { return ((v % ctx.height) + ctx.height) % ctx.height; };
  for (int y = 0; y < s; ++y)
    for (int x = 0; x < s; ++x)
      grid.at(wrapx(x - c), wrapy(y - c)) = k[static_cast<std::size_t>(y) * s + x];
  return fft2(grid);
}

// Data term sum_i ||k*a_i - b_i||^2 evaluated spectrally (Parseval).
double data_term(const ComplexGrid& kf, const SolveContext& ctx) {
  double acc = 0.0;
  for (std::size_t z = 0; z < ctx.n(); ++z)
    acc += std::norm(kf[z]) * ctx.m[z] - 2.0 * (std::conj(kf[z]) * ctx.r[z]).real();
  return acc / static_cast<double>(ctx.n()) + ctx.bb;
}

double l1_norm(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += std::abs(x);
  return acc;
}

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

// HQS core on the support. Returns raw (pre-cleanup) taps.
std::vector<double> hqs_solve(const SolveContext& ctx, double lambda, const EstimatorConfig& cfg,
                              std::vector<std::pair<double, double>>* trace) {
  const std::size_t sn = static_cast<std::size_t>(ctx.support) * ctx.support;
  std::vector<double> k(sn, 0.0), g(sn, 0.0);
  double k_data = ctx.bb;  // data term of k = 0

  auto surrogate = [&](double data, const std::vector<double>& kk, const std::vector<double>& gg,
                       double beta) {
    return data + lambda * l1_norm(gg) + beta * sq_dist(kk, gg);
  };

  for (double beta = cfg.beta_min_factor * lambda;
       beta <= cfg.beta_max_factor * lambda * (1.0 + 1e-12); beta *= cfg.beta_growth) {
    for (int inner = 0; inner < cfg.inner_iters; ++inner) {
      const double before = surrogate(k_data, k, g, beta);

      // quadratic step: unconstrained circular minimizer, then projection
      // onto the support. Projection can lose ground, so keep the previous
      // iterate whenever it scores better.
      const ComplexGrid gf = support_fft(g, ctx);
      ComplexGrid kf(ctx.n());
      for (std::size_t z = 0; z < ctx.n(); ++z)
        kf[z] = (ctx.r[z] + beta * gf[z]) / (ctx.m[z] + beta);
      const ComplexGrid ks = ifft2(kf, ctx.width, ctx.height);
      std::vector<double> ks_real(ctx.n());
      for (std::size_t i = 0; i < ctx.n(); ++i) ks_real[i] = ks[i].real();
      std::vector<double> k_new = extract_support(ks_real, ctx);
      const double k_new_data = data_term(support_fft(k_new, ctx), ctx);
      if (k_new_data + beta * sq_dist(k_new, g) <= k_data + beta * sq_dist(k, g)) {
        k = std::move(k_new);
        k_data = k_new_data;
      }

      // shrinkage step, exact
      const double thresh = lambda / (2.0 * beta);
      for (std::size_t i = 0; i < sn; ++i) {
        const double v = k[i];
        g[i] = v > thresh ? v - thresh : (v < -thresh ? v + thresh : 0.0);
      }

      const double after = surrogate(k_data, k, g, beta);
      if (trace) trace->emplace_back(before, after);
      if (after > before + 1e-9 * std::abs(before) + 1e-12)
        throw std::logic_error("HQS surrogate increased within an iteration");
    }
  }
  return k;
}

void cleanup_taps(std::vector<double>& taps, int s, const EstimatorConfig& cfg) {
  const double peak = *std::max_element(taps.begin(), taps.end());
  for (double& v : taps)
    if (v < cfg.cleanup_floor * peak) v = 0.0;

  // drop 8-connected components carrying less than min_component_mass of the
  // total
  const double total = std::accumulate(taps.begin(), taps.end(), 0.0);
  std::vector<int> label(taps.size(), -1);
  std::vector<double> mass;
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < taps.size(); ++i) {
    if (taps[i] <= 0.0 || label[i] >= 0) continue;
    const int id = static_cast<int>(mass.size());
    mass.push_back(0.0);
    stack.assign(1, i);
    label[i] = id;
    while (!stack.empty()) {
      const std::size_t j = stack.back();
      stack.pop_back();
      mass[id] += taps[j];
      const int x = static_cast<int>(j % s), y = static_cast<int>(j / s);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= s || ny >= s) continue;
          const std::size_t nj = static_cast<std::size_t>(ny) * s + nx;
          if (taps[nj] > 0.0 && label[nj] < 0) {
            label[nj] = id;
            stack.push_back(nj);
          }
        }
      }
    }
  }
  for (std::size_t i = 0; i < taps.size(); ++i)
    if (label[i] >= 0 && mass[label[i]] < cfg.min_component_mass * total) taps[i] = 0.0;
}

BlurKernel finalize_kernel(std::vector<double> taps, const SolveContext& ctx,
                           const EstimatorConfig& cfg) {
  for (double& v : taps) v = std::max(v, 0.0);
  const std::size_t peak =
      std::max_element(taps.begin(), taps.end()) - taps.begin();
  const bool had_mass = taps[peak] > 0.0;
  cleanup_taps(taps, ctx.support, cfg);
  double total = std::accumulate(taps.begin(), taps.end(), 0.0);
  if (total <= 0.0) {
    // regularization annihilated everything; keep the strongest clipped tap
    // (or a centered delta if there never was one) so the result is a kernel
    taps.assign(taps.size(), 0.0);
    taps[had_mass ? peak : taps.size() / 2] = 1.0;
    total = 1.0;
  }
  for (double& v : taps) v /= total;
  return BlurKernel(ctx.support, std::move(taps));
}

}  // namespace

void EstimatorConfig::validate() const {
  if (support < 3 || support % 2 == 0) throw std::invalid_argument("support must be odd and >= 3");
  if (lambdas.empty()) throw std::invalid_argument("no lambdas configured");
  double prev = 0.0;
  for (double l : lambdas) {
    if (l <= prev) throw std::invalid_argument("lambdas must be positive ascending");
    prev = l;
  }
  if (beta_min_factor <= 0.0 || beta_max_factor < beta_min_factor || beta_growth <= 1.0)
    throw std::invalid_argument("bad beta schedule");
  if (gradient_keep_fraction <= 0.0 || gradient_keep_fraction > 1.0)
    throw std::invalid_argument("keep fraction must be in (0, 1]");
  if (inner_iters < 1) throw std::invalid_argument("inner_iters must be >= 1");
  if (pad_margin < 0) throw std::invalid_argument("negative pad margin");
}

FeatureBank make_feature_bank() {
  FeatureBank bank;
  const int s = 7, c = 3;
  for (int order = 1; order <= 2; ++order) {
    for (int o = 0; o < 8; ++o) {
      const double th = o * kPi / 8.0;
      const double ct = std::cos(th), st = std::sin(th);
      FeatureBank::Filter f;
      f.size = s;
      f.taps.resize(static_cast<std::size_t>(s) * s);
      double sum = 0.0;
      for (int y = 0; y < s; ++y) {
        for (int x = 0; x < s; ++x) {
          const double dx = x - c, dy = y - c;
          const double g = std::exp(-(dx * dx + dy * dy) / 2.0);
          double v;
          if (order == 1) {
            // steered first derivative: cos t * Gx + sin t * Gy
            v = -(ct * dx + st * dy) * g;
          } else {
            // steered second derivative: cc*Gxx + 2cs*Gxy + ss*Gyy
            const double gxx = (dx * dx - 1.0) * g;
            const double gyy = (dy * dy - 1.0) * g;
            const double gxy = dx * dy * g;
            v = ct * ct * gxx + 2.0 * ct * st * gxy + st * st * gyy;
          }
          f.taps[static_cast<std::size_t>(y) * s + x] = v;
          sum += v;
        }
      }
      const double dc = sum / (s * s);
      for (double& v : f.taps) v -= dc;  // exact zero mean
      bank.filters.push_back(std::move(f));
    }
  }
  return bank;
}

Image filter_same_reflect(const Image& x, const FeatureBank::Filter& f) {
  const int s = f.size, c = s / 2;
  const Image p = reflect_pad(x, c);
  Image out(x.width, x.height);
  for (int oy = 0; oy < x.height; ++oy) {
    for (int ox = 0; ox < x.width; ++ox) {
      double acc = 0.0;
      for (int ky = 0; ky < s; ++ky) {
        const double* row = &p.data[static_cast<std::size_t>(oy + s - 1 - ky) * p.width + ox];
        const double* taps = &f.taps[static_cast<std::size_t>(ky) * s];
        for (int kx = 0; kx < s; ++kx) acc += taps[kx] * row[s - 1 - kx];
      }
      out.at(ox, oy) = acc;
    }
  }
  return out;
}

std::vector<Image> threshold_features(const Image& x_sharp, const FeatureBank& bank,
                                      double keep_fraction) {
  std::vector<Image> out(bank.filters.size());
  parallel_chunks(bank.filters.size(), [&](int, std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      Image f = filter_same_reflect(x_sharp, bank.filters[i]);
      const std::size_t n = f.size();
      const std::size_t keep = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::llround(keep_fraction * static_cast<double>(n))));
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), 0);
      auto better = [&](std::size_t p, std::size_t q) {
        const double ap = std::abs(f.data[p]), aq = std::abs(f.data[q]);
        return ap > aq || (ap == aq && p < q);
      };
      std::nth_element(order.begin(), order.begin() + (keep - 1), order.end(), better);
      const std::size_t cut = order[keep - 1];
      Image masked(f.width, f.height, 0.0);
      for (std::size_t j = 0; j < n; ++j)
        if (better(j, cut) || j == cut) masked.data[j] = f.data[j];
      out[i] = std::move(masked);
    }
  });
  return out;
}

BlurKernel solve_kernel_l1(const std::vector<Image>& a, const std::vector<Image>& b,
                           double lambda, const EstimatorConfig& cfg,
                           std::vector<std::pair<double, double>>* trace) {
  cfg.validate();
  if (lambda <= 0.0) throw std::invalid_argument("lambda must be positive");
  const SolveContext ctx = build_context(a, b, cfg);
  if (*std::max_element(ctx.m.begin(), ctx.m.end()) <= 0.0)
    throw std::runtime_error("insufficient texture for kernel estimation");
  return finalize_kernel(hqs_solve(ctx, lambda, cfg, trace), ctx, cfg);
}

BlurKernel estimate_kernel(const Image& x_sharp, const Image& y, const EstimatorConfig& cfg) {
  cfg.validate();
  if (x_sharp.width != y.width || x_sharp.height != y.height)
    throw std::invalid_argument("estimate_kernel: image sizes differ");

  const FeatureBank bank = make_feature_bank();
  const std::vector<Image> a = threshold_features(x_sharp, bank, cfg.gradient_keep_fraction);
  std::vector<Image> b(bank.filters.size());
  parallel_chunks(b.size(), [&](int, std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) b[i] = filter_same_reflect(y, bank.filters[i]);
  });

  const SolveContext ctx = build_context(a, b, cfg);
  if (*std::max_element(ctx.m.begin(), ctx.m.end()) <= 0.0)
    throw std::runtime_error("insufficient texture for kernel estimation");

  const double scale = ctx.bb;  // data-term magnitude; lambdas are relative
  if (scale <= 0.0) throw std::runtime_error("insufficient texture for kernel estimation");

  std::vector<BlurKernel> candidates(cfg.lambdas.size());
  std::vector<double> costs(cfg.lambdas.size());
  parallel_chunks(cfg.lambdas.size(), [&](int, std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      candidates[i] = finalize_kernel(hqs_solve(ctx, cfg.lambdas[i] * scale, cfg, nullptr), ctx, cfg);
      costs[i] = data_term(support_fft(candidates[i].taps, ctx), ctx);
    }
  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < costs.size(); ++i)
    if (costs[i] < costs[best]) best = i;
  return candidates[best];
}

}  // namespace ndeblur
