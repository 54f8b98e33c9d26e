// core/src/nonblind.cpp

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

#include "ndeblur/nonblind.hpp"

#include <cmath>
#include <stdexcept>

#include "ndeblur/fourier.hpp"

namespace ndeblur {

namespace {

// forward differences as true convolutions: (d * x)[n] = x[n] - x[n - e_d]
ComplexGrid diff_transfer(int width, int height, bool horizontal) {
  Image t(width, height, 0.0);
  t.at(0, 0) = 1.0;
  if (horizontal)
    t.at(1 % width, 0) -= 1.0;
  else
    t.at(0, 1 % height) -= 1.0;
  return fft2(t);
}

std::vector<double> spatial_real(const ComplexGrid& g) {
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[i].real();
  return out;
}

struct Problem {
  int w = 0, h = 0;
  ComplexGrid yf, kf, d1, d2;
  std::vector<double> y;  // padded observation (spatial)
  double inv_s2 = 0.0;    // 1 / sigma^2
  double gamma = 0.0;

  std::size_t n() const { return static_cast<std::size_t>(w) * h; }

  // x from the quadratic subproblem given (beta, w1f, w2f); beta = 0 with
  // gamma-weighted quadratic gradients gives the l2 closed form.
  ComplexGrid solve_x(double beta, const ComplexGrid* w1f, const ComplexGrid* w2f,
                      double quad_grad_weight) const {
    ComplexGrid xf(n());
    for (std::size_t z = 0; z < n(); ++z) {
      const double dd = std::norm(d1[z]) + std::norm(d2[z]);
      Complex num = std::conj(kf[z]) * yf[z] * inv_s2;
      double den = std::norm(kf[z]) * inv_s2 + quad_grad_weight * dd + beta * dd;
      if (w1f && w2f) num += beta * (std::conj(d1[z]) * (*w1f)[z] + std::conj(d2[z]) * (*w2f)[z]);
      if (den == 0.0) den = 1e-300;  // only reachable with degenerate configs
      xf[z] = num / den;
    }
    return xf;
  }

  double data_term(const ComplexGrid& xf) const {
    double acc = 0.0;
    for (std::size_t z = 0; z < n(); ++z) acc += std::norm(kf[z] * xf[z] - yf[z]);
    return acc / static_cast<double>(n()) * 0.5 * inv_s2;
  }
};

double hyper_penalty(const std::vector<double>& w1, const std::vector<double>& w2) {
  double acc = 0.0;
  for (double v : w1) acc += std::cbrt(v * v);  // |v|^(2/3)
  for (double v : w2) acc += std::cbrt(v * v);
  return acc;
}

double coupling(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace

void NonblindConfig::validate() const {
  if (sigma <= 0.0) throw std::invalid_argument("deconvolve: sigma must be positive");
  if (prior_weight < 0.0) throw std::invalid_argument("deconvolve: negative prior weight");
  if (iters < 1) throw std::invalid_argument("deconvolve: iters must be >= 1");
  if (beta0 <= 0.0 || beta_growth <= 1.0) throw std::invalid_argument("deconvolve: bad beta schedule");
}

double shrink_hyperlaplacian(double v, double t, double tol) {
  if (t < 0.0) throw std::invalid_argument("shrink: negative weight");
  if (t == 0.0 || v == 0.0) return v;
  const double a = std::abs(v);
  // stationary condition on w > 0:  g(w) = w - a + (2t/3) w^(-1/3) = 0.
  // g is convex with minimum at w* = (2t/9)^(3/4); no root means w = 0.
  const double wstar = std::pow(2.0 * t / 9.0, 0.75);
  auto g = [&](double w) { return w - a + (2.0 * t / 3.0) * std::pow(w, -1.0 / 3.0); };
  if (g(wstar) >= 0.0) return 0.0;
  // Newton from w = a: g(a) > 0 and convexity keep iterates bracketed in
  // [w*, a], decreasing monotonically to the larger root.
  double w = a;
  for (int it = 0; it < 100; ++it) {
    const double gw = g(w);
    const double dg = 1.0 - (2.0 * t / 9.0) * std::pow(w, -4.0 / 3.0);
    const double step = gw / dg;
    w -= step;
    if (w < wstar) w = wstar;  // numeric safety; bracket is [w*, a]
    if (std::abs(step) < tol) break;
  }
  // the root is a local minimum; keep it only if it beats w = 0
  const double h_root = 0.5 * (w - a) * (w - a) + t * std::cbrt(w * w);
  const double h_zero = 0.5 * a * a;
  if (h_root >= h_zero) return 0.0;
  return v > 0.0 ? w : -w;
}

Image deconvolve(const Image& y, const BlurKernel& k, const NonblindConfig& cfg,
                 std::vector<double>* trace) {
  cfg.validate();
  for (double v : y.data)
    if (!std::isfinite(v)) throw std::invalid_argument("deconvolve: non-finite input");

  const bool reflect = cfg.boundary == DeconvBoundary::kReflect;
  const int margin = reflect ? (cfg.pad_margin > 0 ? cfg.pad_margin
                                                   : std::max(16, k.size))
                             : 0;
  if (reflect && (margin > y.width || margin > y.height))
    throw std::invalid_argument("deconvolve: image too small for boundary padding");
  const Image ypad = reflect ? reflect_pad(y, margin) : y;

  Problem p;
  p.w = ypad.width;
  p.h = ypad.height;
  p.y = ypad.data;
  p.yf = fft2(ypad);
  p.kf = kernel_transfer(k, p.w, p.h);
  p.d1 = diff_transfer(p.w, p.h, true);
  p.d2 = diff_transfer(p.w, p.h, false);
  p.inv_s2 = 1.0 / (cfg.sigma * cfg.sigma);
  p.gamma = cfg.prior_weight;

  ComplexGrid xf;
  if (cfg.prior == DeconvPrior::kL2) {
    xf = p.solve_x(0.0, nullptr, nullptr, p.gamma);
  } else {
    // HQS with auxiliary gradients w = grad x; both half steps are exact
    // minimizers of the surrogate at fixed beta
    std::vector<double> x = p.y;
    xf = fft2(ypad);
    double beta = cfg.beta0;
    for (int it = 0; it < cfg.iters; ++it, beta *= cfg.beta_growth) {
      // w-step: per-pixel prox at the current gradients
      ComplexGrid g1f(p.n()), g2f(p.n());
      for (std::size_t z = 0; z < p.n(); ++z) {
        g1f[z] = p.d1[z] * xf[z];
        g2f[z] = p.d2[z] * xf[z];
      }
      std::vector<double> v1 = spatial_real(ifft2(g1f, p.w, p.h));
      std::vector<double> v2 = spatial_real(ifft2(g2f, p.w, p.h));
      std::vector<double> w1(p.n()), w2(p.n());
      const double t = p.gamma / beta;
      for (std::size_t i = 0; i < p.n(); ++i) {
        w1[i] = shrink_hyperlaplacian(v1[i], t, cfg.newton_tol);
        w2[i] = shrink_hyperlaplacian(v2[i], t, cfg.newton_tol);
      }
      if (trace)
        trace->push_back(p.data_term(xf) + p.gamma * hyper_penalty(w1, w2) +
                         0.5 * beta * (coupling(v1, w1) + coupling(v2, w2)));

      // x-step
      ComplexGrid w1f(p.n()), w2f(p.n());
      for (std::size_t i = 0; i < p.n(); ++i) {
        w1f[i] = Complex(w1[i], 0.0);
        w2f[i] = Complex(w2[i], 0.0);
      }
      w1f = fft2(w1f, p.w, p.h);
      w2f = fft2(w2f, p.w, p.h);
      xf = p.solve_x(beta, &w1f, &w2f, 0.0);
      if (trace) {
        ComplexGrid n1(p.n()), n2(p.n());
        for (std::size_t z = 0; z < p.n(); ++z) {
          n1[z] = p.d1[z] * xf[z];
          n2[z] = p.d2[z] * xf[z];
        }
        trace->push_back(p.data_term(xf) + p.gamma * hyper_penalty(w1, w2) +
                         0.5 * beta *
                             (coupling(spatial_real(ifft2(n1, p.w, p.h)), w1) +
                              coupling(spatial_real(ifft2(n2, p.w, p.h)), w2)));
      }
    }
  }

  const std::vector<double> xs = spatial_real(ifft2(xf, p.w, p.h));
  Image out(y.width, y.height);
  for (int yy = 0; yy < y.height; ++yy)
    for (int xx = 0; xx < y.width; ++xx)
      out.at(xx, yy) = xs[static_cast<std::size_t>(yy + margin) * p.w + (xx + margin)];

  // DC pin: boundary cropping may nudge the mean; the model preserves it
  const double shift = mean_intensity(y) - mean_intensity(out);
  for (double& v : out.data) v += shift;
  return out;
}

}  // namespace ndeblur
