// ndeblur/nonblind.hpp

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

#ifndef NDEBLUR_NONBLIND_HPP
#define NDEBLUR_NONBLIND_HPP

#include <vector>

#include "ndeblur/image.hpp"

namespace ndeblur {

enum class DeconvPrior {
  kL2,             // quadratic gradient prior; closed-form single solve
  kHyperLaplacian  // |grad|^(2/3), solved by HQS with a shrinkage prox
};

enum class DeconvBoundary {
  kReflect,   // reflect-pad, solve, crop back (default)
  kCircular,  // pure circular arithmetic; exact for periodic test inputs
};

struct NonblindConfig {
  DeconvPrior prior = DeconvPrior::kHyperLaplacian;
  DeconvBoundary boundary = DeconvBoundary::kReflect;
  double sigma = 0.01;        // noise level; data term is ||k*x - y||^2 / (2 sigma^2)
  double prior_weight = 3.0;  // weight on the gradient penalty
  int iters = 10;             // HQS outer iterations (hyper-Laplacian only)
  double beta0 = 1.0;
  double beta_growth = 2.0;
  double newton_tol = 1e-10;
  int pad_margin = 0;  // 0: auto (kernel size, at least 16)

  void validate() const;
};

/// Deconvolves y with a known kernel. The DC level of the output is pinned to
/// the input mean (unit-sum kernel, zero-mean gradient prior). If trace is
/// non-null it receives the HQS surrogate objective after each half step; the
/// values within one outer iteration are non-increasing.
Image deconvolve(const Image& y, const BlurKernel& k, const NonblindConfig& cfg,
                 std::vector<double>* trace = nullptr);

/// Scalar prox of t * |w|^(2/3): argmin_w 0.5 (w - v)^2 + t |w|^(2/3),
/// solved by Newton iterations on the bracketed stationary point. Exposed for
/// direct testing against grid search.
double shrink_hyperlaplacian(double v, double t, double tol = 1e-10);

}  // namespace ndeblur

#endif  // NDEBLUR_NONBLIND_HPP
