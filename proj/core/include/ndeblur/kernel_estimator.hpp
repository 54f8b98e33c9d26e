// ndeblur/kernel_estimator.hpp

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

#ifndef NDEBLUR_KERNEL_ESTIMATOR_HPP
#define NDEBLUR_KERNEL_ESTIMATOR_HPP

#include <vector>

#include "ndeblur/image.hpp"

namespace ndeblur {

// Global kernel estimation: fit k on a fixed 51x51 support so that
// k * (f_i * x_sharp) matches (f_i * y) over a bank of derivative filters,
// with an L1 penalty on k, solved by half-quadratic splitting with
// Fourier-domain quadratic steps. Only the sharp-side features are sparsified
// (strongest 2% per filter); the observed side stays intact.
struct EstimatorConfig {
  int support = 51;  // odd
  // relative to the data-term magnitude; log-spaced over [1e-4, 1e-1]
  std::vector<double> lambdas = {1e-4, 5.6234132519034907e-4, 3.1622776601683794e-3,
                                 1.7782794100389228e-2, 1e-1};
  double beta_min_factor = 1e-2;  // beta starts at this multiple of lambda
  double beta_max_factor = 1e2;
  double beta_growth = 2.0;
  int inner_iters = 1;  // k/g alternations per beta value
  double gradient_keep_fraction = 0.02;
  double cleanup_floor = 0.05;       // of the max tap
  double min_component_mass = 0.02;  // of total mass, 8-connected components
  int pad_margin = 32;

  void validate() const;
};

/// First and second Gaussian (sigma = 1) derivative filters steered to 8
/// orientations each; 16 zero-mean 7x7 filters.
struct FeatureBank {
  struct Filter {
    int size = 7;
    std::vector<double> taps;
  };
  std::vector<Filter> filters;
};

FeatureBank make_feature_bank();

/// Convolution (same-reflect) of an image with an arbitrary odd filter;
/// unlike BlurKernel filters these may be signed and zero-mean.
Image filter_same_reflect(const Image& x, const FeatureBank::Filter& f);

/// Per filter: convolve, then zero everything but the keep_fraction highest
/// magnitudes (ties broken by pixel index, so the kept count is exact).
std::vector<Image> threshold_features(const Image& x_sharp, const FeatureBank& bank,
                                      double keep_fraction);

/// Minimizes sum_i ||k * a_i - b_i||^2 + lambda * |k|_1 over the support via
/// HQS (quadratic Fourier step projected to the support, then shrinkage),
/// followed by positivity clipping, small/isolated tap cleanup, and unit-sum
/// normalization. lambda is absolute here. If trace is non-null it receives
/// (surrogate before, surrogate after) per outer iteration; the solver
/// guarantees the pairs are non-increasing.
BlurKernel solve_kernel_l1(const std::vector<Image>& a, const std::vector<Image>& b,
                           double lambda, const EstimatorConfig& cfg,
                           std::vector<std::pair<double, double>>* trace = nullptr);

/// Runs solve_kernel_l1 over the configured lambda grid (scaled by the data
/// term magnitude) and returns the candidate with the lowest unregularized
/// cost. Throws "insufficient texture" when the sharp features are all zero.
BlurKernel estimate_kernel(const Image& x_sharp, const Image& y, const EstimatorConfig& cfg);

}  // namespace ndeblur

#endif  // NDEBLUR_KERNEL_ESTIMATOR_HPP
