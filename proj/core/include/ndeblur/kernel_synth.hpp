// ndeblur/kernel_synth.hpp

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

#ifndef NDEBLUR_KERNEL_SYNTH_HPP
#define NDEBLUR_KERNEL_SYNTH_HPP

#include <cstdint>
#include <vector>

#include "ndeblur/image.hpp"
#include "ndeblur/rng.hpp"

namespace ndeblur {

// Random motion blur kernels: a Catmull-Rom spline through six uniform
// control points in a small grid, rasterized onto an odd canvas, per-pixel
// values drawn from N(1, 0.5), clipped, normalized, and recentered so the
// value-weighted center of mass sits on the canvas center (nearest integer
// shift, so the residual offset is at most half a pixel per axis).
struct KernelSynthConfig {
  std::vector<int> grid_sizes = {8, 16, 24};
  int control_points = 6;
  double value_mean = 1.0;
  double value_std = 0.5;
  int canvas = 25;      // odd; 51 for evaluation-sized kernels
  int max_retries = 64;

  void validate() const;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Draws one kernel with control points sampled uniformly in [0, grid_size)^2.
/// Degenerate draws (zero mass after clipping, or support that cannot be
/// centered inside the canvas) are resampled; throws after max_retries.
BlurKernel sample_kernel(Rng& rng, const KernelSynthConfig& cfg, int grid_size);

/// Rasterizes a kernel through fixed control points; only the per-pixel
/// values come from rng. Zero-mass draws retry the values.
BlurKernel kernel_from_control_points(const std::vector<Point2>& points, Rng& rng,
                                      const KernelSynthConfig& cfg);

/// n kernels, n divisible by the number of grid sizes, equally many per grid
/// size. Each kernel derives its own rng stream from (seed, index), so the
/// batch is reproducible and independent of worker scheduling.
std::vector<BlurKernel> batch_kernels(std::uint64_t seed, const KernelSynthConfig& cfg, int n);

/// Integer-shifts taps so the center of mass lands on the canvas center.
/// Throws if nonzero taps would leave the canvas.
BlurKernel center_kernel(const BlurKernel& k);

/// Value-weighted center of mass in canvas coordinates.
Point2 center_of_mass(const BlurKernel& k);

}  // namespace ndeblur

#endif  // NDEBLUR_KERNEL_SYNTH_HPP
