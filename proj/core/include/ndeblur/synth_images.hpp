// ndeblur/synth_images.hpp

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

#ifndef NDEBLUR_SYNTH_IMAGES_HPP
#define NDEBLUR_SYNTH_IMAGES_HPP

#include "ndeblur/image.hpp"
#include "ndeblur/rng.hpp"

namespace ndeblur {

// Occlusion ("dead leaves") scenes: opaque disks and rotated rectangles with
// a power-law size distribution, drawn back to front until the canvas is
// covered. The result has sharp edges at all orientations and roughly
// natural second-order statistics, which is what both the trainer and the
// kernel estimator need from a corpus when no photographs are available.
struct SynthImageConfig {
  double min_radius = 3.0;
  double max_radius_fraction = 0.4;  // of min(width, height)
  double size_power = 3.0;           // p(r) ~ r^-size_power
  double gradient_probability = 0.25;
  int max_shapes = 50000;
};

Image make_dead_leaves(Rng& rng, int width, int height,
                       const SynthImageConfig& cfg = SynthImageConfig());

}  // namespace ndeblur

#endif  // NDEBLUR_SYNTH_IMAGES_HPP
