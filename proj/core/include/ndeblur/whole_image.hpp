// ndeblur/whole_image.hpp

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

#ifndef NDEBLUR_WHOLE_IMAGE_HPP
#define NDEBLUR_WHOLE_IMAGE_HPP

#include "ndeblur/network.hpp"

namespace ndeblur {

/// 2-D Hann weight for recomposition: outer product of a shifted raised
/// cosine of length 33 whose endpoints are positive, so every pixel of every
/// restored patch contributes.
double hann33(int i);

/// Restores an image by running the network on overlapping 65x65 patches at
/// the given stride (clamped anchors guarantee full coverage) and blending
/// the 33x33 outputs with Hann weights. The input is reflect-padded by 32px
/// so boundary pixels are covered; stride must be in [1, 16], and the input
/// at least 33x33.
Image restore_image(const Image& y, const NetworkWeights& w, int stride);

}  // namespace ndeblur

#endif  // NDEBLUR_WHOLE_IMAGE_HPP
