// ndeblur/band_encoder.hpp

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

#ifndef NDEBLUR_BAND_ENCODER_HPP
#define NDEBLUR_BAND_ENCODER_HPP

#include <Eigen/Dense>
#include <array>

#include "ndeblur/fourier.hpp"
#include "ndeblur/image.hpp"

namespace ndeblur {

// Multi-resolution frequency encoding of a 65x65 patch. Higher frequency
// octaves are sampled from smaller centered crops, so all three ring bands
// carry the same coefficient count:
//
//   low   : 65x65 DFT, max|z| <= 4        -> DC + 40 complex = 81 reals
//   band1 : 65x65 DFT, 4 < max|z| <= 8    -> 104 complex = 208 reals
//   band2 : 33x33 DFT, 4 < max|z| <= 8    -> 104 complex = 208 reals
//   high  : 17x17 DFT, 4 < max|z| <= 8    -> 104 complex = 208 reals
//
// Within each band, complex coefficients keep one representative per
// conjugate pair (canonical half plane, row-major) interleaved as (re, im).
// Total dimension 705, a deliberate reduction from the 4225 patch samples.
struct BandEncoding {
  Eigen::VectorXd low;    // 81
  Eigen::VectorXd band1;  // 208
  Eigen::VectorXd band2;  // 208
  Eigen::VectorXd high;   // 208

  static constexpr int kNumBands = 4;
  static constexpr int kLowDim = 81;
  static constexpr int kRingDim = 208;
  static constexpr int kTotalDim = kLowDim + 3 * kRingDim;  // 705

  const Eigen::VectorXd& band(int i) const;
  Eigen::VectorXd& band(int i);
  static int band_dim(int i) { return i == 0 ? kLowDim : kRingDim; }
};

constexpr int kPatchSize = 65;   // network input patch side
constexpr int kOutputSize = 33;  // restored central patch side

/// Per-band affine decorrelation: y = transform * (x - mean).
struct WhiteningTransform {
  struct BandAffine {
    Eigen::VectorXd mean;
    Eigen::MatrixXd transform;
  };
  std::array<BandAffine, BandEncoding::kNumBands> bands;

  static WhiteningTransform identity();
};

/// Encodes a 65x65 patch into the four bands. Linear in the patch.
BandEncoding encode_raw(const Image& patch);

/// Same, reusing an already computed 65-point spectrum of the patch (the
/// whole-image path needs that spectrum again for filtering).
BandEncoding encode_raw(const Image& patch, const Spectrum& full);

/// Fits per-band symmetric whitening (inverse square root of the empirical
/// covariance) with eigenvalue floor 1e-5 * trace/dim. Requires at least
/// 10 samples per band dimension.
WhiteningTransform fit_whitening(const std::vector<BandEncoding>& samples);

BandEncoding apply_whitening(const WhiteningTransform& t, const BandEncoding& e);

/// Inverse of apply_whitening (solves the per-band linear systems).
BandEncoding unapply_whitening(const WhiteningTransform& t, const BandEncoding& e);

/// Flattens bands in low..high order into one vector of kTotalDim entries.
Eigen::VectorXd flatten(const BandEncoding& e);

}  // namespace ndeblur

#endif  // NDEBLUR_BAND_ENCODER_HPP
