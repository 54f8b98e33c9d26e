// core/src/band_encoder.cpp

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

#include "ndeblur/band_encoder.hpp"

#include <stdexcept>

namespace ndeblur {

namespace {

// One representative per conjugate pair of a ring band, interleaved (re, im).
Eigen::VectorXd ring_band(const Spectrum& s, int lo, int hi) {
  Eigen::VectorXd out(BandEncoding::kRingDim);
  int i = 0;
  for (const FreqIndex& z : band_indices(s.size, lo, hi)) {
    if (!in_half_plane(z)) continue;
    const Complex c = s.at(z.z1, z.z2);
    out[i++] = c.real();
    out[i++] = c.imag();
  }
  if (i != out.size()) throw std::logic_error("ring band coefficient count mismatch");
  return out;
}

Eigen::VectorXd low_band(const Spectrum& s) {
  Eigen::VectorXd out(BandEncoding::kLowDim);
  out[0] = s.at(0, 0).real();  // DC first
  int i = 1;
  for (const FreqIndex& z : band_indices(s.size, 0, 4)) {
    if (!in_half_plane(z)) continue;
    const Complex c = s.at(z.z1, z.z2);
    out[i++] = c.real();
    out[i++] = c.imag();
  }
  if (i != out.size()) throw std::logic_error("low band coefficient count mismatch");
  return out;
}

}  // namespace

const Eigen::VectorXd& BandEncoding::band(int i) const {
  switch (i) {
    case 0: return low;
    case 1: return band1;
    case 2: return band2;
    case 3: return high;
    default: throw std::out_of_range("band index");
  }
}

Eigen::VectorXd& BandEncoding::band(int i) {
  return const_cast<Eigen::VectorXd&>(static_cast<const BandEncoding*>(this)->band(i));
}

WhiteningTransform WhiteningTransform::identity() {
  WhiteningTransform t;
  for (int b = 0; b < BandEncoding::kNumBands; ++b) {
    const int d = BandEncoding::band_dim(b);
    t.bands[b].mean = Eigen::VectorXd::Zero(d);
    t.bands[b].transform = Eigen::MatrixXd::Identity(d, d);
  }
  return t;
}

BandEncoding encode_raw(const Image& patch, const Spectrum& full) {
  if (patch.width != kPatchSize || patch.height != kPatchSize)
    throw std::invalid_argument("encode_raw: patch must be 65x65");
  if (full.size != kPatchSize)
    throw std::invalid_argument("encode_raw: spectrum size mismatch");

  BandEncoding e;
  e.low = low_band(full);
  e.band1 = ring_band(full, 4, 8);
  e.band2 = ring_band(dft2(crop(patch, 16, 16, 33, 33)), 4, 8);
  e.high = ring_band(dft2(crop(patch, 24, 24, 17, 17)), 4, 8);
  return e;
}

BandEncoding encode_raw(const Image& patch) { return encode_raw(patch, dft2(patch)); }

WhiteningTransform fit_whitening(const std::vector<BandEncoding>& samples) {
  const auto n = static_cast<Eigen::Index>(samples.size());
  for (int b = 0; b < BandEncoding::kNumBands; ++b)
    if (n < 10 * BandEncoding::band_dim(b))
      throw std::invalid_argument("fit_whitening: need at least 10 samples per dimension");

  WhiteningTransform t;
  for (int b = 0; b < BandEncoding::kNumBands; ++b) {
    const int d = BandEncoding::band_dim(b);
    Eigen::MatrixXd data(d, n);
    for (Eigen::Index i = 0; i < n; ++i) data.col(i) = samples[i].band(b);

    const Eigen::VectorXd mean = data.rowwise().mean();
    data.colwise() -= mean;
    const Eigen::MatrixXd cov =
        (data * data.transpose()) / static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success)
      throw std::runtime_error("fit_whitening: eigendecomposition failed");
    // Eigenvalue floor keeps the inverse square root finite for rank-
    // deficient sample covariances (constant bands, tiny corpora).
    const double floor =
        std::max(1e-5 * cov.trace() / static_cast<double>(d), 1e-30);
    Eigen::VectorXd inv_sqrt = eig.eigenvalues();
    for (int i = 0; i < d; ++i)
      inv_sqrt[i] = 1.0 / std::sqrt(std::max(inv_sqrt[i], floor));

    t.bands[b].mean = mean;
    t.bands[b].transform =
        eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();
  }
  return t;
}

BandEncoding apply_whitening(const WhiteningTransform& t, const BandEncoding& e) {
  BandEncoding out;
  for (int b = 0; b < BandEncoding::kNumBands; ++b) {
    const auto& band = t.bands[b];
    if (band.mean.size() != e.band(b).size())
      throw std::invalid_argument("apply_whitening: dimension mismatch");
    out.band(b) = band.transform * (e.band(b) - band.mean);
  }
  return out;
}

BandEncoding unapply_whitening(const WhiteningTransform& t, const BandEncoding& e) {
  BandEncoding out;
  for (int b = 0; b < BandEncoding::kNumBands; ++b) {
    const auto& band = t.bands[b];
    if (band.mean.size() != e.band(b).size())
      throw std::invalid_argument("unapply_whitening: dimension mismatch");
    out.band(b) = band.transform.partialPivLu().solve(e.band(b)) + band.mean;
  }
  return out;
}

Eigen::VectorXd flatten(const BandEncoding& e) {
  Eigen::VectorXd out(BandEncoding::kTotalDim);
  int off = 0;
  for (int b = 0; b < BandEncoding::kNumBands; ++b) {
    out.segment(off, e.band(b).size()) = e.band(b);
    off += static_cast<int>(e.band(b).size());
  }
  return out;
}

}  // namespace ndeblur
