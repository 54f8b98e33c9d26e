// tests/test_band_encoder.cpp

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

#include <cmath>
#include <set>

#include "doctest.h"
#include "ndeblur/band_encoder.hpp"
#include "oracles.hpp"

using namespace ndeblur;

namespace {

// reference band extraction straight from a naive DFT of the right crop
Eigen::VectorXd oracle_ring(const Image& patch, int crop_size, int lo, int hi) {
  const int off = (patch.width - crop_size) / 2;
  const Spectrum s = testing::naive_dft2(crop(patch, off, off, crop_size, crop_size));
  std::vector<double> vals;
  for (const FreqIndex& z : band_indices(crop_size, lo, hi)) {
    if (!in_half_plane(z)) continue;
    vals.push_back(s.at(z.z1, z.z2).real());
    vals.push_back(s.at(z.z1, z.z2).imag());
  }
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

BandEncoding gaussian_encoding(Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, 1.0);
  BandEncoding e;
  for (int b = 0; b < BandEncoding::kNumBands; ++b) {
    e.band(b).resize(BandEncoding::band_dim(b));
    for (Eigen::Index i = 0; i < e.band(b).size(); ++i) e.band(b)[i] = scale * g(rng);
  }
  return e;
}

}  // namespace

TEST_CASE("encoding dimensions: 81 + 3 x 208 = 705") {
  Image patch(65, 65, 0.5);
  const BandEncoding e = encode_raw(patch);
  CHECK(e.low.size() == 81);
  CHECK(e.band1.size() == 208);
  CHECK(e.band2.size() == 208);
  CHECK(e.high.size() == 208);
  CHECK(flatten(e).size() == BandEncoding::kTotalDim);
  CHECK(BandEncoding::kTotalDim == 705);
}

TEST_CASE("constant patch: DC only, every ring empty") {
  const double c = 0.42;
  const BandEncoding e = encode_raw(Image(65, 65, c));
  CHECK(e.low[0] == doctest::Approx(4225.0 * c).epsilon(1e-12));
  for (Eigen::Index i = 1; i < e.low.size(); ++i) CHECK(std::abs(e.low[i]) < 1e-9);
  CHECK(e.band1.lpNorm<Eigen::Infinity>() < 1e-9);
  CHECK(e.band2.lpNorm<Eigen::Infinity>() < 1e-9);
  CHECK(e.high.lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("pure cosine at z=(6,0) lands in the full-size ring band") {
  Image patch(65, 65);
  for (int y = 0; y < 65; ++y)
    for (int x = 0; x < 65; ++x)
      patch.at(x, y) = std::cos(2.0 * 3.14159265358979323846 * 6.0 * y / 65.0);
  const BandEncoding e = encode_raw(patch);

  // the 65-grid ring holds the tone; the cropped-grid rings see only leakage,
  // and exactly the leakage the direct DFT of those crops predicts
  CHECK(e.band1.lpNorm<Eigen::Infinity>() > 2000.0);
  const Eigen::VectorXd b2_oracle = oracle_ring(patch, 33, 4, 8);
  const Eigen::VectorXd hi_oracle = oracle_ring(patch, 17, 4, 8);
  CHECK((e.band2 - b2_oracle).lpNorm<Eigen::Infinity>() < 1e-9);
  CHECK((e.high - hi_oracle).lpNorm<Eigen::Infinity>() < 1e-9);
  CHECK(e.band2.lpNorm<Eigen::Infinity>() < 0.1 * e.band1.lpNorm<Eigen::Infinity>());
  CHECK(e.high.lpNorm<Eigen::Infinity>() < 0.1 * e.band1.lpNorm<Eigen::Infinity>());
}

TEST_CASE("every retained coefficient equals the naive DFT of its crop") {
  Rng rng(31);
  const Image patch = testing::random_image(rng, 65, 65);
  const BandEncoding e = encode_raw(patch);

  CHECK((e.band1 - oracle_ring(patch, 65, 4, 8)).lpNorm<Eigen::Infinity>() < 1e-10);
  CHECK((e.band2 - oracle_ring(patch, 33, 4, 8)).lpNorm<Eigen::Infinity>() < 1e-10);
  CHECK((e.high - oracle_ring(patch, 17, 4, 8)).lpNorm<Eigen::Infinity>() < 1e-10);

  const Spectrum s = testing::naive_dft2(patch);
  CHECK(e.low[0] == doctest::Approx(s.at(0, 0).real()).epsilon(1e-10));
  int i = 1;
  for (const FreqIndex& z : band_indices(65, 0, 4)) {
    if (!in_half_plane(z)) continue;
    CHECK(std::abs(e.low[i] - s.at(z.z1, z.z2).real()) < 1e-9);
    CHECK(std::abs(e.low[i + 1] - s.at(z.z1, z.z2).imag()) < 1e-9);
    i += 2;
  }
}

TEST_CASE("encode_raw is linear in the patch") {
  Rng rng(32);
  const Image p1 = testing::random_image(rng, 65, 65);
  const Image p2 = testing::random_image(rng, 65, 65);
  Image mix(65, 65);
  for (std::size_t i = 0; i < mix.size(); ++i) mix.data[i] = 0.6 * p1.data[i] - 0.4 * p2.data[i];
  const Eigen::VectorXd lhs = flatten(encode_raw(mix));
  const Eigen::VectorXd rhs = 0.6 * flatten(encode_raw(p1)) - 0.4 * flatten(encode_raw(p2));
  CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("band supports are disjoint on the shared grid") {
  std::set<std::pair<int, int>> low_set, ring_set;
  for (const FreqIndex& z : band_indices(65, 0, 4)) low_set.insert({z.z1, z.z2});
  for (const FreqIndex& z : band_indices(65, 4, 8)) ring_set.insert({z.z1, z.z2});
  for (const auto& z : ring_set) CHECK(low_set.count(z) == 0);
  CHECK(low_set.size() + ring_set.size() == 81 + 208);
}

TEST_CASE("whitening rejects undersized sample sets") {
  Rng rng(33);
  std::vector<BandEncoding> samples;
  for (int i = 0; i < 100; ++i) samples.push_back(gaussian_encoding(rng));
  CHECK_THROWS_AS(fit_whitening(samples), std::invalid_argument);
}

TEST_CASE("whitening of identity-covariance samples is close to identity") {
  Rng rng(34);
  std::vector<BandEncoding> samples;
  const int n = 10 * BandEncoding::kRingDim;
  samples.reserve(n);
  for (int i = 0; i < n; ++i) samples.push_back(gaussian_encoding(rng));
  const WhiteningTransform t = fit_whitening(samples);

  for (int b = 0; b < BandEncoding::kNumBands; ++b) {
    const int d = BandEncoding::band_dim(b);
    CHECK(t.bands[b].mean.lpNorm<Eigen::Infinity>() < 0.15);
    const Eigen::MatrixXd dev = t.bands[b].transform - Eigen::MatrixXd::Identity(d, d);
    // sampling noise bound measured empirically: the Wishart edge at this
    // sample-to-dimension ratio keeps the operator-norm deviation below ~0.4
    CHECK(dev.operatorNorm() < 0.55);
  }

  // on the training samples themselves the whitened covariance is identity
  // up to the eigenvalue floor
  std::vector<BandEncoding> white(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) white[i] = apply_whitening(t, samples[i]);
  for (int b = 0; b < BandEncoding::kNumBands; ++b) {
    const int d = BandEncoding::band_dim(b);
    Eigen::MatrixXd data(d, static_cast<Eigen::Index>(white.size()));
    for (std::size_t i = 0; i < white.size(); ++i) data.col(static_cast<Eigen::Index>(i)) = white[i].band(b);
    const Eigen::VectorXd mean = data.rowwise().mean();
    data.colwise() -= mean;
    const Eigen::MatrixXd cov = data * data.transpose() / static_cast<double>(white.size() - 1);
    CHECK((cov - Eigen::MatrixXd::Identity(d, d)).lpNorm<Eigen::Infinity>() < 1e-6);
  }
}

TEST_CASE("whitening with known diagonal covariance lands near identity") {
  Rng rng(35);
  const int n = 10 * BandEncoding::kRingDim;
  std::vector<BandEncoding> samples;
  samples.reserve(n);
  for (int i = 0; i < n; ++i) {
    BandEncoding e = gaussian_encoding(rng);
    for (int b = 0; b < BandEncoding::kNumBands; ++b)
      for (Eigen::Index j = 0; j < e.band(b).size(); ++j)
        e.band(b)[j] *= (j % 2 == 0) ? 2.0 : 1.0;  // diag(4,1,4,1,...) covariance
    samples.push_back(std::move(e));
  }
  const WhiteningTransform t = fit_whitening(samples);

  Rng rng2(36);
  const int m = 4000;
  for (int b = 0; b < BandEncoding::kNumBands; ++b) {
    const int d = BandEncoding::band_dim(b);
    Eigen::MatrixXd data(d, m);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int i = 0; i < m; ++i) {
      Eigen::VectorXd x(d);
      for (int j = 0; j < d; ++j) x[j] = ((j % 2 == 0) ? 2.0 : 1.0) * g(rng2);
      data.col(i) = t.bands[b].transform * (x - t.bands[b].mean);
    }
    const Eigen::MatrixXd cov = data * data.transpose() / static_cast<double>(m - 1);
    // Monte-Carlo check: fresh samples whiten to within sampling noise
    double worst_diag = 0.0;
    for (int j = 0; j < d; ++j) worst_diag = std::max(worst_diag, std::abs(cov(j, j) - 1.0));
    CHECK(worst_diag < 0.75);
    CHECK(cov.diagonal().mean() == doctest::Approx(1.0).epsilon(0.15));
  }
}

TEST_CASE("degenerate samples: floor keeps the transform finite, outputs zero") {
  Rng rng(37);
  const BandEncoding proto = gaussian_encoding(rng);
  std::vector<BandEncoding> samples(10 * BandEncoding::kRingDim, proto);
  const WhiteningTransform t = fit_whitening(samples);
  for (int b = 0; b < BandEncoding::kNumBands; ++b)
    CHECK(t.bands[b].transform.allFinite());
  const BandEncoding w = apply_whitening(t, proto);
  for (int b = 0; b < BandEncoding::kNumBands; ++b)
    CHECK(w.band(b).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("identity and mean-only transforms act as documented") {
  Rng rng(38);
  const BandEncoding e = gaussian_encoding(rng);
  WhiteningTransform t = WhiteningTransform::identity();
  const BandEncoding same = apply_whitening(t, e);
  for (int b = 0; b < BandEncoding::kNumBands; ++b)
    CHECK((same.band(b) - e.band(b)).lpNorm<Eigen::Infinity>() == 0.0);

  for (int b = 0; b < BandEncoding::kNumBands; ++b)
    t.bands[b].mean = Eigen::VectorXd::Constant(BandEncoding::band_dim(b), 0.25);
  const BandEncoding shifted = apply_whitening(t, e);
  for (int b = 0; b < BandEncoding::kNumBands; ++b)
    CHECK((shifted.band(b) - (e.band(b).array() - 0.25).matrix()).lpNorm<Eigen::Infinity>() <
          1e-12);
}

TEST_CASE("whitening round trips through its inverse") {
  Rng rng(39);
  std::vector<BandEncoding> samples;
  for (int i = 0; i < 10 * BandEncoding::kRingDim; ++i) samples.push_back(gaussian_encoding(rng));
  const WhiteningTransform t = fit_whitening(samples);
  const BandEncoding e = gaussian_encoding(rng);
  const BandEncoding back = unapply_whitening(t, apply_whitening(t, e));
  for (int b = 0; b < BandEncoding::kNumBands; ++b)
    CHECK((back.band(b) - e.band(b)).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("apply_whitening rejects dimension mismatches") {
  WhiteningTransform t = WhiteningTransform::identity();
  BandEncoding e;
  e.low = Eigen::VectorXd::Zero(80);  // wrong
  e.band1 = Eigen::VectorXd::Zero(208);
  e.band2 = Eigen::VectorXd::Zero(208);
  e.high = Eigen::VectorXd::Zero(208);
  CHECK_THROWS_AS(apply_whitening(t, e), std::invalid_argument);
}
