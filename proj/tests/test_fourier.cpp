// tests/test_fourier.cpp

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

#include "doctest.h"
#include "ndeblur/fourier.hpp"
#include "oracles.hpp"

using namespace ndeblur;

namespace {

double spectrum_max_diff(const Spectrum& a, const Spectrum& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.coeffs.size(); ++i)
    m = std::max(m, std::abs(a.coeffs[i] - b.coeffs[i]));
  return m;
}

}  // namespace

TEST_CASE("dft2: centered impulse has unit magnitude everywhere") {
  Image x(9, 9, 0.0);
  x.at(4, 4) = 1.0;
  const Spectrum s = dft2(x);
  for (const Complex& c : s.coeffs) CHECK(std::abs(c) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("dft2: constant patch concentrates everything at DC") {
  const double c = 0.31;
  Image x(5, 5, c);
  const Spectrum s = dft2(x);
  CHECK(s.at(0, 0).real() == doctest::Approx(25.0 * c).epsilon(1e-12));
  for (int z1 = -2; z1 <= 2; ++z1)
    for (int z2 = -2; z2 <= 2; ++z2)
      if (z1 || z2) CHECK(std::abs(s.at(z1, z2)) < 1e-12);
}

TEST_CASE("dft2 matches the direct-summation oracle at 1e-10") {
  Rng rng(21);
  for (int n : {7, 9, 17}) {
    const Image x = testing::random_image(rng, n, n);
    CHECK(spectrum_max_diff(dft2(x), testing::naive_dft2(x)) < 1e-10);
  }
}

TEST_CASE("dft2 rejects even sizes; round trip is 1e-10 exact") {
  CHECK_THROWS_AS(dft2(Image(8, 8, 0.0)), std::invalid_argument);
  Rng rng(22);
  const Image x = testing::random_image(rng, 33, 33);
  CHECK(testing::max_abs_diff(idft2(dft2(x)), x) < 1e-10);
}

TEST_CASE("Parseval holds to 1e-8 relative") {
  Rng rng(23);
  const Image x = testing::random_image(rng, 17, 17);
  const Spectrum s = dft2(x);
  double spatial = 0.0, spectral = 0.0;
  for (double v : x.data) spatial += v * v;
  for (const Complex& c : s.coeffs) spectral += std::norm(c);
  spectral /= static_cast<double>(x.size());
  CHECK(std::abs(spatial - spectral) < 1e-8 * spatial);
}

TEST_CASE("circular shift becomes a phase ramp") {
  Rng rng(24);
  const Image x = testing::random_image(rng, 9, 9);
  const int dx = 2, dy = -3;
  const Spectrum s = dft2(x);
  const Spectrum sh = dft2(circular_shift(x, dx, dy));
  const int n = 9, h = 4;
  double worst = 0.0;
  for (int z1 = -h; z1 <= h; ++z1)
    for (int z2 = -h; z2 <= h; ++z2) {
      const double phase = -2.0 * 3.14159265358979323846 *
                           (static_cast<double>(z1) * dy + static_cast<double>(z2) * dx) / n;
      const Complex expect = s.at(z1, z2) * Complex(std::cos(phase), std::sin(phase));
      worst = std::max(worst, std::abs(expect - sh.at(z1, z2)));
    }
  CHECK(worst < 1e-9);
}

TEST_CASE("pack: half lengths and counts match the odd-grid arithmetic") {
  CHECK(half_plane_indices(65).size() == 2112);
  CHECK(half_plane_indices(9).size() == 40);

  Rng rng(25);
  const PackedSpectrum p = pack(dft2(testing::random_image(rng, 65, 65)));
  CHECK(p.half.size() == 2112);
}

TEST_CASE("pack of an all-ones spectrum is dc=1, half all ones") {
  Spectrum s(5);
  for (Complex& c : s.coeffs) c = Complex(1.0, 0.0);
  const PackedSpectrum p = pack(s);
  CHECK(p.dc == 1.0);
  for (const Complex& c : p.half) CHECK(c == Complex(1.0, 0.0));
}

TEST_CASE("unpack(pack(dft2(x))) is bit-exact") {
  Rng rng(26);
  const Spectrum s = dft2(testing::random_image(rng, 9, 9));
  const Spectrum back = unpack(pack(s));
  for (std::size_t i = 0; i < s.coeffs.size(); ++i) {
    CHECK(back.coeffs[i].real() == s.coeffs[i].real());
    CHECK(back.coeffs[i].imag() == s.coeffs[i].imag());
  }
}

TEST_CASE("pack rejects asymmetric spectra") {
  Spectrum s(5);
  s.at(1, 1) = Complex(1.0, 2.0);
  s.at(-1, -1) = Complex(1.0, 2.0);  // should be the conjugate
  CHECK_THROWS_AS(pack(s), std::invalid_argument);
}

TEST_CASE("band_indices: published coefficient counts") {
  CHECK(band_indices(17, 4, 8).size() == 208);
  CHECK(band_indices(65, 0, 4).size() == 81);  // lo=0 includes DC
  CHECK(band_indices(9, 3, 4).size() == 32);   // 9^2 - 7^2
  CHECK(band_indices(65, 4, 8).size() == 208);
  CHECK(band_indices(33, 4, 8).size() == 208);
}

TEST_CASE("band_indices validates its limits") {
  CHECK_THROWS_AS(band_indices(8, 0, 4), std::invalid_argument);
  CHECK_THROWS_AS(band_indices(9, 4, 4), std::invalid_argument);
  CHECK_THROWS_AS(band_indices(9, 0, 5), std::invalid_argument);
}

TEST_CASE("filtering a real-origin spectrum by a symmetric filter stays real") {
  Rng rng(27);
  const Image x = testing::random_image(rng, 17, 17);
  const Spectrum y = dft2(x);
  // conjugate-symmetric filter: the spectrum of another real patch
  const Spectrum g = dft2(testing::random_image(rng, 17, 17));
  Spectrum prod(17);
  for (std::size_t i = 0; i < prod.coeffs.size(); ++i) prod.coeffs[i] = g.coeffs[i] * y.coeffs[i];

  // inverse transform with the imaginary part kept, via the complex path
  ComplexGrid grid(prod.coeffs.size());
  const int n = 17, h = 8;
  auto fold = [n](int z) { return z < 0 ? z + n : z; };
  for (int z1 = -h; z1 <= h; ++z1)
    for (int z2 = -h; z2 <= h; ++z2)
      grid[static_cast<std::size_t>(fold(z1)) * n + fold(z2)] = prod.at(z1, z2);
  const ComplexGrid out = ifft2(grid, n, n);
  double worst = 0.0;
  for (const Complex& c : out) worst = std::max(worst, std::abs(c.imag()));
  CHECK(worst < 1e-9);
}

TEST_CASE("kernel_spectrum of a delta kernel is identically one") {
  const Spectrum s = kernel_spectrum(BlurKernel::delta(5), 17);
  for (const Complex& c : s.coeffs) {
    CHECK(c.real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(c.imag()) < 1e-12);
  }
}

TEST_CASE("fft2/ifft2 round trip on a rectangular grid") {
  Rng rng(28);
  const Image x = testing::random_image(rng, 20, 14);
  const ComplexGrid f = fft2(x);
  const ComplexGrid back = ifft2(f, 20, 14);
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    worst = std::max(worst, std::abs(back[i] - Complex(x.data[i], 0.0)));
  CHECK(worst < 1e-12);
}
