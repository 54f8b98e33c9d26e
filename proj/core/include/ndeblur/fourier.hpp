// ndeblur/fourier.hpp

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

#ifndef NDEBLUR_FOURIER_HPP
#define NDEBLUR_FOURIER_HPP

#include <complex>
#include <vector>

#include "ndeblur/image.hpp"

namespace ndeblur {

using Complex = std::complex<double>;

/// Signed 2-D frequency index. For an odd N-point DFT each component ranges
/// over [-(N-1)/2, (N-1)/2].
struct FreqIndex {
  int z1 = 0;  // vertical (row) frequency
  int z2 = 0;  // horizontal (column) frequency
  bool operator==(const FreqIndex&) const = default;
};

/// Full complex DFT grid of an odd-sized square patch.
///
/// Conventions used across the project:
///   forward:  X[z] = sum_n x[n] exp(-i 2 pi (z . n) / N)   (unnormalized)
///   inverse:  x[n] = (1/N^2) sum_z X[z] exp(+i 2 pi (z . n) / N)
///
/// Coefficients are stored row-major over (z1, z2) with both components
/// running from -(N-1)/2 to (N-1)/2. A spectrum of a real patch satisfies
/// X[z] = conj(X[-z]); dft2 enforces this exactly and sets `real_origin`.
struct Spectrum {
  int size = 0;  // N, odd
  std::vector<Complex> coeffs;  // N*N
  bool real_origin = false;

  Spectrum() = default;
  explicit Spectrum(int n)
      : size(n), coeffs(static_cast<std::size_t>(n) * n, Complex(0.0, 0.0)) {}

  int half() const { return (size - 1) / 2; }
  std::size_t index(int z1, int z2) const {
    return static_cast<std::size_t>(z1 + half()) * size + (z2 + half());
  }
  Complex& at(int z1, int z2) { return coeffs[index(z1, z2)]; }
  Complex at(int z1, int z2) const { return coeffs[index(z1, z2)]; }
};

/// Conjugate-symmetry-reduced spectrum: the DC term plus one representative
/// per conjugate pair. The canonical half plane keeps z iff z1 > 0, or
/// z1 == 0 and z2 > 0; representatives appear in row-major order over the
/// full grid. For N = 65 the half vector has (65^2 - 1) / 2 = 2112 entries.
struct PackedSpectrum {
  int size = 0;
  double dc = 0.0;
  std::vector<Complex> half;
};

inline bool in_half_plane(const FreqIndex& z) {
  return z.z1 > 0 || (z.z1 == 0 && z.z2 > 0);
}

/// Canonical half-plane enumeration for an odd N grid, row-major.
std::vector<FreqIndex> half_plane_indices(int n);

/// Frequency square ring {z : lo < max(|z1|,|z2|) <= hi} in row-major order.
/// lo == 0 includes the DC term, so band_indices(n, 0, hi) is the full
/// low-pass square of side 2*hi+1.
std::vector<FreqIndex> band_indices(int n, int lo, int hi);

/// Forward DFT of an odd-sized square patch. The result is exactly
/// conjugate-symmetrized, so pack() round-trips bit-exactly.
Spectrum dft2(const Image& patch);

/// Inverse DFT; returns the real part. For real-origin spectra times
/// conjugate-symmetric filters the imaginary residue is at rounding level.
Image idft2(const Spectrum& s);

/// Reduces a real-origin spectrum to its half-plane representation.
/// Throws if the input violates conjugate symmetry beyond 1e-9 (relative).
PackedSpectrum pack(const Spectrum& s);

/// Reconstructs the full grid by conjugate reflection; exact inverse of pack.
Spectrum unpack(const PackedSpectrum& p);

/// DFT of a kernel embedded on an N x N grid with its canvas center placed at
/// the spatial origin (wrap-around layout), so that multiplying a patch
/// spectrum by the result applies the blur without any translation.
Spectrum kernel_spectrum(const BlurKernel& k, int n);

// -- arbitrary-size transforms ---------------------------------------------
// General W x H complex FFTs used by the whole-image solvers. Frequencies are
// in standard DFT order (0..W-1, 0..H-1); same normalization conventions as
// dft2/idft2. Thread-safe; plans are cached per size.

using ComplexGrid = std::vector<Complex>;  // row-major, width * height

ComplexGrid fft2(const ComplexGrid& in, int width, int height);
ComplexGrid ifft2(const ComplexGrid& in, int width, int height);

/// fft2 of a real image.
ComplexGrid fft2(const Image& img);

/// Kernel transfer function on a W x H grid, canvas center at the origin.
ComplexGrid kernel_transfer(const BlurKernel& k, int width, int height);

}  // namespace ndeblur

#endif  // NDEBLUR_FOURIER_HPP
