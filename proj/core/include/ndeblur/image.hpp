// ndeblur/image.hpp

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

#ifndef NDEBLUR_IMAGE_HPP
#define NDEBLUR_IMAGE_HPP

#include <string>
#include <vector>

#include "ndeblur/rng.hpp"

namespace ndeblur {

/// Single-channel image, row-major, intensities nominally in [0, 1].
struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> data;  // size == width * height

  Image() = default;
  Image(int w, int h, double fill = 0.0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return data.size(); }
};

/// Square blur kernel on an odd canvas. Taps are non-negative and sum to one
/// (within 1e-9); both properties are established by the constructors and
/// loaders and relied on everywhere else.
struct BlurKernel {
  int size = 0;  // odd, pixels per side
  std::vector<double> taps;

  BlurKernel() = default;
  BlurKernel(int s, std::vector<double> t);  // validates invariants

  double& at(int x, int y) { return taps[static_cast<std::size_t>(y) * size + x]; }
  double at(int x, int y) const { return taps[static_cast<std::size_t>(y) * size + x]; }

  /// Delta kernel: all mass on the canvas center.
  static BlurKernel delta(int s);
};

enum class ConvolveMode {
  kValid,        // output (W-s+1) x (H-s+1)
  kSameReflect,  // symmetric padding, output same size as input
};

// -- file i/o ---------------------------------------------------------------

/// Reads a PGM (P5, 8/16-bit) or PNG (gray or RGB, 8/16-bit) file and scales
/// intensities to [0, 1]. RGB collapses to luminance 0.299R+0.587G+0.114B.
Image load_image(const std::string& path);

/// Writes a 16-bit binary PGM. Values are clamped to [0, 1] and quantized to
/// 1/65535; this is the lossless interchange format for intermediates.
void save_pgm16(const Image& img, const std::string& path);

/// Kernel text format: first line "W H", then W*H whitespace-separated reals
/// in row-major order. Load validates squareness, odd size, non-negativity
/// and unit sum (renormalizing exactly when within 1e-6).
BlurKernel load_kernel(const std::string& path);
void save_kernel(const BlurKernel& k, const std::string& path);

// -- operations -------------------------------------------------------------

/// Discrete 2-D convolution (true convolution, both axes flipped).
/// kValid requires the image strictly larger than the kernel and returns the
/// fully-overlapping region; kSameReflect pads symmetrically and returns an
/// output the size of the input, aligned to the kernel canvas center.
Image convolve(const Image& x, const BlurKernel& k, ConvolveMode mode);

/// Adds i.i.d. N(0, sigma^2) to every pixel. Not clipped.
Image add_gaussian_noise(const Image& x, double sigma, Rng& rng);

// -- geometry helpers -------------------------------------------------------

/// Symmetric (edge-repeating) padding by `margin` pixels on every side.
/// Requires margin <= min(width, height).
Image reflect_pad(const Image& x, int margin);

Image crop(const Image& x, int x0, int y0, int w, int h);

/// One of the 8 elements of the dihedral group of the square: d in [0, 8),
/// d & 3 counts quarter-turn rotations, d & 4 adds a horizontal flip.
/// Requires a square image.
Image apply_dihedral(const Image& x, int d);

Image circular_shift(const Image& x, int dx, int dy);

double mean_intensity(const Image& x);

}  // namespace ndeblur

#endif  // NDEBLUR_IMAGE_HPP
