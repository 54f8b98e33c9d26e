// core/src/fourier.cpp

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

#include "ndeblur/fourier.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <stdexcept>

namespace ndeblur {

namespace {

// FFTW planning is not thread-safe; executing a cached plan on caller-owned
// buffers via fftw_execute_dft is. Plans use FFTW_ESTIMATE so the chosen
// algorithm (and therefore rounding) is stable across runs.
class PlanCache {
 public:
  fftw_plan get(int width, int height, int sign) {
    std::lock_guard<std::mutex> lock(mu_);
    const Key key{width, height, sign};
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    const std::size_t n = static_cast<std::size_t>(width) * height;
    fftw_complex* buf = fftw_alloc_complex(n);
    if (!buf) throw std::bad_alloc();
    // FFTW_ESTIMATE does not touch the arrays; an in-place dummy is fine.
    fftw_plan p = fftw_plan_dft_2d(height, width, buf, buf, sign, FFTW_ESTIMATE);
    fftw_free(buf);
    if (!p) throw std::runtime_error("fftw plan creation failed");
    plans_.emplace(key, p);
    return p;
  }

 private:
  struct Key {
    int w, h, sign;
    bool operator<(const Key& o) const {
      if (w != o.w) return w < o.w;
      if (h != o.h) return h < o.h;
      return sign < o.sign;
    }
  };
  std::mutex mu_;
  std::map<Key, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

struct FftwBuffer {
  fftw_complex* p = nullptr;
  explicit FftwBuffer(std::size_t n) : p(fftw_alloc_complex(n)) {
    if (!p) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(p); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
};

ComplexGrid run_fft(const ComplexGrid& in, int width, int height, int sign) {
  if (width <= 0 || height <= 0 ||
      in.size() != static_cast<std::size_t>(width) * height)
    throw std::invalid_argument("fft2: grid size mismatch");
  const std::size_t n = in.size();
  FftwBuffer src(n), dst(n);
  for (std::size_t i = 0; i < n; ++i) {
    src.p[i][0] = in[i].real();
    src.p[i][1] = in[i].imag();
  }
  fftw_execute_dft(plan_cache().get(width, height, sign), src.p, dst.p);
  ComplexGrid out(n);
  const double scale = sign == FFTW_BACKWARD ? 1.0 / static_cast<double>(n) : 1.0;
  for (std::size_t i = 0; i < n; ++i)
    out[i] = Complex(dst.p[i][0] * scale, dst.p[i][1] * scale);
  return out;
}

}  // namespace

std::vector<FreqIndex> half_plane_indices(int n) {
  const int h = (n - 1) / 2;
  std::vector<FreqIndex> out;
  out.reserve(static_cast<std::size_t>(n) * n / 2);
  for (int z1 = -h; z1 <= h; ++z1)
    for (int z2 = -h; z2 <= h; ++z2)
      if (in_half_plane({z1, z2})) out.push_back({z1, z2});
  return out;
}

std::vector<FreqIndex> band_indices(int n, int lo, int hi) {
  if (n <= 0 || n % 2 == 0) throw std::invalid_argument("band_indices: n must be odd");
  const int h = (n - 1) / 2;
  if (lo < 0 || lo >= hi || hi > h) throw std::invalid_argument("band_indices: bad band limits");
  std::vector<FreqIndex> out;
  for (int z1 = -h; z1 <= h; ++z1) {
    for (int z2 = -h; z2 <= h; ++z2) {
      const int m = std::max(std::abs(z1), std::abs(z2));
      const bool keep = lo == 0 ? m <= hi : (m > lo && m <= hi);
      if (keep) out.push_back({z1, z2});
    }
  }
  return out;
}

Spectrum dft2(const Image& patch) {
  const int n = patch.width;
  if (n != patch.height) throw std::invalid_argument("dft2: patch must be square");
  if (n % 2 == 0) throw std::invalid_argument("dft2: size must be odd");
  ComplexGrid in(patch.size());
  for (std::size_t i = 0; i < patch.size(); ++i) in[i] = Complex(patch.data[i], 0.0);
  ComplexGrid raw = run_fft(in, n, n, FFTW_FORWARD);

  Spectrum s(n);
  const int h = s.half();
  // remap standard DFT order k in [0, n) to signed z, then symmetrize so the
  // real-input identity X[z] == conj(X[-z]) holds exactly, not just to
  // rounding. Downstream packing and filtering rely on the exact form.
  auto fold = [n](int z) { return z < 0 ? z + n : z; };
  for (int z1 = -h; z1 <= h; ++z1)
    for (int z2 = -h; z2 <= h; ++z2)
      s.at(z1, z2) = raw[static_cast<std::size_t>(fold(z1)) * n + fold(z2)];
  for (int z1 = 0; z1 <= h; ++z1) {
    for (int z2 = -h; z2 <= h; ++z2) {
      if (!in_half_plane({z1, z2})) continue;
      const Complex a = s.at(z1, z2);
      const Complex b = s.at(-z1, -z2);
      const Complex avg = 0.5 * (a + std::conj(b));
      s.at(z1, z2) = avg;
      s.at(-z1, -z2) = std::conj(avg);
    }
  }
  s.at(0, 0) = Complex(s.at(0, 0).real(), 0.0);
  s.real_origin = true;
  return s;
}

Image idft2(const Spectrum& s) {
  const int n = s.size;
  if (n <= 0 || n % 2 == 0) throw std::invalid_argument("idft2: bad spectrum size");
  const int h = s.half();
  ComplexGrid in(static_cast<std::size_t>(n) * n);
  auto fold = [n](int z) { return z < 0 ? z + n : z; };
  for (int z1 = -h; z1 <= h; ++z1)
    for (int z2 = -h; z2 <= h; ++z2)
      in[static_cast<std::size_t>(fold(z1)) * n + fold(z2)] = s.at(z1, z2);
  ComplexGrid out = run_fft(in, n, n, FFTW_BACKWARD);
  Image img(n, n);
  for (std::size_t i = 0; i < img.size(); ++i) img.data[i] = out[i].real();
  return img;
}

PackedSpectrum pack(const Spectrum& s) {
  const int h = s.half();
  // validate conjugate symmetry before discarding half the grid
  double scale = 0.0;
  for (const Complex& c : s.coeffs) scale = std::max(scale, std::abs(c));
  const double tol = 1e-9 * std::max(scale, 1e-300);
  if (std::abs(s.at(0, 0).imag()) > tol)
    throw std::invalid_argument("pack: spectrum has a complex DC term");
  PackedSpectrum p;
  p.size = s.size;
  p.dc = s.at(0, 0).real();
  p.half.reserve(static_cast<std::size_t>(s.size) * s.size / 2);
  for (int z1 = -h; z1 <= h; ++z1) {
    for (int z2 = -h; z2 <= h; ++z2) {
      if (!in_half_plane({z1, z2})) continue;
      const Complex a = s.at(z1, z2);
      const Complex b = s.at(-z1, -z2);
      if (std::abs(a - std::conj(b)) > tol)
        throw std::invalid_argument("pack: spectrum is not conjugate-symmetric");
      p.half.push_back(a);
    }
  }
  return p;
}

Spectrum unpack(const PackedSpectrum& p) {
  if (p.size <= 0 || p.size % 2 == 0) throw std::invalid_argument("unpack: bad size");
  const std::size_t expect = (static_cast<std::size_t>(p.size) * p.size - 1) / 2;
  if (p.half.size() != expect) throw std::invalid_argument("unpack: half length mismatch");
  Spectrum s(p.size);
  const int h = s.half();
  s.at(0, 0) = Complex(p.dc, 0.0);
  std::size_t i = 0;
  for (int z1 = -h; z1 <= h; ++z1) {
    for (int z2 = -h; z2 <= h; ++z2) {
      if (!in_half_plane({z1, z2})) continue;
      s.at(z1, z2) = p.half[i];
      s.at(-z1, -z2) = std::conj(p.half[i]);
      ++i;
    }
  }
  s.real_origin = true;
  return s;
}

Spectrum kernel_spectrum(const BlurKernel& k, int n) {
  if (n % 2 == 0) throw std::invalid_argument("kernel_spectrum: n must be odd");
  if (k.size > n) throw std::invalid_argument("kernel_spectrum: kernel larger than grid");
  Image grid(n, n, 0.0);
  const int c = k.size / 2;
  auto wrap = [n](int v) { return ((v % n) + n) % n; };
  for (int y = 0; y < k.size; ++y)
    for (int x = 0; x < k.size; ++x)
      grid.at(wrap(x - c), wrap(y - c)) += k.at(x, y);
  return dft2(grid);
}

ComplexGrid fft2(const ComplexGrid& in, int width, int height) {
  return run_fft(in, width, height, FFTW_FORWARD);
}

ComplexGrid ifft2(const ComplexGrid& in, int width, int height) {
  return run_fft(in, width, height, FFTW_BACKWARD);
}

ComplexGrid fft2(const Image& img) {
  ComplexGrid in(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) in[i] = Complex(img.data[i], 0.0);
  return run_fft(in, img.width, img.height, FFTW_FORWARD);
}

ComplexGrid kernel_transfer(const BlurKernel& k, int width, int height) {
  if (k.size > width || k.size > height)
    throw std::invalid_argument("kernel_transfer: kernel larger than grid");
  Image grid(width, height, 0.0);
  const int c = k.size / 2;
  auto wrapw = [width](int v) { return ((v % width) + width) % width; };
  auto wraph = [height](int v) { return ((v % height) + height) % height; };
  for (int y = 0; y < k.size; ++y)
    for (int x = 0; x < k.size; ++x)
      grid.at(wrapw(x - c), wraph(y - c)) += k.at(x, y);
  return fft2(grid);
}

}  // namespace ndeblur
