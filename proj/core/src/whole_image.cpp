// core/src/whole_image.cpp

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

#include "ndeblur/whole_image.hpp"

#include <cmath>
#include <stdexcept>

#include "ndeblur/threading.hpp"

namespace ndeblur {

namespace {

constexpr int kPad = 32;
constexpr int kCropOff = 16;  // 33x33 output sits here inside the 65x65 patch

std::vector<int> anchor_grid(int padded, int stride) {
  std::vector<int> anchors;
  const int last = padded - kPatchSize;
  for (int a = 0; a < last; a += stride) anchors.push_back(a);
  anchors.push_back(last);  // clamp so coverage reaches the far edge
  return anchors;
}

}  // namespace

double hann33(int i) {
  return 0.5 - 0.5 * std::cos(2.0 * 3.14159265358979323846 * (i + 0.5) / kOutputSize);
}

Image restore_image(const Image& y, const NetworkWeights& w, int stride) {
  if (stride < 1 || stride > 16) throw std::invalid_argument("restore: stride must be in [1, 16]");
  if (y.width < kOutputSize || y.height < kOutputSize)
    throw std::invalid_argument("restore: image must be at least 33x33");

  const Image padded = reflect_pad(y, kPad);
  const std::vector<int> ax = anchor_grid(padded.width, stride);
  const std::vector<int> ay = anchor_grid(padded.height, stride);

  std::vector<std::pair<int, int>> anchors;
  anchors.reserve(ax.size() * ay.size());
  for (int a : ay)
    for (int b : ax) anchors.emplace_back(b, a);

  double window[kOutputSize][kOutputSize];
  for (int i = 0; i < kOutputSize; ++i)
    for (int j = 0; j < kOutputSize; ++j) window[i][j] = hann33(i) * hann33(j);

  const int chunks = chunk_count(anchors.size());
  std::vector<Image> nums(chunks, Image(padded.width, padded.height, 0.0));
  std::vector<Image> dens(chunks, Image(padded.width, padded.height, 0.0));

  constexpr std::size_t kBatch = 64;
  parallel_chunks(anchors.size(), [&](int chunk, std::size_t lo, std::size_t hi) {
    Image& num = nums[chunk];
    Image& den = dens[chunk];
    for (std::size_t base = lo; base < hi; base += kBatch) {
      const std::size_t n = std::min(kBatch, hi - base);
      std::vector<Spectrum> specs(n);
      Eigen::MatrixXd input(BandEncoding::kTotalDim, static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) {
        const auto [px, py] = anchors[base + i];
        const Image patch = crop(padded, px, py, kPatchSize, kPatchSize);
        specs[i] = dft2(patch);
        input.col(static_cast<Eigen::Index>(i)) =
            flatten(apply_whitening(w.whitening, encode_raw(patch, specs[i])));
      }
      const Eigen::MatrixXd out = forward_batch(w, input, nullptr);
      for (std::size_t i = 0; i < n; ++i) {
        const auto [px, py] = anchors[base + i];
        const Image xhat =
            apply_filter(prediction_from_output(out.col(static_cast<Eigen::Index>(i))), specs[i]);
        for (int yy = 0; yy < kOutputSize; ++yy) {
          for (int xx = 0; xx < kOutputSize; ++xx) {
            const double h = window[yy][xx];
            num.at(px + kCropOff + xx, py + kCropOff + yy) += h * xhat.at(xx, yy);
            den.at(px + kCropOff + xx, py + kCropOff + yy) += h;
          }
        }
      }
    }
  });

  // chunk-ordered reduction keeps the blend reproducible for a fixed thread
  // count
  Image num = std::move(nums[0]);
  Image den = std::move(dens[0]);
  for (int c = 1; c < chunks; ++c) {
    for (std::size_t i = 0; i < num.size(); ++i) {
      num.data[i] += nums[c].data[i];
      den.data[i] += dens[c].data[i];
    }
  }

  Image out(y.width, y.height);
  for (int yy = 0; yy < y.height; ++yy) {
    for (int xx = 0; xx < y.width; ++xx) {
      const double d = den.at(xx + kPad, yy + kPad);
      if (!(d > 0.0)) throw std::logic_error("restore: uncovered pixel in recomposition");
      out.at(xx, yy) = num.at(xx + kPad, yy + kPad) / d;
    }
  }
  return out;
}

}  // namespace ndeblur
