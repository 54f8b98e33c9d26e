// tests/test_network.cpp

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
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "ndeblur/network.hpp"
#include "ndeblur/synth_images.hpp"
#include "oracles.hpp"

using namespace ndeblur;

namespace {

BandEncoding zero_encoding() {
  BandEncoding e;
  for (int b = 0; b < BandEncoding::kNumBands; ++b)
    e.band(b) = Eigen::VectorXd::Zero(BandEncoding::band_dim(b));
  return e;
}

BandEncoding random_encoding(Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  BandEncoding e = zero_encoding();
  for (int b = 0; b < BandEncoding::kNumBands; ++b)
    for (Eigen::Index i = 0; i < e.band(b).size(); ++i) e.band(b)[i] = g(rng);
  return e;
}

FilterPrediction const_filter(Complex value) {
  FilterPrediction p;
  p.g.size = kPatchSize;
  p.g.dc = 1.0;
  p.g.half.assign(2112, value);
  return p;
}

}  // namespace

TEST_CASE("zero network predicts the keep-DC filter") {
  const NetworkWeights w = make_keepdc_weights(ArchitectureConfig::desk_scale());
  const FilterPrediction p = forward(w, zero_encoding());
  CHECK(p.g.dc == 1.0);
  CHECK(p.g.half.size() == 2112);
  for (const Complex& c : p.g.half) CHECK(std::abs(c) == 0.0);
}

TEST_CASE("single-unit network reproduces a hand-computed composition") {
  ArchitectureConfig arch{1, 1, 1, 1, 2112};
  NetworkWeights w = make_keepdc_weights(arch);

  // input: everything zero except low[0] = 2
  BandEncoding e = zero_encoding();
  e.low[0] = 2.0;

  w.blocks.layer1[0].weight(0, 0) = 0.5;
  w.blocks.layer1[0].bias[0] = 0.25;   // relu(0.5*2 + 0.25) = 1.25
  w.blocks.layer1[1].bias[0] = -1.0;   // relu(-1) = 0
  w.blocks.layer1[2].bias[0] = 0.5;    // relu(0.5) = 0.5

  w.blocks.layer2[0].weight(0, 0) = 1.0;
  w.blocks.layer2[0].weight(0, 1) = 2.0;
  w.blocks.layer2[0].bias[0] = -0.25;  // relu(1*1.25 + 2*0 - 0.25) = 1.0
  w.blocks.layer2[1].weight(0, 0) = 3.0;
  w.blocks.layer2[1].weight(0, 1) = 4.0;  // relu(3*0 + 4*0.5) = 2.0

  w.blocks.fc[0].weight(0, 0) = 0.5;
  w.blocks.fc[0].weight(0, 1) = 0.25;
  w.blocks.fc[0].bias[0] = 0.1;  // relu(0.5*1 + 0.25*2 + 0.1) = 1.1

  w.blocks.output.weight(0, 0) = 2.0;
  w.blocks.output.weight(1, 0) = -1.0;
  w.blocks.output.bias[0] = 0.05;  // out0 = 2*1.1 + 0.05 = 2.25
  w.blocks.output.bias[1] = 0.2;   // out1 = -1.1 + 0.2  = -0.9

  const FilterPrediction p = forward(w, e);
  CHECK(p.g.dc == 1.0);
  CHECK(p.g.half[0].real() == doctest::Approx(2.25).epsilon(1e-15));
  CHECK(p.g.half[0].imag() == doctest::Approx(-0.9).epsilon(1e-15));
  CHECK(std::abs(p.g.half[1]) == 0.0);
}

TEST_CASE("forward is deterministic for a fixed seed and input") {
  const NetworkWeights w = init_weights(ArchitectureConfig{4, 4, 8, 2, 2112}, 7);
  Rng rng(41);
  const BandEncoding e = random_encoding(rng);
  const FilterPrediction p1 = forward(w, e);
  const FilterPrediction p2 = forward(w, e);
  const NetworkWeights w2 = init_weights(ArchitectureConfig{4, 4, 8, 2, 2112}, 7);
  const FilterPrediction p3 = forward(w2, e);
  for (std::size_t i = 0; i < p1.g.half.size(); ++i) {
    CHECK(p1.g.half[i] == p2.g.half[i]);
    CHECK(p1.g.half[i] == p3.g.half[i]);
  }
}

TEST_CASE("apply_filter: all-pass filter crops the input") {
  Rng rng(42);
  const Image y = testing::random_image(rng, 65, 65);
  const Image xhat = apply_filter(const_filter(Complex(1.0, 0.0)), y);
  CHECK(testing::max_abs_diff(xhat, crop(y, 16, 16, 33, 33)) < 1e-10);
}

TEST_CASE("apply_filter: zero half keeps only the patch mean") {
  Rng rng(43);
  const Image y = testing::random_image(rng, 65, 65);
  const Image xhat = apply_filter(const_filter(Complex(0.0, 0.0)), y);
  const double mean = mean_intensity(y);
  for (double v : xhat.data) CHECK(v == doctest::Approx(mean).epsilon(1e-10));
}

TEST_CASE("apply_filter: phase ramp shifts the patch circularly") {
  Rng rng(44);
  const Image y = testing::random_image(rng, 65, 65);
  FilterPrediction p;
  p.g.size = kPatchSize;
  p.g.dc = 1.0;
  for (const FreqIndex& z : half_plane_indices(kPatchSize)) {
    const double phase = -2.0 * 3.14159265358979323846 * z.z2 / 65.0;  // shift x by +1
    p.g.half.push_back(Complex(std::cos(phase), std::sin(phase)));
  }
  const Image xhat = apply_filter(p, y);
  const Image expect = crop(circular_shift(y, 1, 0), 16, 16, 33, 33);
  CHECK(testing::max_abs_diff(xhat, expect) < 1e-9);
}

TEST_CASE("apply_filter is linear in the patch and affine-consistent in g") {
  Rng rng(45);
  const Image y1 = testing::random_image(rng, 65, 65);
  const Image y2 = testing::random_image(rng, 65, 65);
  const FilterPrediction g1 = const_filter(Complex(0.3, -0.2));
  Image mix(65, 65);
  for (std::size_t i = 0; i < mix.size(); ++i) mix.data[i] = 1.5 * y1.data[i] - 0.5 * y2.data[i];
  const Image lhs = apply_filter(g1, mix);
  const Image r1 = apply_filter(g1, y1);
  const Image r2 = apply_filter(g1, y2);
  double worst = 0.0;
  for (std::size_t i = 0; i < lhs.size(); ++i)
    worst = std::max(worst, std::abs(lhs.data[i] - (1.5 * r1.data[i] - 0.5 * r2.data[i])));
  CHECK(worst < 1e-9);

  const FilterPrediction g2 = const_filter(Complex(-0.1, 0.4));
  FilterPrediction gmix;
  gmix.g.size = kPatchSize;
  gmix.g.dc = 1.0;
  for (std::size_t i = 0; i < g1.g.half.size(); ++i)
    gmix.g.half.push_back(0.25 * g1.g.half[i] + 0.75 * g2.g.half[i]);
  const Image ga = apply_filter(g1, y1);
  const Image gb = apply_filter(g2, y1);
  const Image gm = apply_filter(gmix, y1);
  worst = 0.0;
  for (std::size_t i = 0; i < gm.size(); ++i)
    worst = std::max(worst, std::abs(gm.data[i] - (0.25 * ga.data[i] + 0.75 * gb.data[i])));
  CHECK(worst < 1e-9);
}

TEST_CASE("mse loss: zero, constant offset, and independent summation") {
  Rng rng(46);
  const Image a = testing::random_image(rng, 33, 33);
  CHECK(mse_loss(a, a) == 0.0);

  Image b = a;
  for (double& v : b.data) v += 0.1;
  CHECK(mse_loss(b, a) == doctest::Approx(0.01).epsilon(1e-12));

  const Image c = testing::random_image(rng, 33, 33);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.data[i] - c.data[i];
    acc += d * d;
  }
  CHECK(mse_loss(a, c) == doctest::Approx(acc / 1089.0).epsilon(1e-12));
}

TEST_CASE("backward: zero residual gives zero gradients everywhere") {
  const ArchitectureConfig arch{3, 3, 4, 1, 2112};
  NetworkWeights w = init_weights(arch, 11);
  Rng rng(47);
  const Image y = testing::random_image(rng, 65, 65);
  const Spectrum ys = dft2(y);
  const BandEncoding e = encode_raw(y);

  ForwardCache cache;
  const Eigen::MatrixXd out = forward_batch(w, flatten(e), &cache);
  const FilterPrediction p = prediction_from_output(out.col(0));
  const Image xhat = apply_filter(p, ys);

  Eigen::VectorXd dout;
  const double loss = filter_head_loss_grad(p, ys, xhat, &dout);  // target == prediction
  CHECK(loss == 0.0);
  CHECK(dout.lpNorm<Eigen::Infinity>() == 0.0);

  const WeightBlocks g = backward_batch(w, cache, dout);
  for_each_layer(const_cast<WeightBlocks&>(g), [&](const char*, DenseLayer& l) {
    CHECK(l.weight.lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(l.bias.lpNorm<Eigen::Infinity>() == 0.0);
  });
}

TEST_CASE("gradient spot check against central finite differences") {
  // small architecture, random nonzero output layer; the full every-parameter
  // sweep runs in the acceptance suite
  const ArchitectureConfig arch{2, 2, 3, 1, 2112};
  NetworkWeights w = init_weights(arch, 3);
  Rng wr(48);
  std::normal_distribution<double> g01(0.0, 0.01);
  for (Eigen::Index i = 0; i < w.blocks.output.weight.rows(); ++i)
    for (Eigen::Index j = 0; j < w.blocks.output.weight.cols(); ++j)
      w.blocks.output.weight(i, j) = g01(wr);

  Rng rng(49);
  SynthImageConfig icfg;
  Image big = make_dead_leaves(rng, 80, 80, icfg);
  const Image y = crop(big, 5, 5, 65, 65);
  const Image target = crop(big, 21, 21, 33, 33);
  const Spectrum ys = dft2(y);
  const BandEncoding enc = encode_raw(y);
  const Eigen::VectorXd input = flatten(enc);

  auto loss_at = [&](const NetworkWeights& net) {
    const Eigen::MatrixXd out = forward_batch(net, input, nullptr);
    return filter_head_loss_grad(prediction_from_output(out.col(0)), ys, target, nullptr);
  };

  ForwardCache cache;
  const Eigen::MatrixXd out = forward_batch(w, input, &cache);
  Eigen::VectorXd dout;
  filter_head_loss_grad(prediction_from_output(out.col(0)), ys, target, &dout);
  const WeightBlocks grads = backward_batch(w, cache, dout);

  const double step = 1e-4;
  Rng pick(50);
  auto check_layer = [&](DenseLayer& wl, const DenseLayer& gl, int samples) {
    std::uniform_int_distribution<Eigen::Index> ri(0, wl.weight.rows() - 1);
    std::uniform_int_distribution<Eigen::Index> ci(0, wl.weight.cols() - 1);
    for (int s = 0; s < samples; ++s) {
      const Eigen::Index i = ri(pick), j = ci(pick);
      const double keep = wl.weight(i, j);
      wl.weight(i, j) = keep + step;
      const double up = loss_at(w);
      wl.weight(i, j) = keep - step;
      const double dn = loss_at(w);
      wl.weight(i, j) = keep;
      const double fd = (up - dn) / (2.0 * step);
      const double an = gl.weight(i, j);
      CHECK(std::abs(fd - an) <= 1e-4 * std::max({std::abs(fd), std::abs(an), 1e-10}));
    }
  };
  for (int b = 0; b < 3; ++b) check_layer(w.blocks.layer1[b], grads.layer1[b], 24);
  for (int b = 0; b < 2; ++b) check_layer(w.blocks.layer2[b], grads.layer2[b], 12);
  check_layer(w.blocks.fc[0], grads.fc[0], 12);
  check_layer(w.blocks.output, grads.output, 48);
}

TEST_CASE("input-encoding gradient matches finite differences") {
  const ArchitectureConfig arch{2, 2, 3, 1, 2112};
  NetworkWeights w = init_weights(arch, 5);
  Rng wr(51);
  std::normal_distribution<double> g01(0.0, 0.01);
  for (Eigen::Index i = 0; i < w.blocks.output.weight.rows(); ++i)
    for (Eigen::Index j = 0; j < w.blocks.output.weight.cols(); ++j)
      w.blocks.output.weight(i, j) = g01(wr);

  Rng rng(52);
  const Image y = testing::random_image(rng, 65, 65);
  Image target = crop(y, 16, 16, 33, 33);
  for (double& v : target.data) v *= 0.9;
  const Spectrum ys = dft2(y);
  Eigen::VectorXd input = flatten(encode_raw(y));

  auto loss_at = [&](const Eigen::VectorXd& in) {
    const Eigen::MatrixXd out = forward_batch(w, in, nullptr);
    return filter_head_loss_grad(prediction_from_output(out.col(0)), ys, target, nullptr);
  };

  ForwardCache cache;
  const Eigen::MatrixXd out = forward_batch(w, input, &cache);
  Eigen::VectorXd dout;
  filter_head_loss_grad(prediction_from_output(out.col(0)), ys, target, &dout);
  Eigen::MatrixXd dinput;
  backward_batch(w, cache, dout, &dinput);

  Rng pick(53);
  std::uniform_int_distribution<Eigen::Index> idx(0, input.size() - 1);
  const double step = 1e-4;
  for (int s = 0; s < 40; ++s) {
    const Eigen::Index i = idx(pick);
    Eigen::VectorXd up = input, dn = input;
    up[i] += step;
    dn[i] -= step;
    const double fd = (loss_at(up) - loss_at(dn)) / (2.0 * step);
    const double an = dinput(i, 0);
    CHECK(std::abs(fd - an) <= 1e-4 * std::max({std::abs(fd), std::abs(an), 1e-10}));
  }
}

TEST_CASE("wiener: zero-noise filter inverts the kernel exactly") {
  Rng rng(54);
  KernelSynthConfig kcfg;
  kcfg.canvas = 9;
  kcfg.grid_sizes = {8};
  Rng krng = make_rng(1, RngStream::kKernelSynth, 0);
  const BlurKernel k = sample_kernel(krng, kcfg, 8);
  const Spectrum ks = kernel_spectrum(k, 65);
  std::vector<double> s(ks.coeffs.size(), 1.0);
  const WienerFilter wf = wiener_coefficients(ks, s, 0.0);
  CHECK(wf.zeroed == 0);

  std::size_t i = 0;
  for (const FreqIndex& z : half_plane_indices(65)) {
    const Complex prod = wf.g.g.half[i++] * ks.at(z.z1, z.z2);
    CHECK(std::abs(prod - Complex(1.0, 0.0)) < 1e-9);
  }
}

TEST_CASE("wiener: delta kernel reduces to the pure denoiser S/(S+sigma^2)") {
  const Spectrum ks = kernel_spectrum(BlurKernel::delta(5), 65);
  std::vector<double> s(ks.coeffs.size());
  Rng rng(55);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (double& v : s) v = u(rng);
  const double sigma = 0.7;
  const WienerFilter wf = wiener_coefficients(ks, s, sigma);
  std::size_t i = 0;
  for (const FreqIndex& z : half_plane_indices(65)) {
    const double expect = s[ks.index(z.z1, z.z2)] / (s[ks.index(z.z1, z.z2)] + sigma * sigma);
    CHECK(wf.g.g.half[i].imag() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(wf.g.g.half[i].real() == doctest::Approx(expect).epsilon(1e-9));
    CHECK(std::abs(wf.g.g.half[i]) <= 1.0 + 1e-12);
    ++i;
  }
}

TEST_CASE("wiener restoration beats the blurry patch on synthetic data") {
  Rng rng(56);
  KernelSynthConfig kcfg;
  kcfg.canvas = 13;
  kcfg.grid_sizes = {8};
  int improved = 0;
  const int trials = 100;
  const double sigma = 0.01;
  for (int t = 0; t < trials; ++t) {
    Rng krng = make_rng(2, RngStream::kKernelSynth, static_cast<std::uint64_t>(t));
    const BlurKernel k = sample_kernel(krng, kcfg, 8);
    const Image x = make_dead_leaves(rng, 65, 65);
    const Spectrum xs = dft2(x);
    const Spectrum ks = kernel_spectrum(k, 65);

    Spectrum blur(65);
    for (std::size_t i = 0; i < blur.coeffs.size(); ++i)
      blur.coeffs[i] = ks.coeffs[i] * xs.coeffs[i];
    blur.real_origin = true;
    Image y = idft2(blur);
    y = add_gaussian_noise(y, sigma, rng);

    std::vector<double> s(xs.coeffs.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::norm(xs.coeffs[i]);
    const WienerFilter wf = wiener_coefficients(ks, s, 65.0 * sigma);

    const Image xhat = apply_filter(wf.g, y);
    const Image target = crop(x, 16, 16, 33, 33);
    const Image blurry = crop(y, 16, 16, 33, 33);
    if (mse_loss(xhat, target) < mse_loss(blurry, target)) ++improved;
  }
  CHECK(improved >= 95);
}

TEST_CASE("weights file round trips and detects corruption") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "ndeblur_weights_tests";
  fs::create_directories(dir);
  const std::string path = (dir / "w.ndbw").string();

  NetworkWeights w = init_weights(ArchitectureConfig{3, 4, 5, 2, 2112}, 77);
  w.blocks.output.bias[17] = 0.25;
  save_weights(w, path);
  const NetworkWeights back = load_weights(path);
  CHECK(back.arch.group1_width == 3);
  CHECK(back.arch.fc_depth == 2);
  CHECK(back.blocks.output.bias[17] == 0.25);
  for (int b = 0; b < 3; ++b) {
    CHECK(back.blocks.layer1[b].weight == w.blocks.layer1[b].weight);
    CHECK(back.blocks.layer1[b].bias == w.blocks.layer1[b].bias);
  }

  // flip one byte in the middle: the trailing checksum must catch it
  std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
  f.seekp(2048);
  char c;
  f.seekg(2048);
  f.get(c);
  f.seekp(2048);
  f.put(static_cast<char>(c ^ 0x40));
  f.close();
  CHECK_THROWS_AS(load_weights(path), std::runtime_error);
}

TEST_CASE("identity-filter weights exist and act as a pass-through") {
  const NetworkWeights w = make_identity_filter_weights(ArchitectureConfig{2, 2, 2, 1, 2112});
  Rng rng(57);
  const FilterPrediction p = forward(w, random_encoding(rng));
  for (const Complex& c : p.g.half) CHECK(c == Complex(1.0, 0.0));
}
