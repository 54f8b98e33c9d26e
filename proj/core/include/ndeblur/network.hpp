// ndeblur/network.hpp

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

#ifndef NDEBLUR_NETWORK_HPP
#define NDEBLUR_NETWORK_HPP

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ndeblur/band_encoder.hpp"
#include "ndeblur/fourier.hpp"

namespace ndeblur {

// Feedforward predictor of per-patch deconvolution filters.
//
// Layer structure (all hidden units ReLU, output linear):
//   layer 1: three groups, one per pair of adjacent frequency bands
//            (low,band1), (band1,band2), (band2,high); group1_width units.
//   layer 2: two groups over adjacent layer-1 group pairs; group2_width units.
//   then fc_depth fully connected layers of fc_width units,
//   and a linear output of 2 * 2112 reals, interleaved (re, im) per
//   retained half-plane coefficient of a 65-point filter spectrum.
// The DC gain is not produced by the network; it is pinned to 1.
struct ArchitectureConfig {
  int group1_width = 1024;
  int group2_width = 2048;
  int fc_width = 4096;
  int fc_depth = 5;  // fully connected hidden layers after the two grouped ones
  int output_half_len = 2112;

  static ArchitectureConfig paper_scale() { return {1024, 2048, 4096, 5, 2112}; }
  static ArchitectureConfig desk_scale() { return {64, 128, 256, 3, 2112}; }

  void validate() const;
  int output_dim() const { return 2 * output_half_len; }

  // band-pair input segments of the flattened encoding (contiguous because
  // bands are stored in frequency order)
  static constexpr std::array<int, 3> kPairOffset = {0, 81, 289};
  static constexpr std::array<int, 3> kPairLen = {289, 416, 416};
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

struct WeightBlocks {
  std::array<DenseLayer, 3> layer1;
  std::array<DenseLayer, 2> layer2;
  std::vector<DenseLayer> fc;
  DenseLayer output;
};

/// Visits every dense layer with a stable name, in serialization order.
template <typename Blocks, typename F>
void for_each_layer(Blocks& b, F&& f) {
  f("layer1/0", b.layer1[0]);
  f("layer1/1", b.layer1[1]);
  f("layer1/2", b.layer1[2]);
  f("layer2/0", b.layer2[0]);
  f("layer2/1", b.layer2[1]);
  for (std::size_t i = 0; i < b.fc.size(); ++i) f(("fc/" + std::to_string(i)).c_str(), b.fc[i]);
  f("output", b.output);
}

template <typename A, typename B, typename F>
void for_each_layer_pair(A& a, B& b, F&& f) {
  for (int i = 0; i < 3; ++i) f(("layer1/" + std::to_string(i)).c_str(), a.layer1[i], b.layer1[i]);
  for (int i = 0; i < 2; ++i) f(("layer2/" + std::to_string(i)).c_str(), a.layer2[i], b.layer2[i]);
  for (std::size_t i = 0; i < a.fc.size(); ++i)
    f(("fc/" + std::to_string(i)).c_str(), a.fc[i], b.fc[i]);
  f("output", a.output, b.output);
}

/// Complete trainable state plus the input whitening, self-contained for
/// inference.
struct NetworkWeights {
  ArchitectureConfig arch;
  WhiteningTransform whitening;
  WeightBlocks blocks;
};

/// Predicted deconvolution filter; dc is pinned to 1 by construction.
struct FilterPrediction {
  PackedSpectrum g;
};

/// Activations cached by a batched forward pass, consumed by backward.
struct ForwardCache {
  Eigen::MatrixXd input;             // 705 x B (whitened encodings)
  Eigen::MatrixXd a1;                // 3*group1_width x B
  Eigen::MatrixXd a2;                // 2*group2_width x B
  std::vector<Eigen::MatrixXd> fc;   // fc_depth of fc_width x B
};

// -- initialization ----------------------------------------------------------

/// He-scaled Gaussian init for the hidden layers; the output layer starts at
/// zero so the initial prediction is the keep-DC filter. Whitening starts as
/// identity and is replaced when fitted.
NetworkWeights init_weights(const ArchitectureConfig& arch, std::uint64_t seed);

/// All-zero network: predicts the keep-DC filter for every input.
NetworkWeights make_keepdc_weights(const ArchitectureConfig& arch);

/// Zero network whose output bias encodes the all-pass filter (G == 1), so
/// restoration reproduces the input patch. Useful as a pipeline probe.
NetworkWeights make_identity_filter_weights(const ArchitectureConfig& arch);

// -- forward / backward ------------------------------------------------------

/// Batched forward pass over whitened encodings (columns). Returns the raw
/// linear output, 4224 x B. `cache` may be null for inference.
Eigen::MatrixXd forward_batch(const NetworkWeights& w, const Eigen::MatrixXd& input,
                              ForwardCache* cache);

/// Gradients of sum over batch columns of <dout, out>; i.e. backprop of dout.
/// If dinput is non-null it receives the gradient w.r.t. the input encoding.
WeightBlocks backward_batch(const NetworkWeights& w, const ForwardCache& cache,
                            const Eigen::MatrixXd& dout, Eigen::MatrixXd* dinput = nullptr);

/// Single-sample convenience wrapper; encoding must already be whitened.
FilterPrediction forward(const NetworkWeights& w, const BandEncoding& encoding);

/// Interprets a 4224-vector of interleaved (re, im) as a filter, dc = 1.
FilterPrediction prediction_from_output(const Eigen::VectorXd& out);

// -- filter head -------------------------------------------------------------

/// Applies the predicted filter to a 65x65 patch: pointwise spectral product,
/// inverse transform, central 33x33 crop.
Image apply_filter(const FilterPrediction& g, const Image& y_patch);
Image apply_filter(const FilterPrediction& g, const Spectrum& y_spec);

/// Mean square error over all pixels; both images must be the same size.
double mse_loss(const Image& predicted, const Image& truth);

/// Loss and its gradient w.r.t. the raw network output for one sample:
/// runs the filter head, compares against the target patch, and chains the
/// residual back through the crop, inverse DFT, and spectral product.
/// The DC slot has no output coordinate, so it receives no gradient.
double filter_head_loss_grad(const FilterPrediction& g, const Spectrum& y_spec,
                             const Image& target, Eigen::VectorXd* dout);

// -- reference filter --------------------------------------------------------

struct WienerFilter {
  FilterPrediction g;
  int zeroed = 0;  // frequencies where the denominator vanished
};

/// Minimum-MSE restoration filter for a known kernel spectrum K, signal power
/// profile S (indexed like a Spectrum grid) and noise level sigma:
///   G[z] = conj(K[z]) S[z] / (|K[z]|^2 S[z] + sigma^2).
/// S and sigma^2 must share the same (DFT power) scaling. Zero denominators
/// yield zero coefficients and are counted. The DC entry of the result is
/// pinned to 1 to match the FilterPrediction convention.
WienerFilter wiener_coefficients(const Spectrum& kernel_spec, const std::vector<double>& s,
                                 double sigma);

// -- serialization -----------------------------------------------------------
// Versioned little-endian binary with magic "NDBW1": architecture, whitening
// transforms, dense layers in for_each_layer order, all coefficients as
// 64-bit floats, then an FNV-1a checksum of everything before it.

void save_weights(const NetworkWeights& w, const std::string& path);
NetworkWeights load_weights(const std::string& path);

}  // namespace ndeblur

#endif  // NDEBLUR_NETWORK_HPP
