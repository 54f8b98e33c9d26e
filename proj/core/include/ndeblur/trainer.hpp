// ndeblur/trainer.hpp

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

#ifndef NDEBLUR_TRAINER_HPP
#define NDEBLUR_TRAINER_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ndeblur/network.hpp"

namespace ndeblur {

struct TrainConfig {
  int batch_size = 32;
  double momentum = 0.9;
  double lr = 1.0;
  int lr_drop_every = 2000;
  double lr_drop_factor = 1.4142135623730951;  // sqrt(2)
  long drop_start = 12000;
  long total_iters = 20000;
  double noise_sigma = 0.01;
  std::uint64_t seed = 0;
  int val_pairs = 512;
  int val_interval = 100;
  int checkpoint_interval = 2000;
  int whitening_samples = 2112;  // >= 10x the widest band
  int synth_workers = 0;         // 0: use the global thread cap

  /// Matches the published protocol: batch 512, lr 32, 1.8M iterations,
  /// sqrt(2) decay every 100k starting at 800k.
  static TrainConfig paper_scale();
  /// Small setup that trains in minutes on a workstation.
  static TrainConfig desk_scale();

  void validate() const;
  double learning_rate(long iter) const;
};

/// In-memory pools of sharp patches and kernels; training pairs are drawn
/// and degraded on the fly. Training and validation corpora must come from
/// disjoint image sets (caller's contract).
struct TrainingCorpus {
  std::vector<Image> patches;      // square, all the same size
  std::vector<BlurKernel> kernels;
  int patch_size = 0;
  int max_kernel = 0;

  /// Tiles each source image into the largest number of patch_size squares.
  /// patch_size must be at least 65 + max kernel size - 1.
  static TrainingCorpus build(const std::vector<Image>& images,
                              std::vector<BlurKernel> kernels);
  void validate() const;
};

struct TrainExample {
  Image input;   // 65x65, blurred + noise
  Image target;  // 33x33 sharp, aligned to the centered kernel's phase
};

/// Degrades one sharp patch: random dihedral flip/rotation, valid convolution
/// with the kernel, random 65x65 crop, Gaussian noise. The target is the
/// sharp 33x33 window that corresponds to the input's central patch under
/// the kernel's canonical (center-of-mass) translation.
TrainExample make_example(Rng& rng, const Image& sharp, const BlurKernel& k, double sigma);

/// Deterministic variant with the dihedral element and crop offset pinned;
/// rng only supplies noise. Exposed so tests can cross-check alignment.
TrainExample make_example_at(const Image& sharp, const BlurKernel& k, double sigma,
                             int dihedral, int ox, int oy, Rng& noise_rng);

/// Classical momentum update: v <- momentum * v - lr * grad; w <- w + v.
/// Throws (naming the layer) on non-finite gradients.
void sgd_step(WeightBlocks& weights, const WeightBlocks& grads, WeightBlocks& velocity,
              double lr, double momentum);

struct TrainResult {
  NetworkWeights best;
  double baseline_val_loss = 0.0;  // keep-DC filter on the validation set
  double best_val_loss = 0.0;
  long best_iter = 0;
};

/// Runs the full loop: whitening fit, frozen validation set, SGD, periodic
/// checkpoints plus a checkpoint at every new validation minimum, and an
/// append-only history CSV (iter, lr, train_loss, val_loss). Returns (and
/// leaves at weights_out) the weights of the best validation checkpoint.
/// Aborts preserving the last checkpoint if the loss turns non-finite.
TrainResult train(const TrainingCorpus& corpus, const TrainingCorpus& val_corpus,
                  const ArchitectureConfig& arch, const TrainConfig& cfg,
                  const std::string& weights_out, const std::string& history_csv,
                  const std::function<void(long, double)>& progress = nullptr);

}  // namespace ndeblur

#endif  // NDEBLUR_TRAINER_HPP
