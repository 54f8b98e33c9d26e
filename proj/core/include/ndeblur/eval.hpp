// ndeblur/eval.hpp

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

#ifndef NDEBLUR_EVAL_HPP
#define NDEBLUR_EVAL_HPP

#include <string>
#include <vector>

#include "ndeblur/kernel_estimator.hpp"
#include "ndeblur/network.hpp"
#include "ndeblur/nonblind.hpp"

namespace ndeblur {

struct AlignedMse {
  double mse = 0.0;
  int dx = 0, dy = 0;
};

/// MSE between est and gt over the gt interior (a `boundary`-pixel frame is
/// ignored), minimized over integer shifts of est in [-max_shift, max_shift]^2.
/// Ties resolve to the first shift in row-major scan order.
AlignedMse aligned_mse(const Image& est, const Image& gt, int max_shift = 10, int boundary = 50);

struct EvalResult {
  double mse = 0.0;
  double oracle_mse = 0.0;
  double r = 0.0;
  bool success = false;  // r <= 5
  int shift_x = 0, shift_y = 0;
  bool valid = true;  // false when the oracle MSE is zero (degenerate pair)
};

/// Error ratio r: aligned MSE of the estimate over the aligned MSE of
/// non-blind deconvolution with the ground-truth kernel (same deconvolver on
/// both sides). r <= 5 counts as success.
EvalResult error_ratio(const Image& est, const Image& y, const BlurKernel& k_gt,
                       const Image& gt, const NonblindConfig& deconv_cfg, int max_shift = 10);

struct NamedImage {
  std::string name;
  Image image;
};
struct NamedKernel {
  std::string name;
  BlurKernel kernel;
};

/// Sorted-by-filename loads of every PGM/PNG (respectively kernel text file)
/// in a directory.
std::vector<NamedImage> load_images_dir(const std::string& dir);
std::vector<NamedKernel> load_kernels_dir(const std::string& dir);

struct BenchmarkConfig {
  double noise_sigma = 0.01;
  int stride = 4;
  int max_shift = 10;
  std::uint64_t seed = 0;
  NonblindConfig deconv;
  EstimatorConfig estimator;
};

struct BenchmarkRow {
  std::string image, kernel, variant;  // variant: "full" or "neural_avg"
  EvalResult result;
  std::string error;  // non-empty when the pair failed; the run continues
};

struct BenchmarkSummary {
  std::string variant;
  int count = 0;
  double mean_r = 0.0, p95_r = 0.0, max_r = 0.0, success_rate = 0.0;
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;
  std::vector<BenchmarkSummary> summaries;
};

/// For every (image, kernel) pair: synthesize the observation (same-reflect
/// blur + noise), run the full pipeline (restore, kernel estimate, non-blind
/// deconvolution) and score both the final estimate and the patch-average
/// intermediate against the shared ground-truth-kernel oracle.
BenchmarkReport run_benchmark(const std::vector<NamedImage>& images,
                              const std::vector<NamedKernel>& kernels,
                              const NetworkWeights& weights, const BenchmarkConfig& cfg);

/// CSV with columns image,kernel,r,success,shift_x,shift_y,mse,oracle_mse,variant.
void write_report_csv(const BenchmarkReport& report, const std::string& path);

/// Variant,count,mean_r,p95_r,max_r,success_rate.
void write_summary_csv(const BenchmarkReport& report, const std::string& path);

BenchmarkSummary summarize(const std::vector<BenchmarkRow>& rows, const std::string& variant);

}  // namespace ndeblur

#endif  // NDEBLUR_EVAL_HPP
