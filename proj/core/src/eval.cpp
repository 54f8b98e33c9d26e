// core/src/eval.cpp

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

#include "ndeblur/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "ndeblur/whole_image.hpp"

namespace ndeblur {

AlignedMse aligned_mse(const Image& est, const Image& gt, int max_shift, int boundary) {
  if (est.width != gt.width || est.height != gt.height)
    throw std::invalid_argument("aligned_mse: size mismatch");
  if (max_shift < 0 || boundary < 0) throw std::invalid_argument("aligned_mse: bad parameters");
  if (gt.width <= 2 * (boundary + max_shift) || gt.height <= 2 * (boundary + max_shift))
    throw std::invalid_argument("aligned_mse: image too small for boundary exclusion");

  const int x0 = boundary, x1 = gt.width - boundary;
  const int y0 = boundary, y1 = gt.height - boundary;
  const double npix = static_cast<double>(x1 - x0) * (y1 - y0);

  AlignedMse best;
  best.mse = std::numeric_limits<double>::infinity();
  for (int dy = -max_shift; dy <= max_shift; ++dy) {
    for (int dx = -max_shift; dx <= max_shift; ++dx) {
      double acc = 0.0;
      for (int y = y0; y < y1; ++y) {
        const double* ge = &gt.data[static_cast<std::size_t>(y) * gt.width];
        const double* ee = &est.data[static_cast<std::size_t>(y + dy) * est.width + dx];
        for (int x = x0; x < x1; ++x) {
          const double d = ee[x] - ge[x];
          acc += d * d;
        }
      }
      const double mse = acc / npix;
      if (mse < best.mse) best = {mse, dx, dy};
    }
  }
  return best;
}

EvalResult error_ratio(const Image& est, const Image& y, const BlurKernel& k_gt,
                       const Image& gt, const NonblindConfig& deconv_cfg, int max_shift) {
  const Image oracle = deconvolve(y, k_gt, deconv_cfg);
  const AlignedMse om = aligned_mse(oracle, gt, max_shift);
  const AlignedMse em = aligned_mse(est, gt, max_shift);
  EvalResult res;
  res.mse = em.mse;
  res.oracle_mse = om.mse;
  res.shift_x = em.dx;
  res.shift_y = em.dy;
  if (om.mse <= 0.0) {
    res.valid = false;
    res.r = std::numeric_limits<double>::quiet_NaN();
    res.success = false;
    return res;
  }
  res.r = em.mse / om.mse;
  res.success = res.r <= 5.0;
  return res;
}

namespace {

std::vector<std::string> sorted_files(const std::string& dir,
                                      const std::vector<std::string>& exts) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: '" + dir + "'");
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (std::find(exts.begin(), exts.end(), ext) != exts.end())
      out.push_back(e.path().string());
  }
  std::sort(out.begin(), out.end());  // directory iteration order is unspecified
  return out;
}

}  // namespace

std::vector<NamedImage> load_images_dir(const std::string& dir) {
  std::vector<NamedImage> out;
  for (const std::string& p : sorted_files(dir, {".pgm", ".png"}))
    out.push_back({std::filesystem::path(p).filename().string(), load_image(p)});
  if (out.empty()) throw std::runtime_error("no images found in '" + dir + "'");
  return out;
}

std::vector<NamedKernel> load_kernels_dir(const std::string& dir) {
  std::vector<NamedKernel> out;
  for (const std::string& p : sorted_files(dir, {".txt", ".kernel"}))
    out.push_back({std::filesystem::path(p).filename().string(), load_kernel(p)});
  if (out.empty()) throw std::runtime_error("no kernels found in '" + dir + "'");
  return out;
}

BenchmarkSummary summarize(const std::vector<BenchmarkRow>& rows, const std::string& variant) {
  BenchmarkSummary s;
  s.variant = variant;
  std::vector<double> rs;
  int successes = 0;
  for (const BenchmarkRow& row : rows) {
    if (row.variant != variant || !row.error.empty() || !row.result.valid) continue;
    rs.push_back(row.result.r);
    successes += row.result.success ? 1 : 0;
  }
  s.count = static_cast<int>(rs.size());
  if (rs.empty()) return s;
  double sum = 0.0;
  for (double r : rs) sum += r;
  s.mean_r = sum / s.count;
  std::sort(rs.begin(), rs.end());
  const std::size_t p95 =
      std::min(rs.size() - 1, static_cast<std::size_t>(std::ceil(0.95 * rs.size())) - 1);
  s.p95_r = rs[p95];
  s.max_r = rs.back();
  s.success_rate = static_cast<double>(successes) / s.count;
  return s;
}

BenchmarkReport run_benchmark(const std::vector<NamedImage>& images,
                              const std::vector<NamedKernel>& kernels,
                              const NetworkWeights& weights, const BenchmarkConfig& cfg) {
  if (images.empty() || kernels.empty())
    throw std::invalid_argument("run_benchmark: empty corpus");
  BenchmarkReport report;
  std::uint64_t pair_idx = 0;
  for (const NamedImage& im : images) {
    for (const NamedKernel& kn : kernels) {
      Rng rng = make_rng(cfg.seed, RngStream::kBenchmark, pair_idx++);
      BenchmarkRow full{im.name, kn.name, "full", {}, ""};
      BenchmarkRow avg{im.name, kn.name, "neural_avg", {}, ""};
      bool avg_done = false;
      try {
        const Image blurred = convolve(im.image, kn.kernel, ConvolveMode::kSameReflect);
        const Image y = add_gaussian_noise(blurred, cfg.noise_sigma, rng);
        const Image xn = restore_image(y, weights, cfg.stride);
        avg.result = error_ratio(xn, y, kn.kernel, im.image, cfg.deconv, cfg.max_shift);
        avg_done = true;
        const BlurKernel khat = estimate_kernel(xn, y, cfg.estimator);
        const Image x = deconvolve(y, khat, cfg.deconv);
        full.result = error_ratio(x, y, kn.kernel, im.image, cfg.deconv, cfg.max_shift);
      } catch (const std::exception& e) {
        full.error = e.what();
        if (!avg_done) avg.error = e.what();
      }
      report.rows.push_back(std::move(full));
      report.rows.push_back(std::move(avg));
    }
  }
  report.summaries.push_back(summarize(report.rows, "full"));
  report.summaries.push_back(summarize(report.rows, "neural_avg"));
  return report;
}

void write_report_csv(const BenchmarkReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "image,kernel,r,success,shift_x,shift_y,mse,oracle_mse,variant\n";
  char buf[256];
  for (const BenchmarkRow& row : report.rows) {
    if (!row.error.empty()) {
      out << row.image << ',' << row.kernel << ",nan,0,0,0,nan,nan," << row.variant << '\n';
      continue;
    }
    std::snprintf(buf, sizeof(buf), "%.17g,%d,%d,%d,%.17g,%.17g", row.result.r,
                  row.result.success ? 1 : 0, row.result.shift_x, row.result.shift_y,
                  row.result.mse, row.result.oracle_mse);
    out << row.image << ',' << row.kernel << ',' << buf << ',' << row.variant << '\n';
  }
  if (!out) throw std::runtime_error("short write to '" + path + "'");
}

void write_summary_csv(const BenchmarkReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "variant,count,mean_r,p95_r,max_r,success_rate\n";
  char buf[192];
  for (const BenchmarkSummary& s : report.summaries) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%.17g,%.17g,%.17g,%.17g", s.variant.c_str(), s.count,
                  s.mean_r, s.p95_r, s.max_r, s.success_rate);
    out << buf << '\n';
  }
  if (!out) throw std::runtime_error("short write to '" + path + "'");
}

}  // namespace ndeblur
