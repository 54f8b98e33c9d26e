// core/src/network.cpp

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

#include "ndeblur/network.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include "ndeblur/rng.hpp"

namespace ndeblur {

namespace {

constexpr char kMagic[5] = {'N', 'D', 'B', 'W', '1'};

Eigen::MatrixXd relu(Eigen::MatrixXd m) {
  return m.cwiseMax(0.0);
}

void check_finite(const char* name, const DenseLayer& l) {
  if (!l.weight.allFinite() || !l.bias.allFinite())
    throw std::runtime_error(std::string("non-finite weights in layer ") + name);
}

DenseLayer zero_layer(int out, int in) {
  return {Eigen::MatrixXd::Zero(out, in), Eigen::VectorXd::Zero(out)};
}

WeightBlocks zero_blocks(const ArchitectureConfig& a) {
  WeightBlocks b;
  for (int i = 0; i < 3; ++i)
    b.layer1[i] = zero_layer(a.group1_width, ArchitectureConfig::kPairLen[i]);
  for (int i = 0; i < 2; ++i) b.layer2[i] = zero_layer(a.group2_width, 2 * a.group1_width);
  b.fc.resize(a.fc_depth);
  int in = 2 * a.group2_width;
  for (int i = 0; i < a.fc_depth; ++i) {
    b.fc[i] = zero_layer(a.fc_width, in);
    in = a.fc_width;
  }
  b.output = zero_layer(a.output_dim(), in);
  return b;
}

}  // namespace

void ArchitectureConfig::validate() const {
  if (group1_width < 1 || group2_width < 1 || fc_width < 1)
    throw std::invalid_argument("layer widths must be at least 1");
  if (fc_depth < 1) throw std::invalid_argument("fc_depth must be at least 1");
  if (output_half_len != 2112)
    throw std::invalid_argument("output_half_len must be 2112 for 65x65 patches");
}

NetworkWeights init_weights(const ArchitectureConfig& arch, std::uint64_t seed) {
  arch.validate();
  NetworkWeights w;
  w.arch = arch;
  w.whitening = WhiteningTransform::identity();
  w.blocks = zero_blocks(arch);
  Rng rng = make_rng(seed, RngStream::kWeightInit);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for_each_layer(w.blocks, [&](const char* name, DenseLayer& l) {
    if (std::strcmp(name, "output") == 0) return;  // keep-DC start
    const double scale = std::sqrt(2.0 / static_cast<double>(l.weight.cols()));
    for (Eigen::Index i = 0; i < l.weight.rows(); ++i)
      for (Eigen::Index j = 0; j < l.weight.cols(); ++j) l.weight(i, j) = scale * gauss(rng);
  });
  return w;
}

NetworkWeights make_keepdc_weights(const ArchitectureConfig& arch) {
  arch.validate();
  NetworkWeights w;
  w.arch = arch;
  w.whitening = WhiteningTransform::identity();
  w.blocks = zero_blocks(arch);
  return w;
}

NetworkWeights make_identity_filter_weights(const ArchitectureConfig& arch) {
  NetworkWeights w = make_keepdc_weights(arch);
  for (int j = 0; j < arch.output_half_len; ++j) w.blocks.output.bias[2 * j] = 1.0;
  return w;
}

Eigen::MatrixXd forward_batch(const NetworkWeights& w, const Eigen::MatrixXd& input,
                              ForwardCache* cache) {
  const ArchitectureConfig& a = w.arch;
  if (input.rows() != BandEncoding::kTotalDim)
    throw std::invalid_argument("forward: encoding dimension mismatch");
  const Eigen::Index batch = input.cols();

  Eigen::MatrixXd a1(3 * a.group1_width, batch);
  for (int g = 0; g < 3; ++g) {
    const auto& l = w.blocks.layer1[g];
    a1.middleRows(g * a.group1_width, a.group1_width) = relu(
        (l.weight * input.middleRows(ArchitectureConfig::kPairOffset[g],
                                     ArchitectureConfig::kPairLen[g]))
            .colwise() +
        l.bias);
  }

  Eigen::MatrixXd a2(2 * a.group2_width, batch);
  for (int g = 0; g < 2; ++g) {
    const auto& l = w.blocks.layer2[g];
    a2.middleRows(g * a.group2_width, a.group2_width) =
        relu((l.weight * a1.middleRows(g * a.group1_width, 2 * a.group1_width)).colwise() +
             l.bias);
  }

  std::vector<Eigen::MatrixXd> fc_acts;
  fc_acts.reserve(a.fc_depth);
  const Eigen::MatrixXd* prev = &a2;
  for (int i = 0; i < a.fc_depth; ++i) {
    const auto& l = w.blocks.fc[i];
    fc_acts.push_back(relu((l.weight * *prev).colwise() + l.bias));
    prev = &fc_acts.back();
  }

  Eigen::MatrixXd out = (w.blocks.output.weight * *prev).colwise() + w.blocks.output.bias;
  if (cache) {
    cache->input = input;
    cache->a1 = std::move(a1);
    cache->a2 = std::move(a2);
    cache->fc = std::move(fc_acts);
  }
  return out;
}

WeightBlocks backward_batch(const NetworkWeights& w, const ForwardCache& cache,
                            const Eigen::MatrixXd& dout, Eigen::MatrixXd* dinput) {
  const ArchitectureConfig& a = w.arch;
  if (dout.rows() != a.output_dim() || dout.cols() != cache.input.cols())
    throw std::invalid_argument("backward: stale or mismatched cache");

  WeightBlocks g = zero_blocks(a);
  const Eigen::MatrixXd& last_fc = cache.fc.back();

  g.output.weight = dout * last_fc.transpose();
  g.output.bias = dout.rowwise().sum();
  Eigen::MatrixXd d = w.blocks.output.weight.transpose() * dout;

  for (int i = a.fc_depth - 1; i >= 0; --i) {
    // ReLU subgradient from the cached post-activation sign
    d = d.cwiseProduct((cache.fc[i].array() > 0.0).cast<double>().matrix());
    const Eigen::MatrixXd& prev = i == 0 ? cache.a2 : cache.fc[i - 1];
    g.fc[i].weight = d * prev.transpose();
    g.fc[i].bias = d.rowwise().sum();
    d = w.blocks.fc[i].weight.transpose() * d;
  }

  Eigen::MatrixXd da1 = Eigen::MatrixXd::Zero(cache.a1.rows(), cache.a1.cols());
  for (int gi = 0; gi < 2; ++gi) {
    Eigen::MatrixXd dg = d.middleRows(gi * a.group2_width, a.group2_width)
                             .cwiseProduct((cache.a2.middleRows(gi * a.group2_width, a.group2_width)
                                                .array() > 0.0)
                                               .cast<double>()
                                               .matrix());
    const auto pair = cache.a1.middleRows(gi * a.group1_width, 2 * a.group1_width);
    g.layer2[gi].weight = dg * pair.transpose();
    g.layer2[gi].bias = dg.rowwise().sum();
    da1.middleRows(gi * a.group1_width, 2 * a.group1_width) +=
        w.blocks.layer2[gi].weight.transpose() * dg;
  }

  if (dinput) *dinput = Eigen::MatrixXd::Zero(cache.input.rows(), cache.input.cols());
  for (int gi = 0; gi < 3; ++gi) {
    Eigen::MatrixXd dg = da1.middleRows(gi * a.group1_width, a.group1_width)
                             .cwiseProduct((cache.a1.middleRows(gi * a.group1_width, a.group1_width)
                                                .array() > 0.0)
                                               .cast<double>()
                                               .matrix());
    const auto seg = cache.input.middleRows(ArchitectureConfig::kPairOffset[gi],
                                            ArchitectureConfig::kPairLen[gi]);
    g.layer1[gi].weight = dg * seg.transpose();
    g.layer1[gi].bias = dg.rowwise().sum();
    if (dinput)
      dinput->middleRows(ArchitectureConfig::kPairOffset[gi], ArchitectureConfig::kPairLen[gi]) +=
          w.blocks.layer1[gi].weight.transpose() * dg;
  }
  return g;
}

FilterPrediction prediction_from_output(const Eigen::VectorXd& out) {
  if (out.size() % 2 != 0) throw std::invalid_argument("output length must be even");
  FilterPrediction p;
  p.g.size = kPatchSize;
  p.g.dc = 1.0;
  const int n = static_cast<int>(out.size() / 2);
  p.g.half.resize(n);
  for (int j = 0; j < n; ++j) p.g.half[j] = Complex(out[2 * j], out[2 * j + 1]);
  return p;
}

FilterPrediction forward(const NetworkWeights& w, const BandEncoding& encoding) {
  Eigen::MatrixXd out = forward_batch(w, flatten(encoding), nullptr);
  return prediction_from_output(out.col(0));
}

Image apply_filter(const FilterPrediction& g, const Spectrum& y_spec) {
  if (y_spec.size != kPatchSize || g.g.size != kPatchSize)
    throw std::invalid_argument("apply_filter: expected 65-point spectra");
  Spectrum gs = unpack(g.g);
  Spectrum prod(kPatchSize);
  for (std::size_t i = 0; i < prod.coeffs.size(); ++i)
    prod.coeffs[i] = gs.coeffs[i] * y_spec.coeffs[i];
  prod.real_origin = y_spec.real_origin;
  Image full = idft2(prod);
  return crop(full, 16, 16, kOutputSize, kOutputSize);
}

Image apply_filter(const FilterPrediction& g, const Image& y_patch) {
  return apply_filter(g, dft2(y_patch));
}

double mse_loss(const Image& predicted, const Image& truth) {
  if (predicted.width != truth.width || predicted.height != truth.height)
    throw std::invalid_argument("mse_loss: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted.data[i] - truth.data[i];
    acc += d * d;
  }
  return acc / static_cast<double>(predicted.size());
}

double filter_head_loss_grad(const FilterPrediction& g, const Spectrum& y_spec,
                             const Image& target, Eigen::VectorXd* dout) {
  if (target.width != kOutputSize || target.height != kOutputSize)
    throw std::invalid_argument("filter head: target must be 33x33");
  const Image xhat = apply_filter(g, y_spec);
  const double loss = mse_loss(xhat, target);
  if (!dout) return loss;

  // d loss / d xhat, zero-padded back onto the 65x65 patch grid
  const double scale = 2.0 / static_cast<double>(kOutputSize * kOutputSize);
  Image u(kPatchSize, kPatchSize, 0.0);
  for (int y = 0; y < kOutputSize; ++y)
    for (int x = 0; x < kOutputSize; ++x)
      u.at(16 + x, 16 + y) = scale * (xhat.at(x, y) - target.at(x, y));

  // chain through the inverse DFT and the spectral product; per conjugate
  // pair the two mirror terms combine into twice the real/imag parts.
  const Spectrum p = dft2(u);
  const double inv_n2 = 1.0 / static_cast<double>(kPatchSize * kPatchSize);
  dout->resize(2 * static_cast<Eigen::Index>(g.g.half.size()));
  std::size_t j = 0;
  for (const FreqIndex& z : half_plane_indices(kPatchSize)) {
    const Complex q =
        y_spec.at(z.z1, z.z2) * std::conj(p.at(z.z1, z.z2)) * (2.0 * inv_n2);
    (*dout)[2 * j] = q.real();
    (*dout)[2 * j + 1] = -q.imag();
    ++j;
  }
  return loss;
}

WienerFilter wiener_coefficients(const Spectrum& kernel_spec, const std::vector<double>& s,
                                 double sigma) {
  if (s.size() != kernel_spec.coeffs.size())
    throw std::invalid_argument("wiener: spectral profile size mismatch");
  if (sigma < 0.0) throw std::invalid_argument("wiener: sigma must be non-negative");
  const int n = kernel_spec.size;
  const int h = (n - 1) / 2;
  WienerFilter out;
  out.g.g.size = n;
  out.g.g.dc = 1.0;
  const double s2 = sigma * sigma;
  for (int z1 = -h; z1 <= h; ++z1) {
    for (int z2 = -h; z2 <= h; ++z2) {
      if (!in_half_plane({z1, z2})) continue;
      const std::size_t i = kernel_spec.index(z1, z2);
      const Complex k = kernel_spec.coeffs[i];
      const double denom = std::norm(k) * s[i] + s2;
      if (denom <= 0.0) {
        out.g.g.half.push_back(Complex(0.0, 0.0));
        if (s[i] > 0.0) ++out.zeroed;
        continue;
      }
      out.g.g.half.push_back(std::conj(k) * s[i] / denom);
    }
  }
  return out;
}

// -- serialization ------------------------------------------------------------

namespace {

class Fnv1a {
 public:
  void update(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001b3ULL;
    }
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw std::runtime_error("cannot write '" + path + "'");
  }
  void raw(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    hash_.update(data, n);
  }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void matrix(const Eigen::MatrixXd& m) {
    u32(static_cast<std::uint32_t>(m.rows()));
    u32(static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) f64(m(i, j));
  }
  void vector(const Eigen::VectorXd& v) {
    u32(static_cast<std::uint32_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) f64(v[i]);
  }
  void finish() {
    const std::uint64_t h = hash_.value();
    out_.write(reinterpret_cast<const char*>(&h), sizeof h);
    if (!out_) throw std::runtime_error("short write to '" + path_ + "'");
  }

 private:
  std::ofstream out_;
  std::string path_;
  Fnv1a hash_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw std::runtime_error("cannot read '" + path + "'");
  }
  void raw(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n)
      throw std::runtime_error("truncated weights file '" + path_ + "'");
    hash_.update(data, n);
  }
  std::uint32_t u32() {
    std::uint32_t v;
    raw(&v, sizeof v);
    return v;
  }
  double f64() {
    double v;
    raw(&v, sizeof v);
    return v;
  }
  Eigen::MatrixXd matrix() {
    const std::uint32_t r = u32(), c = u32();
    if (r > (1u << 20) || c > (1u << 20))
      throw std::runtime_error("implausible matrix shape in '" + path_ + "'");
    Eigen::MatrixXd m(r, c);
    for (std::uint32_t i = 0; i < r; ++i)
      for (std::uint32_t j = 0; j < c; ++j) m(i, j) = f64();
    return m;
  }
  Eigen::VectorXd vector() {
    const std::uint32_t n = u32();
    if (n > (1u << 24)) throw std::runtime_error("implausible vector length in '" + path_ + "'");
    Eigen::VectorXd v(n);
    for (std::uint32_t i = 0; i < n; ++i) v[i] = f64();
    return v;
  }
  void verify_checksum() {
    const std::uint64_t expect = hash_.value();
    std::uint64_t stored;
    in_.read(reinterpret_cast<char*>(&stored), sizeof stored);
    if (static_cast<std::size_t>(in_.gcount()) != sizeof stored || stored != expect)
      throw std::runtime_error("weights checksum mismatch in '" + path_ + "'");
  }

 private:
  std::ifstream in_;
  std::string path_;
  Fnv1a hash_;
};

}  // namespace

void save_weights(const NetworkWeights& w, const std::string& path) {
  w.arch.validate();
  Writer out(path);
  out.raw(kMagic, sizeof kMagic);
  out.u32(static_cast<std::uint32_t>(w.arch.group1_width));
  out.u32(static_cast<std::uint32_t>(w.arch.group2_width));
  out.u32(static_cast<std::uint32_t>(w.arch.fc_width));
  out.u32(static_cast<std::uint32_t>(w.arch.fc_depth));
  out.u32(static_cast<std::uint32_t>(w.arch.output_half_len));
  for (const auto& band : w.whitening.bands) {
    out.vector(band.mean);
    out.matrix(band.transform);
  }
  for_each_layer(const_cast<WeightBlocks&>(w.blocks), [&](const char* name, DenseLayer& l) {
    check_finite(name, l);
    out.matrix(l.weight);
    out.vector(l.bias);
  });
  out.finish();
}

NetworkWeights load_weights(const std::string& path) {
  Reader in(path);
  char magic[5];
  in.raw(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw std::runtime_error("'" + path + "' is not an NDBW1 weights file");
  NetworkWeights w;
  w.arch.group1_width = static_cast<int>(in.u32());
  w.arch.group2_width = static_cast<int>(in.u32());
  w.arch.fc_width = static_cast<int>(in.u32());
  w.arch.fc_depth = static_cast<int>(in.u32());
  w.arch.output_half_len = static_cast<int>(in.u32());
  w.arch.validate();
  for (auto& band : w.whitening.bands) {
    band.mean = in.vector();
    band.transform = in.matrix();
  }
  w.blocks = zero_blocks(w.arch);
  for_each_layer(w.blocks, [&](const char* name, DenseLayer& l) {
    Eigen::MatrixXd m = in.matrix();
    Eigen::VectorXd b = in.vector();
    if (m.rows() != l.weight.rows() || m.cols() != l.weight.cols() || b.size() != l.bias.size())
      throw std::runtime_error("layer shape mismatch in '" + path + "' at " + name);
    l.weight = std::move(m);
    l.bias = std::move(b);
    check_finite(name, l);
  });
  in.verify_checksum();
  return w;
}

}  // namespace ndeblur
