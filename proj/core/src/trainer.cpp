// core/src/trainer.cpp

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

#include "ndeblur/trainer.hpp"

#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "ndeblur/threading.hpp"

namespace ndeblur {

namespace {

// Valid convolution that walks only the nonzero taps. Tap order matches the
// dense loop in convolve(), so results agree with it exactly.
struct SparseKernel {
  int size = 0;
  struct Tap {
    int x, y;
    double v;
  };
  std::vector<Tap> taps;

  explicit SparseKernel(const BlurKernel& k) : size(k.size) {
    for (int y = 0; y < k.size; ++y)
      for (int x = 0; x < k.size; ++x)
        if (k.at(x, y) != 0.0) taps.push_back({x, y, k.at(x, y)});
  }

  Image convolve_valid(const Image& img) const {
    const int ow = img.width - size + 1;
    const int oh = img.height - size + 1;
    Image out(ow, oh);
    for (const Tap& t : taps) {
      const int sx = size - 1 - t.x;
      const int sy = size - 1 - t.y;
      for (int oy = 0; oy < oh; ++oy) {
        const double* src = &img.data[static_cast<std::size_t>(oy + sy) * img.width + sx];
        double* dst = &out.data[static_cast<std::size_t>(oy) * ow];
        for (int ox = 0; ox < ow; ++ox) dst[ox] += t.v * src[ox];
      }
    }
    return out;
  }
};

TrainExample example_from_blur(const Image& sharp_t, const Image& blur, const BlurKernel& k,
                               double sigma, int ox, int oy, Rng& rng) {
  const int c = (k.size - 1) / 2;
  TrainExample ex;
  Image patch = crop(blur, ox, oy, kPatchSize, kPatchSize);
  ex.input = add_gaussian_noise(patch, sigma, rng);
  ex.target = crop(sharp_t, ox + c + 16, oy + c + 16, kOutputSize, kOutputSize);
  return ex;
}

struct EncodedExample {
  BandEncoding enc;  // whitened
  Spectrum y_spec;
  Image target;
};

// Everything about one example is a pure function of (seed, stream, index),
// so batches can be produced by any number of workers in any order.
TrainExample synthesize(const TrainingCorpus& corpus, double sigma, std::uint64_t seed,
                        RngStream stream, std::uint64_t index) {
  Rng rng = make_rng(seed, stream, index);
  std::uniform_int_distribution<std::size_t> pick_patch(0, corpus.patches.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_kernel(0, corpus.kernels.size() - 1);
  const Image& sharp = corpus.patches[pick_patch(rng)];
  const BlurKernel& k = corpus.kernels[pick_kernel(rng)];
  return make_example(rng, sharp, k, sigma);
}

EncodedExample encode_example(const TrainExample& ex, const WhiteningTransform& t) {
  EncodedExample e;
  e.y_spec = dft2(ex.input);
  e.enc = apply_whitening(t, encode_raw(ex.input, e.y_spec));
  e.target = ex.target;
  return e;
}

using Batch = std::vector<EncodedExample>;

// Ordered producer/consumer: workers claim batch indices from a counter and
// the consumer pops them strictly in order, so the training schedule does not
// depend on the worker count.
class BatchPipeline {
 public:
  BatchPipeline(const TrainingCorpus& corpus, const WhiteningTransform& whitening,
                const TrainConfig& cfg, long total_batches)
      : corpus_(corpus), whitening_(whitening), cfg_(cfg), total_(total_batches) {
    int workers = cfg.synth_workers > 0 ? cfg.synth_workers : max_threads();
    workers = std::max(1, workers - 1);  // leave a core for the optimizer
    depth_ = 2 * workers + 2;
    for (int i = 0; i < workers; ++i)
      threads_.emplace_back([this] { worker(); });
  }

  ~BatchPipeline() {
    {
      std::lock_guard<std::mutex> lock(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  Batch pop(long index) {
    std::unique_lock<std::mutex> lock(mu_);
    cv_.wait(lock, [&] { return ready_.count(index) > 0; });
    Batch b = std::move(ready_[index]);
    ready_.erase(index);
    cv_.notify_all();
    return b;
  }

 private:
  Batch produce(long b) const {
    Batch out(cfg_.batch_size);
    for (int e = 0; e < cfg_.batch_size; ++e) {
      const std::uint64_t idx =
          static_cast<std::uint64_t>(b) * cfg_.batch_size + static_cast<std::uint64_t>(e);
      out[e] = encode_example(
          synthesize(corpus_, cfg_.noise_sigma, cfg_.seed, RngStream::kTrainBatch, idx),
          whitening_);
    }
    return out;
  }

  void worker() {
    for (;;) {
      long b;
      {
        std::unique_lock<std::mutex> lock(mu_);
        cv_.wait(lock, [&] {
          return stop_ || (next_ < total_ && ready_.size() < static_cast<std::size_t>(depth_));
        });
        if (stop_ || next_ >= total_) return;
        b = next_++;
      }
      Batch batch = produce(b);
      {
        std::lock_guard<std::mutex> lock(mu_);
        ready_.emplace(b, std::move(batch));
      }
      cv_.notify_all();
    }
  }

  const TrainingCorpus& corpus_;
  const WhiteningTransform& whitening_;
  const TrainConfig& cfg_;
  const long total_;
  int depth_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::map<long, Batch> ready_;
  long next_ = 0;
  bool stop_ = false;
  std::vector<std::thread> threads_;
};

std::vector<DenseLayer*> layer_list(WeightBlocks& b) {
  std::vector<DenseLayer*> out;
  for_each_layer(b, [&](const char*, DenseLayer& l) { out.push_back(&l); });
  return out;
}

std::vector<std::string> layer_names(WeightBlocks& b) {
  std::vector<std::string> out;
  for_each_layer(b, [&](const char* n, DenseLayer&) { out.emplace_back(n); });
  return out;
}

void append_history(std::ofstream& csv, long iter, double lr, double train_loss,
                    double val_loss) {
  char buf[160];
  if (std::isnan(train_loss))
    std::snprintf(buf, sizeof(buf), "%ld,%.17g,,%.17g\n", iter, lr, val_loss);
  else
    std::snprintf(buf, sizeof(buf), "%ld,%.17g,%.17g,%.17g\n", iter, lr, train_loss, val_loss);
  csv << buf;
  csv.flush();
}

}  // namespace

TrainConfig TrainConfig::paper_scale() {
  TrainConfig c;
  c.batch_size = 512;
  c.lr = 32.0;
  c.lr_drop_every = 100000;
  c.drop_start = 800000;
  c.total_iters = 1800000;
  c.val_pairs = 3000;
  c.val_interval = 1000;
  c.checkpoint_interval = 10000;
  return c;
}

TrainConfig TrainConfig::desk_scale() { return TrainConfig(); }

void TrainConfig::validate() const {
  if (batch_size < 1 || total_iters < 0 || val_pairs < 1 || val_interval < 1 ||
      checkpoint_interval < 1 || lr_drop_every < 1)
    throw std::invalid_argument("train config: counts must be positive");
  if (lr <= 0.0 || lr_drop_factor < 1.0) throw std::invalid_argument("train config: bad rates");
  if (momentum < 0.0 || momentum >= 1.0)
    throw std::invalid_argument("train config: momentum must be in [0, 1)");
  if (noise_sigma < 0.0) throw std::invalid_argument("train config: negative noise");
}

double TrainConfig::learning_rate(long iter) const {
  if (iter <= drop_start) return lr;
  const long drops = (iter - drop_start) / lr_drop_every;
  return lr / std::pow(lr_drop_factor, static_cast<double>(drops));
}

TrainingCorpus TrainingCorpus::build(const std::vector<Image>& images,
                                     std::vector<BlurKernel> kernels) {
  TrainingCorpus c;
  c.kernels = std::move(kernels);
  if (c.kernels.empty()) throw std::invalid_argument("corpus: no kernels");
  for (const BlurKernel& k : c.kernels) c.max_kernel = std::max(c.max_kernel, k.size);
  c.patch_size = kPatchSize + c.max_kernel - 1;
  for (const Image& img : images) {
    const int nx = img.width / c.patch_size;
    const int ny = img.height / c.patch_size;
    for (int ty = 0; ty < ny; ++ty)
      for (int tx = 0; tx < nx; ++tx)
        c.patches.push_back(
            crop(img, tx * c.patch_size, ty * c.patch_size, c.patch_size, c.patch_size));
  }
  c.validate();
  return c;
}

void TrainingCorpus::validate() const {
  if (patches.empty()) throw std::invalid_argument("corpus: no usable patches (images too small?)");
  if (kernels.empty()) throw std::invalid_argument("corpus: no kernels");
  if (patch_size < kPatchSize + max_kernel - 1)
    throw std::invalid_argument("corpus: patches too small for the largest kernel");
  for (const Image& p : patches)
    if (p.width != patch_size || p.height != patch_size)
      throw std::invalid_argument("corpus: inconsistent patch sizes");
}

TrainExample make_example_at(const Image& sharp, const BlurKernel& k, double sigma,
                             int dihedral, int ox, int oy, Rng& noise_rng) {
  if (sharp.width < kPatchSize + k.size - 1 || sharp.height < kPatchSize + k.size - 1)
    throw std::invalid_argument("make_example: sharp patch too small for this kernel");
  const Image sharp_t = apply_dihedral(sharp, dihedral);
  const Image blur = SparseKernel(k).convolve_valid(sharp_t);
  if (ox < 0 || oy < 0 || ox > blur.width - kPatchSize || oy > blur.height - kPatchSize)
    throw std::invalid_argument("make_example: crop offset out of range");
  return example_from_blur(sharp_t, blur, k, sigma, ox, oy, noise_rng);
}

TrainExample make_example(Rng& rng, const Image& sharp, const BlurKernel& k, double sigma) {
  if (sharp.width < kPatchSize + k.size - 1 || sharp.height < kPatchSize + k.size - 1)
    throw std::invalid_argument("make_example: sharp patch too small for this kernel");
  std::uniform_int_distribution<int> pick_d(0, 7);
  const int d = pick_d(rng);
  const Image sharp_t = apply_dihedral(sharp, d);
  const Image blur = SparseKernel(k).convolve_valid(sharp_t);
  std::uniform_int_distribution<int> pick_ox(0, blur.width - kPatchSize);
  std::uniform_int_distribution<int> pick_oy(0, blur.height - kPatchSize);
  const int ox = pick_ox(rng);
  const int oy = pick_oy(rng);
  return example_from_blur(sharp_t, blur, k, sigma, ox, oy, rng);
}

void sgd_step(WeightBlocks& weights, const WeightBlocks& grads, WeightBlocks& velocity,
              double lr, double momentum) {
  auto ws = layer_list(weights);
  auto gs = layer_list(const_cast<WeightBlocks&>(grads));
  auto vs = layer_list(velocity);
  const auto names = layer_names(weights);
  if (ws.size() != gs.size() || ws.size() != vs.size())
    throw std::invalid_argument("sgd_step: block structure mismatch");
  for (std::size_t i = 0; i < ws.size(); ++i) {
    if (!gs[i]->weight.allFinite() || !gs[i]->bias.allFinite())
      throw std::runtime_error("non-finite gradient in layer " + names[i]);
    if (ws[i]->weight.rows() != gs[i]->weight.rows() ||
        ws[i]->weight.cols() != gs[i]->weight.cols())
      throw std::invalid_argument("sgd_step: shape mismatch in layer " + names[i]);
    vs[i]->weight = momentum * vs[i]->weight - lr * gs[i]->weight;
    vs[i]->bias = momentum * vs[i]->bias - lr * gs[i]->bias;
    ws[i]->weight += vs[i]->weight;
    ws[i]->bias += vs[i]->bias;
  }
}

TrainResult train(const TrainingCorpus& corpus, const TrainingCorpus& val_corpus,
                  const ArchitectureConfig& arch, const TrainConfig& cfg,
                  const std::string& weights_out, const std::string& history_csv,
                  const std::function<void(long, double)>& progress) {
  cfg.validate();
  arch.validate();
  corpus.validate();
  val_corpus.validate();

  NetworkWeights net = init_weights(arch, cfg.seed);

  // Whitening from raw encodings of training-style examples.
  {
    const int n = std::max(cfg.whitening_samples, 10 * BandEncoding::kRingDim + 32);
    std::vector<BandEncoding> samples(n);
    parallel_chunks(n, [&](int, std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i)
        samples[i] = encode_raw(
            synthesize(corpus, cfg.noise_sigma, cfg.seed, RngStream::kWhitening, i).input);
    });
    net.whitening = fit_whitening(samples);
  }

  // Frozen validation pairs; the same examples are scored at every cadence so
  // curves are comparable across iterations.
  std::vector<EncodedExample> val(cfg.val_pairs);
  parallel_chunks(val.size(), [&](int, std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i)
      val[i] = encode_example(
          synthesize(val_corpus, cfg.noise_sigma, cfg.seed, RngStream::kValidation, i),
          net.whitening);
  });

  auto eval_validation = [&](const NetworkWeights& w) {
    std::vector<double> losses(val.size());
    parallel_chunks(val.size(), [&](int, std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        const FilterPrediction p = forward(w, val[i].enc);
        losses[i] = filter_head_loss_grad(p, val[i].y_spec, val[i].target, nullptr);
      }
    });
    double sum = 0.0;
    for (double l : losses) sum += l;  // fixed order
    return sum / static_cast<double>(losses.size());
  };

  // keep-DC reference: what the untrained (zero) network predicts
  const NetworkWeights keepdc = [&] {
    NetworkWeights w = make_keepdc_weights(arch);
    w.whitening = net.whitening;
    return w;
  }();
  const double baseline = eval_validation(keepdc);

  std::ofstream csv(history_csv);
  if (!csv) throw std::runtime_error("cannot write '" + history_csv + "'");
  csv << "iter,lr,train_loss,val_loss\n";
  append_history(csv, 0, cfg.learning_rate(0),
                 std::numeric_limits<double>::quiet_NaN(), baseline);

  TrainResult result;
  result.baseline_val_loss = baseline;
  result.best = net;
  result.best_val_loss = baseline;
  result.best_iter = 0;

  if (cfg.total_iters == 0) {
    save_weights(net, weights_out);
    return result;
  }

  WeightBlocks velocity;  // zero, shaped like the weights
  {
    NetworkWeights z = make_keepdc_weights(arch);
    velocity = z.blocks;
  }

  const std::string ckpt_path = weights_out + ".ckpt";
  BatchPipeline pipeline(corpus, net.whitening, cfg, cfg.total_iters);
  double train_acc = 0.0;
  long train_count = 0;

  for (long iter = 1; iter <= cfg.total_iters; ++iter) {
    const Batch batch = pipeline.pop(iter - 1);
    const int bsz = static_cast<int>(batch.size());

    Eigen::MatrixXd input(BandEncoding::kTotalDim, bsz);
    for (int e = 0; e < bsz; ++e) input.col(e) = flatten(batch[e].enc);

    ForwardCache cache;
    const Eigen::MatrixXd out = forward_batch(net, input, &cache);

    Eigen::MatrixXd dout(arch.output_dim(), bsz);
    std::vector<double> losses(bsz);
    parallel_chunks(bsz, [&](int, std::size_t lo, std::size_t hi) {
      for (std::size_t e = lo; e < hi; ++e) {
        Eigen::VectorXd g;
        losses[e] = filter_head_loss_grad(prediction_from_output(out.col(e)), batch[e].y_spec,
                                          batch[e].target, &g);
        dout.col(e) = g;
      }
    });
    double batch_loss = 0.0;
    for (double l : losses) batch_loss += l;
    batch_loss /= bsz;
    if (!std::isfinite(batch_loss)) {
      save_weights(net, ckpt_path);
      throw std::runtime_error("training diverged (non-finite loss) at iteration " +
                               std::to_string(iter) + "; last checkpoint kept");
    }
    train_acc += batch_loss;
    ++train_count;

    dout /= static_cast<double>(bsz);  // mean-over-batch gradient
    const WeightBlocks grads = backward_batch(net, cache, dout);
    sgd_step(net.blocks, grads, velocity, cfg.learning_rate(iter), cfg.momentum);

    const bool last = iter == cfg.total_iters;
    if (iter % cfg.val_interval == 0 || last) {
      const double val_loss = eval_validation(net);
      if (!std::isfinite(val_loss)) {
        save_weights(net, ckpt_path);
        throw std::runtime_error("validation diverged at iteration " + std::to_string(iter));
      }
      append_history(csv, iter, cfg.learning_rate(iter), train_acc / train_count, val_loss);
      train_acc = 0.0;
      train_count = 0;
      if (val_loss < result.best_val_loss) {
        result.best = net;
        result.best_val_loss = val_loss;
        result.best_iter = iter;
        save_weights(result.best, weights_out);
      }
      if (progress) progress(iter, val_loss);
    }
    if (iter % cfg.checkpoint_interval == 0 || last) save_weights(net, ckpt_path);
  }

  save_weights(result.best, weights_out);
  return result;
}

}  // namespace ndeblur
