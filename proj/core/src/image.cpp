// core/src/image.cpp

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

#include "ndeblur/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace ndeblur {

namespace {

[[noreturn]] void fail_unreadable(const std::string& path, const std::string& why) {
  throw std::runtime_error("unreadable file '" + path + "': " + why);
}

bool has_suffix(const std::string& s, const std::string& suf) {
  if (s.size() < suf.size()) return false;
  std::string tail = s.substr(s.size() - suf.size());
  std::transform(tail.begin(), tail.end(), tail.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return tail == suf;
}

// PNM-style header token reader: skips whitespace and '#' comments.
int next_pnm_int(std::istream& in, const std::string& path) {
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  if (c == EOF || !std::isdigit(c)) fail_unreadable(path, "truncated or malformed PGM header");
  long v = 0;
  while (c != EOF && std::isdigit(c)) {
    v = v * 10 + (c - '0');
    if (v > 1 << 30) fail_unreadable(path, "header value out of range");
    c = in.get();
  }
  return static_cast<int>(v);
}

Image load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_unreadable(path, "cannot open");
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5')
    fail_unreadable(path, "not a binary PGM (P5)");
  const int w = next_pnm_int(in, path);
  const int h = next_pnm_int(in, path);
  const int maxval = next_pnm_int(in, path);
  if (w <= 0 || h <= 0) fail_unreadable(path, "bad dimensions");
  if (maxval <= 0 || maxval > 65535)
    throw std::runtime_error("unsupported bit depth in '" + path + "': maxval " +
                             std::to_string(maxval));
  // header ends with exactly one whitespace byte, already consumed by the
  // integer reader's terminating character.
  const std::size_t n = static_cast<std::size_t>(w) * h;
  const int bytes = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> raw(n * bytes);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size())
    fail_unreadable(path, "truncated pixel data");
  Image img(w, h);
  const double scale = 1.0 / maxval;
  if (bytes == 1) {
    for (std::size_t i = 0; i < n; ++i) img.data[i] = raw[i] * scale;
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      // 16-bit PNM samples are big-endian
      const unsigned v = (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1];
      img.data[i] = v * scale;
    }
  }
  return img;
}

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngReader() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

Image load_png(const std::string& path) {
  PngReader r;
  r.fp = std::fopen(path.c_str(), "rb");
  if (!r.fp) fail_unreadable(path, "cannot open");
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, r.fp) != 8 || png_sig_cmp(sig, 0, 8))
    fail_unreadable(path, "not a PNG");
  r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!r.png) fail_unreadable(path, "libpng init failed");
  r.info = png_create_info_struct(r.png);
  if (!r.info) fail_unreadable(path, "libpng init failed");
  if (setjmp(png_jmpbuf(r.png))) fail_unreadable(path, "libpng decode error");
  png_init_io(r.png, r.fp);
  png_set_sig_bytes(r.png, 8);
  png_read_info(r.png, r.info);

  const png_uint_32 w = png_get_image_width(r.png, r.info);
  const png_uint_32 h = png_get_image_height(r.png, r.info);
  const int depth = png_get_bit_depth(r.png, r.info);
  const int color = png_get_color_type(r.png, r.info);

  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(r.png);
  if (png_get_valid(r.png, r.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(r.png);
  png_set_strip_alpha(r.png);
  png_read_update_info(r.png, r.info);

  const int out_depth = png_get_bit_depth(r.png, r.info);
  const int channels = png_get_channels(r.png, r.info);
  if (out_depth != 8 && out_depth != 16)
    throw std::runtime_error("unsupported bit depth in '" + path + "': " +
                             std::to_string(out_depth) + " bits");
  if (channels != 1 && channels != 3)
    throw std::runtime_error("unsupported channel count in '" + path + "': " +
                             std::to_string(channels));

  const std::size_t rowbytes = png_get_rowbytes(r.png, r.info);
  std::vector<unsigned char> buf(rowbytes * h);
  std::vector<png_bytep> rows(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = buf.data() + y * rowbytes;
  png_read_image(r.png, rows.data());

  Image img(static_cast<int>(w), static_cast<int>(h));
  const double scale = out_depth == 8 ? 1.0 / 255.0 : 1.0 / 65535.0;
  for (png_uint_32 y = 0; y < h; ++y) {
    const unsigned char* row = rows[y];
    for (png_uint_32 x = 0; x < w; ++x) {
      double c[3] = {0.0, 0.0, 0.0};
      for (int ch = 0; ch < channels; ++ch) {
        std::size_t i = (static_cast<std::size_t>(x) * channels + ch);
        double v;
        if (out_depth == 8) {
          v = row[i];
        } else {
          v = (static_cast<unsigned>(row[2 * i]) << 8) | row[2 * i + 1];  // big-endian
        }
        c[ch] = v * scale;
      }
      img.at(static_cast<int>(x), static_cast<int>(y)) =
          channels == 1 ? c[0] : 0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2];
    }
  }
  return img;
}

}  // namespace

BlurKernel::BlurKernel(int s, std::vector<double> t) : size(s), taps(std::move(t)) {
  if (size <= 0 || size % 2 == 0)
    throw std::invalid_argument("kernel size must be positive and odd");
  if (taps.size() != static_cast<std::size_t>(size) * size)
    throw std::invalid_argument("kernel tap count does not match size");
  double sum = 0.0;
  for (double v : taps) {
    if (!(v >= 0.0)) throw std::invalid_argument("kernel taps must be non-negative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("kernel taps must sum to 1 (got " + std::to_string(sum) + ")");
}

BlurKernel BlurKernel::delta(int s) {
  std::vector<double> t(static_cast<std::size_t>(s) * s, 0.0);
  t[static_cast<std::size_t>(s / 2) * s + s / 2] = 1.0;
  return BlurKernel(s, std::move(t));
}

Image load_image(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) fail_unreadable(path, "cannot open");
  unsigned char head[2] = {0, 0};
  probe.read(reinterpret_cast<char*>(head), 2);
  probe.close();
  if (head[0] == 'P' && head[1] == '5') return load_pgm(path);
  if (head[0] == 0x89 && head[1] == 'P') return load_png(path);
  // fall back on the extension for empty/odd files so the error names a format
  if (has_suffix(path, ".pgm")) return load_pgm(path);
  if (has_suffix(path, ".png")) return load_png(path);
  fail_unreadable(path, "unrecognized format (want PGM or PNG)");
}

void save_pgm16(const Image& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "P5\n" << img.width << " " << img.height << "\n65535\n";
  std::vector<unsigned char> raw(img.size() * 2);
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double c = std::clamp(img.data[i], 0.0, 1.0);
    const unsigned v = static_cast<unsigned>(std::lround(c * 65535.0));
    raw[2 * i] = static_cast<unsigned char>(v >> 8);
    raw[2 * i + 1] = static_cast<unsigned char>(v & 0xff);
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw std::runtime_error("short write to '" + path + "'");
}

BlurKernel load_kernel(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_unreadable(path, "cannot open");
  int w = 0, h = 0;
  in >> w >> h;
  if (!in || w <= 0 || h <= 0) fail_unreadable(path, "bad kernel header");
  if (w != h) throw std::runtime_error("kernel in '" + path + "' is not square");
  if (w % 2 == 0) throw std::runtime_error("kernel in '" + path + "' has even size");
  std::vector<double> taps(static_cast<std::size_t>(w) * h);
  double sum = 0.0;
  for (double& v : taps) {
    in >> v;
    if (!in) fail_unreadable(path, "truncated kernel taps");
    if (v < 0.0 && v > -1e-12) v = 0.0;  // tolerate writeout jitter
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw std::runtime_error("kernel in '" + path + "' does not sum to 1");
  for (double& v : taps) v /= sum;
  return BlurKernel(w, std::move(taps));
}

void save_kernel(const BlurKernel& k, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << k.size << " " << k.size << "\n";
  char buf[32];
  for (int y = 0; y < k.size; ++y) {
    for (int x = 0; x < k.size; ++x) {
      std::snprintf(buf, sizeof(buf), "%.17g", k.at(x, y));
      out << buf << (x + 1 == k.size ? '\n' : ' ');
    }
  }
  if (!out) throw std::runtime_error("short write to '" + path + "'");
}

Image convolve(const Image& x, const BlurKernel& k, ConvolveMode mode) {
  const int s = k.size;
  if (mode == ConvolveMode::kValid) {
    if (x.width <= s || x.height <= s)
      throw std::invalid_argument("valid convolution requires image strictly larger than kernel");
    const int ow = x.width - s + 1;
    const int oh = x.height - s + 1;
    Image out(ow, oh);
    // out[m] = sum_j k[j] * x[m + s - 1 - j]  (true convolution)
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        double acc = 0.0;
        for (int ky = 0; ky < s; ++ky) {
          const double* xr = &x.data[static_cast<std::size_t>(oy + s - 1 - ky) * x.width];
          const double* kr = &k.taps[static_cast<std::size_t>(ky) * s];
          for (int kx = 0; kx < s; ++kx) acc += kr[kx] * xr[ox + s - 1 - kx];
        }
        out.at(ox, oy) = acc;
      }
    }
    return out;
  }
  // same-reflect: pad by the canvas radius, then the valid pass above.
  const int c = s / 2;
  Image padded = reflect_pad(x, c);
  return convolve(padded, k, ConvolveMode::kValid);
}

Image add_gaussian_noise(const Image& x, double sigma, Rng& rng) {
  if (sigma < 0.0) throw std::invalid_argument("noise sigma must be non-negative");
  Image out = x;
  if (sigma == 0.0) return out;
  std::normal_distribution<double> n(0.0, sigma);
  for (double& v : out.data) v += n(rng);
  return out;
}

Image reflect_pad(const Image& x, int margin) {
  if (margin < 0) throw std::invalid_argument("negative padding margin");
  if (margin > x.width || margin > x.height)
    throw std::invalid_argument("padding margin exceeds image size");
  const int w = x.width + 2 * margin;
  const int h = x.height + 2 * margin;
  Image out(w, h);
  auto mirror = [margin](int i, int n) {
    int j = i - margin;
    if (j < 0) j = -j - 1;          // symmetric: x[-1] == x[0]
    if (j >= n) j = 2 * n - 1 - j;  // symmetric: x[n] == x[n-1]
    return j;
  };
  for (int y = 0; y < h; ++y) {
    const int sy = mirror(y, x.height);
    for (int xx = 0; xx < w; ++xx) out.at(xx, y) = x.at(mirror(xx, x.width), sy);
  }
  return out;
}

Image crop(const Image& x, int x0, int y0, int w, int h) {
  if (x0 < 0 || y0 < 0 || x0 + w > x.width || y0 + h > x.height)
    throw std::invalid_argument("crop window out of bounds");
  Image out(w, h);
  for (int y = 0; y < h; ++y)
    std::memcpy(&out.data[static_cast<std::size_t>(y) * w],
                &x.data[static_cast<std::size_t>(y0 + y) * x.width + x0],
                static_cast<std::size_t>(w) * sizeof(double));
  return out;
}

Image apply_dihedral(const Image& x, int d) {
  if (x.width != x.height) throw std::invalid_argument("dihedral transform needs a square image");
  if (d < 0 || d >= 8) throw std::invalid_argument("dihedral element must be in [0, 8)");
  const int n = x.width;
  Image out(n, n);
  const int rot = d & 3;
  const bool flip = d & 4;
  for (int y = 0; y < n; ++y) {
    for (int xx = 0; xx < n; ++xx) {
      int sx = xx, sy = y;
      switch (rot) {  // inverse rotation of the output coordinate
        case 1: sx = y; sy = n - 1 - xx; break;
        case 2: sx = n - 1 - xx; sy = n - 1 - y; break;
        case 3: sx = n - 1 - y; sy = xx; break;
        default: break;
      }
      if (flip) sx = n - 1 - sx;
      out.at(xx, y) = x.at(sx, sy);
    }
  }
  return out;
}

Image circular_shift(const Image& x, int dx, int dy) {
  Image out(x.width, x.height);
  auto wrap = [](int v, int n) { return ((v % n) + n) % n; };
  for (int y = 0; y < x.height; ++y)
    for (int xx = 0; xx < x.width; ++xx)
      out.at(xx, y) = x.at(wrap(xx - dx, x.width), wrap(y - dy, x.height));
  return out;
}

double mean_intensity(const Image& x) {
  double s = 0.0;
  for (double v : x.data) s += v;
  return x.size() ? s / static_cast<double>(x.size()) : 0.0;
}

}  // namespace ndeblur
