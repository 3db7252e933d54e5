// Copyright 2026 The Disa Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef DISA_VISUAL_HPP
#define DISA_VISUAL_HPP

// Character bitmaps and the convolutional autoencoder that turns them into
// visual features. Encoder: valid-padding ReLU convolutions down to 1x1xC.
// Decoder: ReLU dense layers, the last one reshaped to the input size.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "disa/feature_table.hpp"
#include "disa/numerics/conv.hpp"
#include "disa/numerics/optimizer.hpp"
#include "disa/numerics/tensor.hpp"
#include "disa/text.hpp"

namespace disa::vis {

inline constexpr int kBitmapSize = 60;

/// Square grayscale bitmap, row-major, values in [0, 1].
struct CharBitmap {
  char32_t ch = 0;
  int size = kBitmapSize;
  std::vector<double> pixels;

  CharBitmap() = default;
  CharBitmap(char32_t c, int n, std::vector<double> px) : ch(c), size(n), pixels(std::move(px)) { check(); }

  void check() const {
    if (size < 1 || pixels.size() != static_cast<std::size_t>(size) * static_cast<std::size_t>(size))
      throw ShapeError("bitmap must have " + std::to_string(size) + "x" + std::to_string(size) + " pixels");
    for (double p : pixels)
      if (!(p >= 0.0 && p <= 1.0)) throw RangeError("bitmap pixel outside [0, 1]");
  }

  double at(int r, int c) const { return pixels[static_cast<std::size_t>(r) * size + c]; }
};

inline std::string bitmap_file_name(char32_t ch) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "U+%04X.pgm", static_cast<unsigned>(ch));
  return buf;
}

/// Parses ASCII PGM (P2). Comments (#) are allowed between header fields.
inline CharBitmap parse_pgm(char32_t ch, std::string_view content) {
  std::vector<std::string> fields;
  std::size_t i = 0;
  while (i < content.size()) {
    const char c = content[i];
    if (c == '#') {
      while (i < content.size() && content[i] != '\n') ++i;
    } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      ++i;
    } else {
      std::size_t j = i;
      while (j < content.size() && !std::isspace(static_cast<unsigned char>(content[j])) && content[j] != '#') ++j;
      fields.emplace_back(content.substr(i, j - i));
      i = j;
    }
  }
  if (fields.size() < 4 || fields[0] != "P2") throw ParseError("not an ASCII PGM (P2) file", 0);
  const auto w = text::parse_int(fields[1]), h = text::parse_int(fields[2]), maxval = text::parse_int(fields[3]);
  if (w != h || w < 1) throw ShapeError("bitmap must be square, got " + fields[1] + "x" + fields[2]);
  if (maxval < 1) throw ParseError("PGM maxval must be positive", 0);
  if (fields.size() != 4 + static_cast<std::size_t>(w * h))
    throw ParseError("PGM has " + std::to_string(fields.size() - 4) + " samples, expected " + std::to_string(w * h), 0);
  std::vector<double> px;
  px.reserve(static_cast<std::size_t>(w * h));
  for (std::size_t k = 4; k < fields.size(); ++k) {
    const auto v = text::parse_int(fields[k]);
    if (v < 0 || v > maxval) throw RangeError("PGM sample out of range");
    px.push_back(static_cast<double>(v) / static_cast<double>(maxval));
  }
  return CharBitmap(ch, static_cast<int>(w), std::move(px));
}

inline std::string serialize_pgm(const CharBitmap& b) {
  std::ostringstream os;
  os << "P2\n" << b.size << ' ' << b.size << "\n255\n";
  for (int r = 0; r < b.size; ++r) {
    for (int c = 0; c < b.size; ++c) os << (c ? " " : "") << std::lround(b.at(r, c) * 255.0);
    os << '\n';
  }
  return os.str();
}

/// Reads every `U+XXXX.pgm` in a directory, sorted by code point.
inline std::vector<CharBitmap> load_bitmap_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw IoError("not a directory: '" + dir + "'");
  std::vector<std::pair<char32_t, fs::path>> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (!e.is_regular_file() || e.path().extension() != ".pgm" || name.rfind("U+", 0) != 0) continue;
    const auto hex = e.path().stem().string().substr(2);
    unsigned long cp = 0;
    auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), cp, 16);
    if (ec != std::errc() || ptr != hex.data() + hex.size()) throw ParseError("bad bitmap file name '" + name + "'", 2);
    files.emplace_back(static_cast<char32_t>(cp), e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<CharBitmap> out;
  for (const auto& [cp, path] : files) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out.push_back(parse_pgm(cp, ss.str()));
  }
  return out;
}

inline void save_bitmap_dir(const std::string& dir, const std::vector<CharBitmap>& bitmaps) {
  std::filesystem::create_directories(dir);
  for (const auto& b : bitmaps) text::write_text(dir + "/" + bitmap_file_name(b.ch), serialize_pgm(b));
}

/// Procedural stroke bitmaps for tests and demos.
inline std::vector<CharBitmap> synthetic_bitmaps(std::size_t n, std::uint64_t seed, int size = kBitmapSize,
                                                 char32_t first = 0x4E00) {
  num::Rng rng(seed);
  std::vector<CharBitmap> out;
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> px(static_cast<std::size_t>(size) * size, 0.0);
    const int strokes = 2 + static_cast<int>(num::uniform_index(rng, 4));
    for (int s = 0; s < strokes; ++s) {
      const int r0 = static_cast<int>(num::uniform_index(rng, static_cast<std::size_t>(size)));
      const int c0 = static_cast<int>(num::uniform_index(rng, static_cast<std::size_t>(size)));
      const int len = 1 + static_cast<int>(num::uniform_index(rng, static_cast<std::size_t>(size)));
      const int width = 1 + static_cast<int>(num::uniform_index(rng, std::max<std::size_t>(1, size / 12)));
      const bool horizontal = num::uniform01(rng) < 0.5;
      const double ink = 0.5 + 0.5 * num::uniform01(rng);
      for (int a = 0; a < len; ++a)
        for (int w = 0; w < width; ++w) {
          const int r = horizontal ? r0 + w : r0 + a, c = horizontal ? c0 + a : c0 + w;
          if (r < size && c < size) px[static_cast<std::size_t>(r) * size + c] = ink;
        }
    }
    out.emplace_back(first + static_cast<char32_t>(k), size, std::move(px));
  }
  return out;
}

struct ConvLayerSpec {
  int kernel = 5;
  int stride = 1;
  int channels = 32;
};

struct ConvAeArchitecture {
  int input_size = kBitmapSize;
  std::vector<ConvLayerSpec> encoder{{5, 1, 32}, {4, 2, 64}, {5, 2, 128}, {4, 2, 256}, {5, 1, 512}};
  std::vector<int> decoder{1024, 2500, 3600};

  /// Spatial size after each encoder layer.
  std::vector<int> shape_chain() const {
    std::vector<int> out;
    int s = input_size;
    for (const auto& l : encoder) {
      s = num::conv_output_size(s, l.kernel, l.stride);
      out.push_back(s);
    }
    return out;
  }

  int feature_dim() const { return encoder.empty() ? input_size * input_size : encoder.back().channels; }

  void check() const {
    if (encoder.empty() || decoder.empty()) throw InvalidArgument("convAE needs encoder and decoder layers");
    const auto chain = shape_chain();
    if (chain.back() != 1) throw ShapeError("encoder must end at 1x1, ends at " + std::to_string(chain.back()));
    if (decoder.back() != input_size * input_size)
      throw ShapeError("last decoder layer must have " + std::to_string(input_size * input_size) + " units");
  }
};

struct ConvAeModel {
  ConvAeArchitecture arch;
  std::vector<num::Tensor> kernels;  // [k, k, Cin, Cout]
  std::vector<num::Vector> conv_bias;
  std::vector<num::Matrix> dense_W;  // out x in
  std::vector<num::Vector> dense_b;

  friend bool operator==(const ConvAeModel& a, const ConvAeModel& b) {
    if (a.kernels != b.kernels || a.conv_bias.size() != b.conv_bias.size() || a.dense_W.size() != b.dense_W.size())
      return false;
    for (std::size_t i = 0; i < a.conv_bias.size(); ++i)
      if (a.conv_bias[i] != b.conv_bias[i]) return false;
    for (std::size_t i = 0; i < a.dense_W.size(); ++i)
      if (a.dense_W[i] != b.dense_W[i] || a.dense_b[i] != b.dense_b[i]) return false;
    return true;
  }

  /// Every parameter block, encoder first, weights before biases.
  std::vector<std::span<double>> parameter_blocks() {
    std::vector<std::span<double>> out;
    for (std::size_t i = 0; i < kernels.size(); ++i) {
      out.push_back(kernels[i].data());
      out.push_back(num::mut_view(conv_bias[i]));
    }
    for (std::size_t i = 0; i < dense_W.size(); ++i) {
      out.push_back(num::mut_view(dense_W[i]));
      out.push_back(num::mut_view(dense_b[i]));
    }
    return out;
  }
};

/// He-normal weights, zero biases.
inline ConvAeModel init_convae(const ConvAeArchitecture& arch, std::uint64_t seed) {
  arch.check();
  ConvAeModel m;
  m.arch = arch;
  num::Rng rng(seed);
  int cin = 1;
  for (const auto& l : arch.encoder) {
    num::Tensor k({l.kernel, l.kernel, cin, l.channels});
    const double sd = std::sqrt(2.0 / (l.kernel * l.kernel * cin));
    for (auto& v : k.data()) v = sd * num::standard_normal(rng);
    m.kernels.push_back(std::move(k));
    m.conv_bias.push_back(num::Vector::Zero(l.channels));
    cin = l.channels;
  }
  int in = arch.feature_dim();
  for (int out : arch.decoder) {
    num::Matrix W(out, in);
    const double sd = std::sqrt(2.0 / in);
    for (Eigen::Index r = 0; r < W.rows(); ++r)
      for (Eigen::Index c = 0; c < W.cols(); ++c) W(r, c) = sd * num::standard_normal(rng);
    m.dense_W.push_back(std::move(W));
    m.dense_b.push_back(num::Vector::Zero(out));
    in = out;
  }
  return m;
}

inline void relu_inplace(std::span<double> v) {
  for (auto& x : v) x = x > 0 ? x : 0.0;
}

struct ForwardTrace {
  std::vector<num::Tensor> activations;  // input, then each conv output
  std::vector<num::Vector> dense;        // code, then each dense output
};

inline num::Tensor bitmap_tensor(const ConvAeModel& m, const CharBitmap& b) {
  b.check();
  if (b.size != m.arch.input_size)
    throw ShapeError("bitmap is " + std::to_string(b.size) + "x" + std::to_string(b.size) + ", model expects " +
                     std::to_string(m.arch.input_size));
  return num::Tensor({b.size, b.size, 1}, b.pixels);
}

inline ForwardTrace forward_trace(const ConvAeModel& m, const CharBitmap& b) {
  ForwardTrace t;
  t.activations.push_back(bitmap_tensor(m, b));
  for (std::size_t i = 0; i < m.kernels.size(); ++i) {
    num::Tensor y = num::conv2d_apply(t.activations.back(), m.kernels[i], m.arch.encoder[i].stride, m.conv_bias[i]);
    relu_inplace(y.data());
    t.activations.push_back(std::move(y));
  }
  const auto code = t.activations.back().data();
  t.dense.emplace_back(Eigen::Map<const num::Vector>(code.data(), static_cast<Eigen::Index>(code.size())));
  for (std::size_t i = 0; i < m.dense_W.size(); ++i) {
    num::Vector y = m.dense_W[i] * t.dense.back() + m.dense_b[i];
    relu_inplace(num::mut_view(y));
    t.dense.push_back(std::move(y));
  }
  return t;
}

/// Encoder output as a feature vector.
inline num::Vector encode_char(const ConvAeModel& m, const CharBitmap& b) {
  num::Tensor x = bitmap_tensor(m, b);
  for (std::size_t i = 0; i < m.kernels.size(); ++i) {
    x = num::conv2d_apply(x, m.kernels[i], m.arch.encoder[i].stride, m.conv_bias[i]);
    relu_inplace(x.data());
  }
  return Eigen::Map<const num::Vector>(x.data().data(), static_cast<Eigen::Index>(x.size()));
}

inline CharBitmap reconstruct(const ConvAeModel& m, const CharBitmap& b) {
  const auto t = forward_trace(m, b);
  const auto& out = t.dense.back();
  std::vector<double> px(out.data(), out.data() + out.size());
  for (auto& p : px) p = std::clamp(p, 0.0, 1.0);
  return CharBitmap(b.ch, b.size, std::move(px));
}

/// Sum over pixels of |d| + d^2 with d = target - reconstruction.
inline double reconstruction_loss(std::span<const double> target, std::span<const double> recon) {
  if (target.size() != recon.size()) throw ShapeError("reconstruction loss needs matching shapes");
  double s = 0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double d = target[i] - recon[i];
    s += std::abs(d) + d * d;
  }
  return s;
}

inline double reconstruction_loss(const CharBitmap& target, const CharBitmap& recon) {
  if (target.size != recon.size) throw ShapeError("reconstruction loss needs matching shapes");
  return reconstruction_loss(target.pixels, recon.pixels);
}

/// Loss of the raw (unclamped) decoder output, summed over bitmaps.
inline double batch_loss(const ConvAeModel& m, const std::vector<CharBitmap>& bitmaps) {
  double s = 0;
  for (const auto& b : bitmaps) {
    const auto t = forward_trace(m, b);
    s += reconstruction_loss(b.pixels, num::view(t.dense.back()));
  }
  return s;
}

/// Gradient buffers with the model's block layout.
struct ConvAeGrad {
  std::vector<num::Tensor> kernels;
  std::vector<num::Vector> conv_bias;
  std::vector<num::Matrix> dense_W;
  std::vector<num::Vector> dense_b;

  explicit ConvAeGrad(const ConvAeModel& m) {
    for (const auto& k : m.kernels) kernels.emplace_back(k.shape());
    for (const auto& b : m.conv_bias) conv_bias.push_back(num::Vector::Zero(b.size()));
    for (const auto& W : m.dense_W) dense_W.push_back(num::Matrix::Zero(W.rows(), W.cols()));
    for (const auto& b : m.dense_b) dense_b.push_back(num::Vector::Zero(b.size()));
  }

  std::vector<std::span<const double>> blocks() const {
    std::vector<std::span<const double>> out;
    for (std::size_t i = 0; i < kernels.size(); ++i) {
      out.push_back(kernels[i].data());
      out.push_back(num::view(conv_bias[i]));
    }
    for (std::size_t i = 0; i < dense_W.size(); ++i) {
      out.push_back(num::view(dense_W[i]));
      out.push_back(num::view(dense_b[i]));
    }
    return out;
  }
};

/// Accumulates the loss gradient of one bitmap into `g`; returns its loss.
/// The |d| term has subgradient 0 at d = 0.
inline double accumulate_gradient(const ConvAeModel& m, const CharBitmap& b, ConvAeGrad& g) {
  const auto t = forward_trace(m, b);
  const auto& out = t.dense.back();
  double loss = 0;
  num::Vector d(out.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double diff = b.pixels[static_cast<std::size_t>(i)] - out(i);
    loss += std::abs(diff) + diff * diff;
    const double sgn = diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0);
    d(i) = -(sgn + 2.0 * diff);
  }
  for (std::size_t li = m.dense_W.size(); li-- > 0;) {
    const auto& y = t.dense[li + 1];
    for (Eigen::Index i = 0; i < d.size(); ++i)
      if (y(i) <= 0) d(i) = 0;
    g.dense_W[li].noalias() += d * t.dense[li].transpose();
    g.dense_b[li] += d;
    d = m.dense_W[li].transpose() * d;
  }
  num::Tensor dy(t.activations.back().shape(), std::vector<double>(d.data(), d.data() + d.size()));
  for (std::size_t li = m.kernels.size(); li-- > 0;) {
    const auto act = t.activations[li + 1].data();
    auto dd = dy.data();
    for (std::size_t i = 0; i < dd.size(); ++i)
      if (act[i] <= 0) dd[i] = 0;
    auto back = num::conv2d_backward(t.activations[li], m.kernels[li], m.arch.encoder[li].stride, dy);
    auto gk = g.kernels[li].data();
    const auto bk = back.d_kernels.data();
    for (std::size_t i = 0; i < gk.size(); ++i) gk[i] += bk[i];
    g.conv_bias[li] += back.d_bias;
    if (li > 0) dy = std::move(back.d_input);
  }
  return loss;
}

struct ConvAeOptions {
  ConvAeArchitecture arch;
  int epochs = 30;
  int batch_size = 8;
  double learning_rate = 0.001;
  std::uint64_t seed = 42;
};

struct ConvAeTraining {
  ConvAeModel model;
  std::vector<double> loss_history;  // summed loss over all bitmaps, per epoch, before any update at index 0
};

/// Adagrad on mini-batches of shuffled bitmaps.
inline ConvAeTraining train_convae(const std::vector<CharBitmap>& bitmaps, const ConvAeOptions& opt) {
  if (bitmaps.empty()) throw InvalidArgument("train_convae needs at least one bitmap");
  if (opt.batch_size < 1) throw RangeError("batch size must be >= 1");
  if (opt.epochs < 0) throw RangeError("epochs must be >= 0");
  ConvAeTraining r{init_convae(opt.arch, opt.seed), {}};
  num::Optimizer adagrad = num::Optimizer::adagrad(opt.learning_rate);
  num::Rng rng(opt.seed ^ 0x5bd1e995ULL);
  std::vector<std::size_t> order(bitmaps.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  r.loss_history.push_back(batch_loss(r.model, bitmaps));
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    num::shuffle(order, rng);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(opt.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(opt.batch_size));
      ConvAeGrad g(r.model);
      for (std::size_t k = start; k < end; ++k) accumulate_gradient(r.model, bitmaps[order[k]], g);
      auto params = r.model.parameter_blocks();
      const auto grads = g.blocks();
      std::vector<num::ParamSlot> slots;
      for (std::size_t i = 0; i < params.size(); ++i) slots.push_back({params[i], grads[i], false});
      adagrad.step(slots);
    }
    r.loss_history.push_back(batch_loss(r.model, bitmaps));
  }
  return r;
}

/// One 512-d (or feature_dim) row per character, keyed by the character.
inline FeatureTable build_visual_table(const ConvAeModel& m, const std::vector<CharBitmap>& bitmaps) {
  std::vector<FeatureTable::Row> rows;
  rows.reserve(bitmaps.size());
  for (const auto& b : bitmaps) rows.emplace_back(text::utf8_encode(b.ch), encode_char(m, b));
  return FeatureTable("V", KeyKind::character, m.arch.feature_dim(), std::move(rows));
}

// Model file: "#convae v1" header, architecture line, then one line per
// parameter block ("name<TAB>n<TAB>v1,v2,...").

inline std::string serialize_convae(const ConvAeModel& m) {
  std::string out = "#convae v1\ninput\t" + std::to_string(m.arch.input_size) + "\nencoder";
  for (const auto& l : m.arch.encoder)
    out += "\t" + std::to_string(l.kernel) + "," + std::to_string(l.stride) + "," + std::to_string(l.channels);
  out += "\ndecoder";
  for (int d : m.arch.decoder) out += "\t" + std::to_string(d);
  out += "\n";
  auto copy = m;
  const auto blocks = copy.parameter_blocks();
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    out += "block" + std::to_string(i) + "\t" + std::to_string(blocks[i].size()) + "\t";
    for (std::size_t k = 0; k < blocks[i].size(); ++k) {
      if (k) out += ',';
      out += text::format_real(blocks[i][k]);
    }
    out += '\n';
  }
  return out;
}

inline ConvAeModel parse_convae(const std::vector<std::string>& lines) {
  if (lines.size() < 4 || lines[0] != "#convae v1") throw ParseError("not a convAE model file", 0, 1);
  ConvAeArchitecture arch;
  const auto in = text::split(lines[1], '\t');
  if (in.size() != 2 || in[0] != "input") throw ParseError("expected input line", 0, 2);
  arch.input_size = static_cast<int>(text::parse_int(in[1]));
  const auto enc = text::split(lines[2], '\t');
  if (enc.empty() || enc[0] != "encoder") throw ParseError("expected encoder line", 0, 3);
  arch.encoder.clear();
  for (std::size_t k = 1; k < enc.size(); ++k) {
    const auto f = text::split(enc[k], ',');
    if (f.size() != 3) throw ParseError("encoder layer needs kernel,stride,channels", 0, 3);
    arch.encoder.push_back({static_cast<int>(text::parse_int(f[0])), static_cast<int>(text::parse_int(f[1])),
                            static_cast<int>(text::parse_int(f[2]))});
  }
  const auto dec = text::split(lines[3], '\t');
  if (dec.empty() || dec[0] != "decoder") throw ParseError("expected decoder line", 0, 4);
  arch.decoder.clear();
  for (std::size_t k = 1; k < dec.size(); ++k) arch.decoder.push_back(static_cast<int>(text::parse_int(dec[k])));
  ConvAeModel m = init_convae(arch, 0);
  auto blocks = m.parameter_blocks();
  if (lines.size() < 4 + blocks.size()) throw ParseError("convAE file is truncated", 0, lines.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto f = text::split(lines[4 + i], '\t');
    if (f.size() != 3 || static_cast<std::size_t>(text::parse_int(f[1])) != blocks[i].size())
      throw ParseError("block " + std::to_string(i) + " has the wrong size", 0, 5 + i);
    const auto vals = text::split(f[2], ',');
    if (vals.size() != blocks[i].size()) throw ParseError("block value count mismatch", 0, 5 + i);
    for (std::size_t k = 0; k < vals.size(); ++k) blocks[i][k] = text::parse_real(vals[k]);
  }
  return m;
}

}  // namespace disa::vis

#endif  // DISA_VISUAL_HPP
