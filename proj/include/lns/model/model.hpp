#pragma once

// Convolutional autoencoder backbone: six conv layers and two fully
// connected layers down to the latent code, mirrored with transposed
// convolutions back up to a sigmoid image output. The AE head emits the code
// directly; the VAE head emits (mu, logvar) pairs.

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lns/core/layers.hpp"
#include "lns/core/rng.hpp"
#include "lns/core/tensor.hpp"

namespace lns::model {

enum class Variant { kAE, kVAE };

inline const char* variant_name(Variant v) {
  return v == Variant::kAE ? "ae" : "vae";
}

inline Variant parse_variant(const std::string& s) {
  if (s == "ae" || s == "AE") return Variant::kAE;
  if (s == "vae" || s == "VAE") return Variant::kVAE;
  throw std::invalid_argument("unknown model variant: '" + s + "'");
}

constexpr int kLatentDim = 15;
constexpr int kImageSize = 64;
constexpr int kChannels = 3;
constexpr double kLogvarClamp = 10.0;

struct ConvSpec {
  std::int64_t in, out, k, stride, pad;
};

// Encoder stack; the decoder runs the reverse with transposed convolutions.
constexpr std::array<ConvSpec, 6> kEncoderConvs = {{
    {3, 32, 3, 1, 1},
    {32, 64, 4, 2, 1},
    {64, 64, 4, 2, 1},
    {64, 128, 4, 2, 1},
    {128, 128, 4, 2, 1},
    {128, 256, 4, 1, 0},
}};

template <typename T>
struct ConvLayer {
  Tensor<T> w, b;
  std::int64_t stride = 1, pad = 0;
};

template <typename T>
struct LinearLayer {
  Tensor<T> w, b;
};

template <typename T>
struct Model {
  Variant variant = Variant::kAE;
  int latent_dim = kLatentDim;

  std::array<ConvLayer<T>, 6> enc_conv;
  LinearLayer<T> enc_fc1, enc_fc2;
  LinearLayer<T> dec_fc1, dec_fc2;
  std::array<ConvLayer<T>, 6> dec_conv;  // weights [Cin, Cout, k, k]

  int code_dim() const {
    return variant == Variant::kVAE ? 2 * latent_dim : latent_dim;
  }

  /// Kaiming-uniform fan-in init for weights, zero biases. Deterministic in
  /// the generator passed in; every parameter uses its own named stream.
  static Model init(Variant variant, const Rng& base, int latent_dim = kLatentDim) {
    Model m;
    m.variant = variant;
    m.latent_dim = latent_dim;

    auto fill = [&base](Tensor<T>& w, const std::string& name,
                        std::int64_t fan_in) {
      Rng r = base.stream("init").stream(name);
      const double bound = std::sqrt(6.0 / double(fan_in));
      for (auto& v : w.data) v = T(r.uniform(-bound, bound));
    };

    for (int i = 0; i < 6; ++i) {
      const auto& s = kEncoderConvs[std::size_t(i)];
      auto& l = m.enc_conv[std::size_t(i)];
      l.w = Tensor<T>({s.out, s.in, s.k, s.k});
      l.b = Tensor<T>({s.out});
      l.stride = s.stride;
      l.pad = s.pad;
      fill(l.w, "enc.conv" + std::to_string(i + 1) + ".w", s.in * s.k * s.k);
    }
    m.enc_fc1.w = Tensor<T>({128, 256});
    m.enc_fc1.b = Tensor<T>({128});
    fill(m.enc_fc1.w, "enc.fc1.w", 256);
    m.enc_fc2.w = Tensor<T>({m.code_dim(), 128});
    m.enc_fc2.b = Tensor<T>({m.code_dim()});
    fill(m.enc_fc2.w, "enc.fc2.w", 128);

    m.dec_fc1.w = Tensor<T>({128, latent_dim});
    m.dec_fc1.b = Tensor<T>({128});
    fill(m.dec_fc1.w, "dec.fc1.w", latent_dim);
    m.dec_fc2.w = Tensor<T>({256, 128});
    m.dec_fc2.b = Tensor<T>({256});
    fill(m.dec_fc2.w, "dec.fc2.w", 128);

    for (int i = 0; i < 6; ++i) {
      const auto& s = kEncoderConvs[std::size_t(5 - i)];
      auto& l = m.dec_conv[std::size_t(i)];
      l.w = Tensor<T>({s.out, s.in, s.k, s.k});  // [Cin_T, Cout_T, k, k]
      l.b = Tensor<T>({s.in});
      l.stride = s.stride;
      l.pad = s.pad;
      fill(l.w, "dec.conv" + std::to_string(i + 1) + ".w", s.in * s.k * s.k);
    }
    return m;
  }

  /// Same topology, all parameters zero; used as a gradient accumulator.
  static Model like(const Model& other) {
    Model m;
    m.variant = other.variant;
    m.latent_dim = other.latent_dim;
    auto zero_of = [](const Tensor<T>& t) { return Tensor<T>(t.shape); };
    for (int i = 0; i < 6; ++i) {
      m.enc_conv[i] = {zero_of(other.enc_conv[i].w), zero_of(other.enc_conv[i].b),
                       other.enc_conv[i].stride, other.enc_conv[i].pad};
      m.dec_conv[i] = {zero_of(other.dec_conv[i].w), zero_of(other.dec_conv[i].b),
                       other.dec_conv[i].stride, other.dec_conv[i].pad};
    }
    m.enc_fc1 = {zero_of(other.enc_fc1.w), zero_of(other.enc_fc1.b)};
    m.enc_fc2 = {zero_of(other.enc_fc2.w), zero_of(other.enc_fc2.b)};
    m.dec_fc1 = {zero_of(other.dec_fc1.w), zero_of(other.dec_fc1.b)};
    m.dec_fc2 = {zero_of(other.dec_fc2.w), zero_of(other.dec_fc2.b)};
    return m;
  }

  std::vector<std::pair<std::string, Tensor<T>*>> named_params() {
    std::vector<std::pair<std::string, Tensor<T>*>> out;
    for (int i = 0; i < 6; ++i) {
      out.emplace_back("enc.conv" + std::to_string(i + 1) + ".w", &enc_conv[i].w);
      out.emplace_back("enc.conv" + std::to_string(i + 1) + ".b", &enc_conv[i].b);
    }
    out.emplace_back("enc.fc1.w", &enc_fc1.w);
    out.emplace_back("enc.fc1.b", &enc_fc1.b);
    out.emplace_back("enc.fc2.w", &enc_fc2.w);
    out.emplace_back("enc.fc2.b", &enc_fc2.b);
    out.emplace_back("dec.fc1.w", &dec_fc1.w);
    out.emplace_back("dec.fc1.b", &dec_fc1.b);
    out.emplace_back("dec.fc2.w", &dec_fc2.w);
    out.emplace_back("dec.fc2.b", &dec_fc2.b);
    for (int i = 0; i < 6; ++i) {
      out.emplace_back("dec.conv" + std::to_string(i + 1) + ".w", &dec_conv[i].w);
      out.emplace_back("dec.conv" + std::to_string(i + 1) + ".b", &dec_conv[i].b);
    }
    return out;
  }

  std::vector<Tensor<T>*> params() {
    std::vector<Tensor<T>*> out;
    for (auto& [name, t] : named_params()) out.push_back(t);
    return out;
  }
};

// ---------------------------------------------------------------------------
// Forward passes with caches for backprop.

template <typename T>
struct EncoderCache {
  std::array<Tensor<T>, 7> act;  // act[0] = input, act[i] = post-ReLU conv i
  Tensor<T> fc1_act;             // post-ReLU
  Tensor<T> code;                // [N, code_dim]
};

template <typename T>
struct DecoderCache {
  Tensor<T> z;                   // [N, latent]
  Tensor<T> fc1_act, fc2_act;    // post-ReLU
  std::array<Tensor<T>, 6> act;  // act[i] = post-activation of dec conv i
};

template <typename T>
void check_image_batch(const Tensor<T>& x) {
  if (x.rank() != 4 || x.dim(1) != kChannels || x.dim(2) != kImageSize ||
      x.dim(3) != kImageSize)
    shape_error("encoder", "expected [N,3,64,64] input, got " + x.shape_str());
}

template <typename T>
EncoderCache<T> encode_batch(const Model<T>& m, const Tensor<T>& x) {
  check_image_batch(x);
  EncoderCache<T> c;
  c.act[0] = x;
  for (int i = 0; i < 6; ++i) {
    auto z = conv2d_forward(c.act[i], m.enc_conv[i].w, m.enc_conv[i].b,
                            m.enc_conv[i].stride, m.enc_conv[i].pad,
                            "enc.conv" + std::to_string(i + 1));
    c.act[i + 1] = relu_forward(z);
  }
  const std::int64_t n = x.dim(0);
  auto flat = c.act[6].reshaped({n, 256});
  c.fc1_act = relu_forward(linear_forward(flat, m.enc_fc1.w, m.enc_fc1.b, "enc.fc1"));
  c.code = linear_forward(c.fc1_act, m.enc_fc2.w, m.enc_fc2.b, "enc.fc2");
  return c;
}

template <typename T>
DecoderCache<T> decode_batch(const Model<T>& m, const Tensor<T>& z) {
  if (z.rank() != 2 || z.dim(1) != m.latent_dim)
    shape_error("decoder", "expected [N," + std::to_string(m.latent_dim) +
                               "] latent, got " + z.shape_str());
  DecoderCache<T> c;
  c.z = z;
  c.fc1_act = relu_forward(linear_forward(z, m.dec_fc1.w, m.dec_fc1.b, "dec.fc1"));
  c.fc2_act = relu_forward(linear_forward(c.fc1_act, m.dec_fc2.w, m.dec_fc2.b, "dec.fc2"));
  const std::int64_t n = z.dim(0);
  Tensor<T> cur = c.fc2_act.reshaped({n, 256, 1, 1});
  for (int i = 0; i < 6; ++i) {
    auto y = conv_transpose2d_forward(cur, m.dec_conv[i].w, m.dec_conv[i].b,
                                      m.dec_conv[i].stride, m.dec_conv[i].pad,
                                      "dec.conv" + std::to_string(i + 1));
    c.act[i] = i == 5 ? sigmoid_forward(y) : relu_forward(y);
    cur = c.act[i];
  }
  return c;
}

/// Gradient of everything reachable from d(recon), accumulated into `grads`.
/// Returns d(z) for the latent input.
template <typename T>
Tensor<T> decoder_backward(const Model<T>& m, const DecoderCache<T>& c,
                           const Tensor<T>& drecon, Model<T>& grads) {
  Tensor<T> d = sigmoid_backward(c.act[5], drecon);
  Tensor<T> fc2_reshaped;
  for (int i = 5; i >= 0; --i) {
    const std::int64_t n = c.z.dim(0);
    if (i == 0) fc2_reshaped = c.fc2_act.reshaped({n, 256, 1, 1});
    const Tensor<T>& input = i == 0 ? fc2_reshaped : c.act[i - 1];
    auto g = conv_transpose2d_backward(input, m.dec_conv[i].w, d,
                                       m.dec_conv[i].stride, m.dec_conv[i].pad,
                                       "dec.conv" + std::to_string(i + 1));
    for (std::int64_t j = 0; j < g.dw.numel(); ++j)
      grads.dec_conv[i].w.data[j] += g.dw.data[j];
    for (std::int64_t j = 0; j < g.db.numel(); ++j)
      grads.dec_conv[i].b.data[j] += g.db.data[j];
    d = i == 0 ? std::move(g.dx)
               : relu_backward(c.act[i - 1], g.dx);
  }
  const std::int64_t n = c.z.dim(0);
  d = relu_backward(c.fc2_act, d.reshaped({n, 256}));
  auto g2 = linear_backward(c.fc1_act, m.dec_fc2.w, d, "dec.fc2");
  for (std::int64_t j = 0; j < g2.dw.numel(); ++j)
    grads.dec_fc2.w.data[j] += g2.dw.data[j];
  for (std::int64_t j = 0; j < g2.db.numel(); ++j)
    grads.dec_fc2.b.data[j] += g2.db.data[j];
  auto d1 = relu_backward(c.fc1_act, g2.dx);
  auto g1 = linear_backward(c.z, m.dec_fc1.w, d1, "dec.fc1");
  for (std::int64_t j = 0; j < g1.dw.numel(); ++j)
    grads.dec_fc1.w.data[j] += g1.dw.data[j];
  for (std::int64_t j = 0; j < g1.db.numel(); ++j)
    grads.dec_fc1.b.data[j] += g1.db.data[j];
  return g1.dx;
}

/// Gradient of everything reachable from d(code), accumulated into `grads`.
template <typename T>
void encoder_backward(const Model<T>& m, const EncoderCache<T>& c,
                      const Tensor<T>& dcode, Model<T>& grads) {
  auto g2 = linear_backward(c.fc1_act, m.enc_fc2.w, dcode, "enc.fc2");
  for (std::int64_t j = 0; j < g2.dw.numel(); ++j)
    grads.enc_fc2.w.data[j] += g2.dw.data[j];
  for (std::int64_t j = 0; j < g2.db.numel(); ++j)
    grads.enc_fc2.b.data[j] += g2.db.data[j];
  auto d1 = relu_backward(c.fc1_act, g2.dx);
  const std::int64_t n = c.act[0].dim(0);
  auto flat = c.act[6].reshaped({n, 256});
  auto g1 = linear_backward(flat, m.enc_fc1.w, d1, "enc.fc1");
  for (std::int64_t j = 0; j < g1.dw.numel(); ++j)
    grads.enc_fc1.w.data[j] += g1.dw.data[j];
  for (std::int64_t j = 0; j < g1.db.numel(); ++j)
    grads.enc_fc1.b.data[j] += g1.db.data[j];

  Tensor<T> d = g1.dx.reshaped(c.act[6].shape);
  for (int i = 5; i >= 0; --i) {
    d = relu_backward(c.act[i + 1], d);
    auto g = conv2d_backward(c.act[i], m.enc_conv[i].w, d, m.enc_conv[i].stride,
                             m.enc_conv[i].pad, "enc.conv" + std::to_string(i + 1));
    for (std::int64_t j = 0; j < g.dw.numel(); ++j)
      grads.enc_conv[i].w.data[j] += g.dw.data[j];
    for (std::int64_t j = 0; j < g.db.numel(); ++j)
      grads.enc_conv[i].b.data[j] += g.db.data[j];
    d = std::move(g.dx);
  }
}

// ---------------------------------------------------------------------------
// Single-image convenience API.

struct LatentCode {
  std::vector<double> mu;
  std::vector<double> logvar;  // empty for AE
};

/// Encode one [3,64,64] image. The VAE returns (mu, logvar) with logvar
/// clamped to [-10, 10]; the AE returns its code in the mu slot.
template <typename T>
LatentCode encode(const Model<T>& m, const Tensor<T>& image) {
  auto batch = image.reshaped({1, kChannels, kImageSize, kImageSize});
  auto cache = encode_batch(m, batch);
  LatentCode lc;
  lc.mu.resize(std::size_t(m.latent_dim));
  for (int i = 0; i < m.latent_dim; ++i) lc.mu[i] = double(cache.code.data[i]);
  if (m.variant == Variant::kVAE) {
    lc.logvar.resize(std::size_t(m.latent_dim));
    for (int i = 0; i < m.latent_dim; ++i) {
      double lv = double(cache.code.data[std::size_t(m.latent_dim + i)]);
      lc.logvar[i] = std::clamp(lv, -kLogvarClamp, kLogvarClamp);
    }
  }
  if (!cache.code.all_finite())
    throw std::runtime_error("encode: non-finite code (untrained or diverged model?)");
  return lc;
}

/// Decode one latent vector to a [3,64,64] image.
template <typename T>
Tensor<T> decode(const Model<T>& m, const std::vector<double>& z) {
  if (int(z.size()) != m.latent_dim)
    shape_error("decoder", "expected latent of length " +
                               std::to_string(m.latent_dim) + ", got " +
                               std::to_string(z.size()));
  Tensor<T> zt({1, m.latent_dim});
  for (std::size_t i = 0; i < z.size(); ++i) zt.data[i] = T(z[i]);
  auto cache = decode_batch(m, zt);
  return cache.act[5].reshaped({kChannels, kImageSize, kImageSize});
}

}  // namespace lns::model
