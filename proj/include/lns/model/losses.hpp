#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "lns/core/rng.hpp"
#include "lns/model/model.hpp"

namespace lns::model {

template <typename T>
struct LossResult {
  double loss = 0;            // objective actually differentiated
  double mse_per_pixel = 0;   // reconstruction error, mean over every element
  double kl = 0;              // KL(q || N(0,I)), summed over dims, batch mean
  Model<T> grads;
};

/// Plain reconstruction loss: mean squared error over all elements.
template <typename T>
LossResult<T> loss_ae(const Model<T>& m, const Tensor<T>& batch) {
  if (m.variant != Variant::kAE)
    throw std::invalid_argument("loss_ae: model is not an AE");
  auto enc = encode_batch(m, batch);
  auto dec = decode_batch(m, enc.code);
  const Tensor<T>& recon = dec.act[5];

  const std::int64_t n = batch.numel();
  LossResult<T> res;
  res.grads = Model<T>::like(m);
  Tensor<T> drecon(recon.shape);
  double se = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double d = double(recon.data[i]) - double(batch.data[i]);
    se += d * d;
    drecon.data[i] = T(2.0 * d / double(n));
  }
  res.mse_per_pixel = se / double(n);
  res.loss = res.mse_per_pixel;
  auto dz = decoder_backward(m, dec, drecon, res.grads);
  encoder_backward(m, enc, dz, res.grads);
  return res;
}

/// Constrained-optimization state for the VAE's KL weight. The constraint
/// tracks reconstruction error against a per-pixel goal; beta is updated
/// multiplicatively toward constraint satisfaction (when reconstruction is
/// worse than the goal, beta shrinks and reconstruction pressure rises).
struct GecoState {
  double beta = 1.0;
  double err_ema = -1.0;  // per-pixel MSE EMA; negative = not yet initialized
  double g_goal = 0.0006;  // per-pixel MSE target
  double ema_decay = 0.99;
  double step_size = 1e-5;
  double beta_min = 1e-6, beta_max = 1e4;

  /// Feed one batch's per-pixel MSE; updates the EMA and beta.
  void update(double mse_per_pixel, std::int64_t pixels_per_image) {
    err_ema = err_ema < 0 ? mse_per_pixel
                          : ema_decay * err_ema + (1.0 - ema_decay) * mse_per_pixel;
    // The multiplicative step works on the per-image (summed) scale; with a
    // per-pixel constraint and this step size beta would be frozen.
    const double constraint = (g_goal - err_ema) * double(pixels_per_image);
    beta = std::clamp(beta * std::exp(step_size * constraint), beta_min, beta_max);
  }

  std::string describe() const {
    return "beta=" + std::to_string(beta) + " err_ema=" + std::to_string(err_ema) +
           " goal=" + std::to_string(g_goal);
  }
};

/// Diagonal-Gaussian KL against N(0, I): 0.5 * sum(mu^2 + sigma^2 - 1 - logvar).
inline double kl_divergence(const std::vector<double>& mu,
                            const std::vector<double>& logvar) {
  double kl = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double s2 = std::exp(logvar[i]);
    kl += 0.5 * (mu[i] * mu[i] + s2 - 1.0 - logvar[i]);
  }
  return kl;
}

/// One VAE training objective evaluation: reparameterized sample from the
/// posterior, reconstruction + beta * KL, and the GECO beta update using the
/// fresh batch error. Gradients flow through the reparameterization.
template <typename T>
LossResult<T> loss_vae_geco(const Model<T>& m, GecoState& geco,
                            const Tensor<T>& batch, Rng& noise_rng) {
  if (m.variant != Variant::kVAE)
    throw std::invalid_argument("loss_vae_geco: model is not a VAE");
  const std::int64_t nb = batch.dim(0);
  const int d = m.latent_dim;

  auto enc = encode_batch(m, batch);

  // Split the code into mu / clamped logvar, then sample z = mu + sigma*eps.
  Tensor<T> z({nb, d}), eps({nb, d}), sigma({nb, d});
  Tensor<char> clamped({nb, d});
  for (std::int64_t i = 0; i < nb; ++i)
    for (int j = 0; j < d; ++j) {
      const std::int64_t mu_idx = i * 2 * d + j;
      const std::int64_t lv_idx = i * 2 * d + d + j;
      double lv = double(enc.code.data[lv_idx]);
      const bool clip = lv < -kLogvarClamp || lv > kLogvarClamp;
      clamped.data[i * d + j] = clip;
      lv = std::clamp(lv, -kLogvarClamp, kLogvarClamp);
      const double sg = std::exp(0.5 * lv);
      const double e = noise_rng.normal(0.0, 1.0);
      sigma.data[i * d + j] = T(sg);
      eps.data[i * d + j] = T(e);
      z.data[i * d + j] = T(double(enc.code.data[mu_idx]) + sg * e);
    }

  auto dec = decode_batch(m, z);
  const Tensor<T>& recon = dec.act[5];

  const std::int64_t total = batch.numel();
  const std::int64_t per_image = total / nb;
  LossResult<T> res;
  res.grads = Model<T>::like(m);

  // Reconstruction: summed over pixels, mean over batch (and its gradient).
  Tensor<T> drecon(recon.shape);
  double se = 0;
  for (std::int64_t i = 0; i < total; ++i) {
    const double dd = double(recon.data[i]) - double(batch.data[i]);
    se += dd * dd;
    drecon.data[i] = T(2.0 * dd / double(nb));
  }
  const double err_sum = se / double(nb);
  res.mse_per_pixel = se / double(total);

  // KL, summed over dims, mean over batch.
  double kl = 0;
  for (std::int64_t i = 0; i < nb; ++i)
    for (int j = 0; j < d; ++j) {
      const double mu = double(enc.code.data[i * 2 * d + j]);
      const double lv = 2.0 * std::log(double(sigma.data[i * d + j]));
      kl += 0.5 * (mu * mu + std::exp(lv) - 1.0 - lv);
    }
  kl /= double(nb);
  res.kl = kl;
  res.loss = err_sum + geco.beta * kl;
  if (!std::isfinite(res.loss))
    throw std::runtime_error("loss_vae_geco: non-finite loss; " + geco.describe());

  // Backward: decoder to dz, then through the reparameterization and the KL
  // term into the code gradient.
  auto dz = decoder_backward(m, dec, drecon, res.grads);
  Tensor<T> dcode({nb, 2 * d});
  const double b = geco.beta;
  for (std::int64_t i = 0; i < nb; ++i)
    for (int j = 0; j < d; ++j) {
      const std::int64_t zi = i * d + j;
      const double mu = double(enc.code.data[i * 2 * d + j]);
      const double sg = double(sigma.data[zi]);
      const double e = double(eps.data[zi]);
      const double dzv = double(dz.data[zi]);
      // d/dmu: reconstruction path + beta * mu / nb from the KL.
      dcode.data[i * 2 * d + j] = T(dzv + b * mu / double(nb));
      // d/dlogvar: 0.5*sigma*eps*dz + beta * 0.5*(sigma^2 - 1)/nb, zero when
      // the clamp was active.
      double dlv = 0.5 * sg * e * dzv + b * 0.5 * (sg * sg - 1.0) / double(nb);
      if (clamped.data[zi]) dlv = 0.0;
      dcode.data[i * 2 * d + d + j] = T(dlv);
    }
  encoder_backward(m, enc, dcode, res.grads);

  geco.update(res.mse_per_pixel, per_image);
  return res;
}

}  // namespace lns::model
