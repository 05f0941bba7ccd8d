#pragma once

#include <cstdint>
#include <cstring>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "lns/core/adam.hpp"
#include "lns/io/container.hpp"
#include "lns/model/losses.hpp"
#include "lns/model/model.hpp"

namespace lns::model {

struct CheckpointMeta {
  Variant variant = Variant::kAE;
  int latent_dim = kLatentDim;
  std::uint64_t seed = 0;
  std::int64_t iteration = 0;
  std::string dataset;

  nlohmann::json to_json() const {
    return {{"variant", variant_name(variant)},
            {"latent_dim", latent_dim},
            {"seed", seed},
            {"iteration", iteration},
            {"dataset", dataset}};
  }
};

/// Everything needed to resume training bit-exactly: parameters, Adam
/// moments and step count, and (for the VAE) the GECO state packed as raw
/// little-endian doubles in a u8 tensor.
inline void save_checkpoint(Model<float>& m, const CheckpointMeta& meta,
                            const std::string& path,
                            const AdamState<float>* adam = nullptr,
                            const GecoState* geco = nullptr) {
  std::vector<io::NamedTensor> tensors;
  auto named = m.named_params();
  for (auto& [name, t] : named)
    tensors.push_back(io::NamedTensor::from_f32(name, *t));
  nlohmann::json j = meta.to_json();
  if (adam) {
    for (std::size_t i = 0; i < named.size(); ++i) {
      tensors.push_back(io::NamedTensor::from_f32("adam.m." + named[i].first,
                                                  adam->m[i]));
      tensors.push_back(io::NamedTensor::from_f32("adam.v." + named[i].first,
                                                  adam->v[i]));
    }
    j["adam"] = {{"lr", adam->lr},
                 {"beta1", adam->beta1},
                 {"beta2", adam->beta2},
                 {"eps", adam->eps},
                 {"step_count", adam->step_count}};
  }
  if (geco) {
    Tensor<std::uint8_t> raw({2 * std::int64_t(sizeof(double))});
    std::memcpy(raw.data.data(), &geco->beta, sizeof(double));
    std::memcpy(raw.data.data() + sizeof(double), &geco->err_ema, sizeof(double));
    tensors.push_back(io::NamedTensor::from_u8("geco.state", raw));
    j["geco"] = {{"g_goal", geco->g_goal},
                 {"ema_decay", geco->ema_decay},
                 {"step_size", geco->step_size},
                 {"beta_min", geco->beta_min},
                 {"beta_max", geco->beta_max}};
  }
  io::write_container(path, tensors, j);
}

struct LoadedCheckpoint {
  Model<float> model;
  CheckpointMeta meta;
  std::optional<AdamState<float>> adam;
  std::optional<GecoState> geco;
};

inline LoadedCheckpoint load_checkpoint(const std::string& path,
                                        std::optional<Variant> expect = {}) {
  auto c = io::read_container(path);
  CheckpointMeta meta;
  meta.variant = parse_variant(c.meta.at("variant").get<std::string>());
  meta.latent_dim = c.meta.at("latent_dim").get<int>();
  meta.seed = c.meta.at("seed").get<std::uint64_t>();
  meta.iteration = c.meta.at("iteration").get<std::int64_t>();
  meta.dataset = c.meta.value("dataset", "");
  if (expect && *expect != meta.variant)
    throw std::runtime_error("checkpoint " + path + " holds a " +
                             variant_name(meta.variant) + " model, expected " +
                             variant_name(*expect));

  LoadedCheckpoint out;
  out.meta = meta;
  // Initialize topology, then overwrite every parameter from the container.
  out.model = Model<float>::init(meta.variant, Rng(0), meta.latent_dim);
  for (auto& [name, t] : out.model.named_params()) {
    auto loaded = c.get(name).to_f32();
    if (loaded.shape != t->shape)
      throw std::runtime_error("checkpoint: tensor '" + name +
                               "' has shape " + loaded.shape_str() +
                               ", model expects " + t->shape_str());
    *t = std::move(loaded);
  }

  if (c.meta.contains("adam")) {
    auto params = out.model.params();
    AdamState<float> st = AdamState<float>::init(
        params, c.meta["adam"].at("lr").get<double>(),
        c.meta["adam"].at("beta1").get<double>(),
        c.meta["adam"].at("beta2").get<double>(),
        c.meta["adam"].at("eps").get<double>());
    st.step_count = c.meta["adam"].at("step_count").get<std::int64_t>();
    auto named = out.model.named_params();
    for (std::size_t i = 0; i < named.size(); ++i) {
      st.m[i] = c.get("adam.m." + named[i].first).to_f32();
      st.v[i] = c.get("adam.v." + named[i].first).to_f32();
    }
    out.adam = std::move(st);
  }
  if (c.meta.contains("geco")) {
    GecoState g;
    g.g_goal = c.meta["geco"].at("g_goal").get<double>();
    g.ema_decay = c.meta["geco"].at("ema_decay").get<double>();
    g.step_size = c.meta["geco"].at("step_size").get<double>();
    g.beta_min = c.meta["geco"].at("beta_min").get<double>();
    g.beta_max = c.meta["geco"].at("beta_max").get<double>();
    const auto& raw = c.get("geco.state").bytes;
    if (raw.size() != 2 * sizeof(double))
      throw std::runtime_error("checkpoint: malformed geco.state");
    std::memcpy(&g.beta, raw.data(), sizeof(double));
    std::memcpy(&g.err_ema, raw.data() + sizeof(double), sizeof(double));
    out.geco = g;
  }
  return out;
}

}  // namespace lns::model
