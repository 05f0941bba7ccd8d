#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lns/data/gg_datasets.hpp"
#include "lns/io/container.hpp"
#include "lns/io/crc64.hpp"
#include "lns/io/png.hpp"

namespace lns::gg {

struct SplitCounts {
  std::int64_t train = 30000;
  std::int64_t val = 300;
  std::int64_t test = 100;

  std::int64_t of(Split s) const {
    switch (s) {
      case Split::kTrain: return train;
      case Split::kVal: return val;
      case Split::kTest: return test;
    }
    return 0;
  }
};

struct DatasetManifest {
  std::string dataset;
  std::uint64_t master_seed = 0;
  int generator_version = 1;
  SplitCounts counts;
  std::map<std::string, std::vector<int>> k_per_sample;  // split -> K list

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["dataset"] = dataset;
    j["master_seed"] = master_seed;
    j["generator_version"] = generator_version;
    for (Split s : {Split::kTrain, Split::kVal, Split::kTest}) {
      nlohmann::json sj;
      sj["count"] = counts.of(s);
      sj["images"] = std::string(split_name(s)) + "_images.bin";
      sj["masks"] = std::string(split_name(s)) + "_masks.bin";
      sj["k"] = k_per_sample.count(split_name(s))
                    ? nlohmann::json(k_per_sample.at(split_name(s)))
                    : nlohmann::json::array();
      j["splits"][split_name(s)] = sj;
    }
    return j;
  }

  static DatasetManifest from_json(const nlohmann::json& j) {
    DatasetManifest m;
    m.dataset = j.at("dataset").get<std::string>();
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.generator_version = j.at("generator_version").get<int>();
    m.counts.train = j.at("splits").at("train").at("count").get<std::int64_t>();
    m.counts.val = j.at("splits").at("val").at("count").get<std::int64_t>();
    m.counts.test = j.at("splits").at("test").at("count").get<std::int64_t>();
    for (const char* s : {"train", "val", "test"})
      m.k_per_sample[s] = j.at("splits").at(s).at("k").get<std::vector<int>>();
    return m;
  }
};

namespace detail {

/// Incremental container writer for large tensors: declares the tensor table
/// up front and streams payload bytes through a running CRC, so a 30k-image
/// split never has to be buffered twice in memory.
class ContainerStreamWriter {
 public:
  struct Decl {
    std::string name;
    std::vector<std::int64_t> shape;
    std::string dtype;
  };

  ContainerStreamWriter(const std::string& path, const std::vector<Decl>& decls,
                        const nlohmann::json& meta)
      : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
    if (!out_) throw std::runtime_error("dataset: cannot open " + path);
    nlohmann::json header;
    header["tensors"] = nlohmann::json::array();
    std::uint64_t offset = 0;
    for (const auto& d : decls) {
      const std::uint64_t elems =
          std::uint64_t(Tensor<float>::numel_of(d.shape));
      const std::uint64_t nbytes = elems * (d.dtype == "f32" ? 4 : 1);
      header["tensors"].push_back({{"name", d.name},
                                   {"shape", d.shape},
                                   {"dtype", d.dtype},
                                   {"offset", offset},
                                   {"nbytes", nbytes}});
      offset += nbytes;
    }
    header["meta"] = meta;
    expected_ = offset;
    const std::string hs = header.dump();
    std::string prefix;
    prefix.append("LNSC", 4);
    const std::uint32_t version = 1;
    prefix.append(reinterpret_cast<const char*>(&version), 4);
    const std::uint64_t hlen = hs.size();
    prefix.append(reinterpret_cast<const char*>(&hlen), 8);
    prefix.append(hs);
    crc_ = io::crc64(prefix.data(), prefix.size());
    out_.write(prefix.data(), std::streamsize(prefix.size()));
  }

  void append(const void* data, std::size_t nbytes) {
    // Running CRC over split payloads: crc64(a+b) via seeded continuation.
    crc_ = io::crc64(data, nbytes, crc_);
    out_.write(static_cast<const char*>(data), std::streamsize(nbytes));
    written_ += nbytes;
  }

  void finish() {
    if (written_ != expected_)
      throw std::runtime_error("dataset: wrote " + std::to_string(written_) +
                               " payload bytes, declared " +
                               std::to_string(expected_));
    out_.write(reinterpret_cast<const char*>(&crc_), 8);
    if (!out_) throw std::runtime_error("dataset: write failed: " + path_);
    out_.close();
  }

 private:
  std::ofstream out_;
  std::string path_;
  std::uint64_t crc_ = 0;
  std::uint64_t written_ = 0;
  std::uint64_t expected_ = 0;
};

}  // namespace detail

/// Generate one split of a dataset directly to disk.
inline std::vector<int> write_split(const std::string& dir, DatasetId id,
                                    Split split, std::int64_t count,
                                    std::uint64_t master_seed) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::string base = std::string(dir) + "/" + split_name(split);
  nlohmann::json meta{{"dataset", dataset_name(id)},
                      {"split", split_name(split)},
                      {"master_seed", master_seed}};
  detail::ContainerStreamWriter images(
      base + "_images.bin",
      {{"images", {count, kChannels, kImageSize, kImageSize}, "f32"}}, meta);
  detail::ContainerStreamWriter masks(
      base + "_masks.bin", {{"masks", {count, kImageSize, kImageSize}, "u8"}},
      meta);
  std::vector<int> ks;
  ks.reserve(std::size_t(count));
  for (std::int64_t i = 0; i < count; ++i) {
    SampleRecord rec = generate_sample(id, split, i, master_seed);
    images.append(rec.image.data.data(), rec.image.data.size() * sizeof(float));
    masks.append(rec.mask.data.data(), rec.mask.data.size());
    ks.push_back(rec.k);
  }
  images.finish();
  masks.finish();
  return ks;
}

inline DatasetManifest write_dataset(const std::string& dir, DatasetId id,
                                     std::uint64_t master_seed,
                                     SplitCounts counts = {}) {
  DatasetManifest m;
  m.dataset = dataset_name(id);
  m.master_seed = master_seed;
  m.counts = counts;
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest})
    m.k_per_sample[split_name(s)] =
        write_split(dir, id, s, counts.of(s), master_seed);
  std::ofstream mf(std::string(dir) + "/manifest.json", std::ios::trunc);
  if (!mf) throw std::runtime_error("dataset: cannot write manifest in " + dir);
  mf << m.to_json().dump(2) << "\n";
  return m;
}

inline DatasetManifest read_manifest(const std::string& dir) {
  std::ifstream mf(std::string(dir) + "/manifest.json");
  if (!mf)
    throw std::runtime_error("dataset: no manifest.json in '" + dir + "'");
  nlohmann::json j;
  try {
    mf >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("dataset: bad manifest in " + dir + ": " + e.what());
  }
  return DatasetManifest::from_json(j);
}

/// One split fully loaded in memory.
struct LoadedSplit {
  Tensor<float> images;        // [n, 3, 64, 64]
  Tensor<std::uint8_t> masks;  // [n, 64, 64]
  std::vector<int> k;

  std::int64_t size() const { return images.rank() ? images.dim(0) : 0; }

  const float* image(std::int64_t i) const {
    return images.ptr() + i * kChannels * kImageSize * kImageSize;
  }
  const std::uint8_t* mask(std::int64_t i) const {
    return masks.ptr() + i * kImageSize * kImageSize;
  }
};

inline LoadedSplit read_split(const std::string& dir, Split split) {
  const auto manifest = read_manifest(dir);
  const std::string base = std::string(dir) + "/" + split_name(split);
  LoadedSplit ls;
  ls.images = io::read_container(base + "_images.bin").get("images").to_f32();
  ls.masks = io::read_container(base + "_masks.bin").get("masks").to_u8();
  ls.k = manifest.k_per_sample.at(split_name(split));
  if (ls.images.dim(0) != ls.masks.dim(0) ||
      ls.images.dim(0) != std::int64_t(ls.k.size()))
    throw std::runtime_error("dataset: split " + std::string(split_name(split)) +
                             " is inconsistent in " + dir);
  return ls;
}

// Fixed palette for mask PNGs; label i takes color i.
inline const std::vector<std::array<std::uint8_t, 3>>& mask_palette() {
  static const std::vector<std::array<std::uint8_t, 3>> p = {
      {40, 40, 48},    {230, 196, 52},  {112, 48, 160}, {68, 170, 153},
      {204, 102, 119}, {136, 204, 238}, {221, 204, 119}, {17, 119, 51},
      {170, 68, 153},  {102, 17, 0},    {136, 136, 136}, {255, 255, 255},
      {60, 120, 216},  {244, 133, 0},   {128, 0, 64},   {0, 64, 128}};
  return p;
}

inline void export_image_png(const float* chw, const std::string& path) {
  io::PngImage img;
  img.width = kImageSize;
  img.height = kImageSize;
  img.channels = 3;
  img.pixels.resize(std::size_t(kImageSize) * kImageSize * 3);
  const int plane = kImageSize * kImageSize;
  for (int p = 0; p < plane; ++p)
    for (int c = 0; c < 3; ++c) {
      float v = chw[c * plane + p];
      v = v < 0 ? 0 : (v > 1 ? 1 : v);
      img.pixels[std::size_t(p) * 3 + c] = std::uint8_t(std::lround(v * 255.0f));
    }
  std::filesystem::create_directories(
      std::filesystem::path(path).parent_path().empty()
          ? "."
          : std::filesystem::path(path).parent_path().string());
  io::write_png(path, img);
}

inline void export_mask_png(const std::uint8_t* mask, const std::string& path) {
  io::PngImage img;
  img.width = kImageSize;
  img.height = kImageSize;
  img.channels = 1;
  img.palette = mask_palette();
  img.pixels.assign(mask, mask + kImageSize * kImageSize);
  std::filesystem::create_directories(
      std::filesystem::path(path).parent_path().empty()
          ? "."
          : std::filesystem::path(path).parent_path().string());
  io::write_png(path, img);
}

inline void export_png(const SampleRecord& rec, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::string stem = std::string(dir) + "/" +
                           std::string(split_name(rec.split)) + "_" +
                           std::to_string(rec.index);
  export_image_png(rec.image.ptr(), stem + ".png");
  export_mask_png(rec.mask.ptr(), stem + "_mask.png");
}

}  // namespace lns::gg
