#pragma once

// Binary tensor container shared by dataset files and model checkpoints.
//
// Layout (all integers little-endian):
//   bytes 0..3    magic "LNSC"
//   bytes 4..7    u32 format version (currently 1)
//   bytes 8..15   u64 JSON header length H
//   bytes 16..    UTF-8 JSON header:
//                   { "tensors": [ {name, shape, dtype: "f32"|"u8",
//                                   offset, nbytes}, ... ],
//                     "meta": { ... free-form ... } }
//                 offsets are relative to the payload start
//   ...           payload (tensor bytes, little-endian scalars)
//   last 8 bytes  u64 CRC-64/XZ over everything before it

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lns/core/tensor.hpp"
#include "lns/io/crc64.hpp"

namespace lns::io {

struct NamedTensor {
  std::string name;
  std::vector<std::int64_t> shape;
  std::string dtype;  // "f32" | "u8"
  std::vector<std::uint8_t> bytes;

  static NamedTensor from_f32(std::string name, const Tensor<float>& t) {
    NamedTensor nt;
    nt.name = std::move(name);
    nt.shape = t.shape;
    nt.dtype = "f32";
    nt.bytes.resize(t.data.size() * sizeof(float));
    std::memcpy(nt.bytes.data(), t.data.data(), nt.bytes.size());
    return nt;
  }

  static NamedTensor from_u8(std::string name, const Tensor<std::uint8_t>& t) {
    NamedTensor nt;
    nt.name = std::move(name);
    nt.shape = t.shape;
    nt.dtype = "u8";
    nt.bytes = t.data;
    return nt;
  }

  Tensor<float> to_f32() const {
    if (dtype != "f32")
      throw std::runtime_error("container: tensor '" + name + "' is " + dtype +
                               ", expected f32");
    Tensor<float> t;
    t.shape = shape;
    t.data.resize(bytes.size() / sizeof(float));
    std::memcpy(t.data.data(), bytes.data(), bytes.size());
    if (t.numel() != Tensor<float>::numel_of(shape))
      throw std::runtime_error("container: tensor '" + name + "' size mismatch");
    return t;
  }

  Tensor<std::uint8_t> to_u8() const {
    if (dtype != "u8")
      throw std::runtime_error("container: tensor '" + name + "' is " + dtype +
                               ", expected u8");
    Tensor<std::uint8_t> t;
    t.shape = shape;
    t.data = bytes;
    if (t.numel() != Tensor<std::uint8_t>::numel_of(shape))
      throw std::runtime_error("container: tensor '" + name + "' size mismatch");
    return t;
  }
};

struct Container {
  nlohmann::json meta;
  std::vector<NamedTensor> tensors;

  const NamedTensor& get(const std::string& name) const {
    for (const auto& t : tensors)
      if (t.name == name) return t;
    throw std::runtime_error("container: no tensor named '" + name + "'");
  }
  bool has(const std::string& name) const {
    for (const auto& t : tensors)
      if (t.name == name) return true;
    return false;
  }
};

inline void write_container(const std::string& path,
                            const std::vector<NamedTensor>& tensors,
                            const nlohmann::json& meta) {
  nlohmann::json header;
  header["tensors"] = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& t : tensors) {
    header["tensors"].push_back({{"name", t.name},
                                 {"shape", t.shape},
                                 {"dtype", t.dtype},
                                 {"offset", offset},
                                 {"nbytes", t.bytes.size()}});
    offset += t.bytes.size();
  }
  header["meta"] = meta;
  const std::string hs = header.dump();

  std::string buf;
  buf.reserve(16 + hs.size() + offset);
  buf.append("LNSC", 4);
  const std::uint32_t version = 1;
  buf.append(reinterpret_cast<const char*>(&version), 4);
  const std::uint64_t hlen = hs.size();
  buf.append(reinterpret_cast<const char*>(&hlen), 8);
  buf.append(hs);
  for (const auto& t : tensors)
    buf.append(reinterpret_cast<const char*>(t.bytes.data()), t.bytes.size());
  const std::uint64_t crc = crc64(buf.data(), buf.size());

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("container: cannot open for write: " + path);
  out.write(buf.data(), std::streamsize(buf.size()));
  out.write(reinterpret_cast<const char*>(&crc), 8);
  if (!out) throw std::runtime_error("container: write failed: " + path);
}

inline Container read_container(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw std::runtime_error("container: cannot open: " + path);
  const auto fsize = static_cast<std::uint64_t>(in.tellg());
  if (fsize < 24) throw std::runtime_error("container: truncated file: " + path);
  std::string buf(fsize, '\0');
  in.seekg(0);
  in.read(buf.data(), std::streamsize(fsize));
  if (!in) throw std::runtime_error("container: read failed: " + path);

  std::uint64_t stored_crc;
  std::memcpy(&stored_crc, buf.data() + fsize - 8, 8);
  if (crc64(buf.data(), fsize - 8) != stored_crc)
    throw std::runtime_error("container: checksum mismatch (corrupt or truncated): " + path);

  if (std::memcmp(buf.data(), "LNSC", 4) != 0)
    throw std::runtime_error("container: bad magic in " + path);
  std::uint32_t version;
  std::memcpy(&version, buf.data() + 4, 4);
  if (version != 1)
    throw std::runtime_error("container: unsupported version " +
                             std::to_string(version) + " in " + path);
  std::uint64_t hlen;
  std::memcpy(&hlen, buf.data() + 8, 8);
  if (16 + hlen > fsize - 8)
    throw std::runtime_error("container: header overruns file: " + path);

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(buf.substr(16, hlen));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("container: bad header JSON in " + path + ": " +
                             e.what());
  }

  Container c;
  c.meta = header.value("meta", nlohmann::json::object());
  const std::uint64_t payload_start = 16 + hlen;
  const std::uint64_t payload_len = fsize - 8 - payload_start;
  for (const auto& jt : header.at("tensors")) {
    NamedTensor t;
    t.name = jt.at("name").get<std::string>();
    t.shape = jt.at("shape").get<std::vector<std::int64_t>>();
    t.dtype = jt.at("dtype").get<std::string>();
    const auto off = jt.at("offset").get<std::uint64_t>();
    const auto nbytes = jt.at("nbytes").get<std::uint64_t>();
    if (off + nbytes > payload_len)
      throw std::runtime_error("container: tensor '" + t.name +
                               "' overruns payload in " + path);
    const char* src = buf.data() + payload_start + off;
    t.bytes.assign(src, src + nbytes);
    c.tensors.push_back(std::move(t));
  }
  return c;
}

}  // namespace lns::io
