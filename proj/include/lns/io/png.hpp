#pragma once

// Small PNG writer/reader on top of zlib, covering what the pipeline emits:
// 8-bit RGB (color type 2) for images and 8-bit paletted (color type 3) for
// label masks. The reader handles non-interlaced files with filters 0-4,
// which includes everything the writer produces.

#include <zlib.h>

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lns::io {

struct PngImage {
  int width = 0, height = 0;
  int channels = 0;                       // 3 for RGB, 1 for paletted indices
  std::vector<std::uint8_t> pixels;       // row-major, channels interleaved
  std::vector<std::array<std::uint8_t, 3>> palette;  // non-empty for type 3
};

namespace detail {

inline void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(std::uint8_t(v >> 24));
  out.push_back(std::uint8_t(v >> 16));
  out.push_back(std::uint8_t(v >> 8));
  out.push_back(std::uint8_t(v));
}

inline std::uint32_t get_be32(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
         (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

inline void append_chunk(std::vector<std::uint8_t>& out, const char type[4],
                         const std::uint8_t* data, std::size_t len) {
  put_be32(out, std::uint32_t(len));
  const std::size_t start = out.size();
  out.insert(out.end(), type, type + 4);
  if (len) out.insert(out.end(), data, data + len);
  const auto crc =
      ::crc32(::crc32(0, out.data() + start, uInt(4 + len)), nullptr, 0);
  put_be32(out, std::uint32_t(crc));
}

inline std::vector<std::uint8_t> zlib_pack(const std::vector<std::uint8_t>& raw) {
  uLongf bound = ::compressBound(uLong(raw.size()));
  std::vector<std::uint8_t> out(bound);
  if (::compress2(out.data(), &bound, raw.data(), uLong(raw.size()), 6) != Z_OK)
    throw std::runtime_error("png: deflate failed");
  out.resize(bound);
  return out;
}

inline std::vector<std::uint8_t> zlib_unpack(const std::uint8_t* data,
                                             std::size_t len,
                                             std::size_t expected) {
  std::vector<std::uint8_t> out(expected);
  uLongf dlen = uLongf(expected);
  if (::uncompress(out.data(), &dlen, data, uLong(len)) != Z_OK ||
      dlen != expected)
    throw std::runtime_error("png: inflate failed or size mismatch");
  return out;
}

inline int paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  return pb <= pc ? b : c;
}

}  // namespace detail

inline void write_png(const std::string& path, const PngImage& img) {
  if (img.width <= 0 || img.height <= 0)
    throw std::invalid_argument("png: empty image");
  const bool paletted = img.channels == 1;
  if (!paletted && img.channels != 3)
    throw std::invalid_argument("png: only 1 (paletted) or 3 (RGB) channels");
  if (paletted && img.palette.empty())
    throw std::invalid_argument("png: paletted image without palette");
  if (img.pixels.size() !=
      std::size_t(img.width) * img.height * img.channels)
    throw std::invalid_argument("png: pixel buffer size mismatch");

  std::vector<std::uint8_t> out;
  static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  out.insert(out.end(), sig, sig + 8);

  std::vector<std::uint8_t> ihdr;
  detail::put_be32(ihdr, std::uint32_t(img.width));
  detail::put_be32(ihdr, std::uint32_t(img.height));
  ihdr.push_back(8);                       // bit depth
  ihdr.push_back(paletted ? 3 : 2);        // color type
  ihdr.push_back(0);
  ihdr.push_back(0);
  ihdr.push_back(0);
  detail::append_chunk(out, "IHDR", ihdr.data(), ihdr.size());

  if (paletted) {
    std::vector<std::uint8_t> plte;
    for (const auto& c : img.palette) plte.insert(plte.end(), c.begin(), c.end());
    detail::append_chunk(out, "PLTE", plte.data(), plte.size());
  }

  const std::size_t rowbytes = std::size_t(img.width) * img.channels;
  std::vector<std::uint8_t> raw;
  raw.reserve((rowbytes + 1) * img.height);
  for (int y = 0; y < img.height; ++y) {
    raw.push_back(0);  // filter: none
    const auto* row = img.pixels.data() + std::size_t(y) * rowbytes;
    raw.insert(raw.end(), row, row + rowbytes);
  }
  const auto idat = detail::zlib_pack(raw);
  detail::append_chunk(out, "IDAT", idat.data(), idat.size());
  detail::append_chunk(out, "IEND", nullptr, 0);

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("png: cannot open for write: " + path);
  f.write(reinterpret_cast<const char*>(out.data()), std::streamsize(out.size()));
  if (!f) throw std::runtime_error("png: write failed: " + path);
}

inline PngImage read_png(const std::string& path) {
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  if (!f) throw std::runtime_error("png: cannot open: " + path);
  std::vector<std::uint8_t> buf(std::size_t(f.tellg()));
  f.seekg(0);
  f.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
  static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  if (buf.size() < 8 || std::memcmp(buf.data(), sig, 8) != 0)
    throw std::runtime_error("png: bad signature: " + path);

  PngImage img;
  int color_type = -1;
  std::vector<std::uint8_t> idat;
  std::size_t pos = 8;
  while (pos + 12 <= buf.size()) {
    const std::uint32_t len = detail::get_be32(&buf[pos]);
    if (pos + 12 + len > buf.size())
      throw std::runtime_error("png: truncated chunk: " + path);
    const char* type = reinterpret_cast<const char*>(&buf[pos + 4]);
    const std::uint8_t* data = &buf[pos + 8];
    const std::uint32_t crc_stored = detail::get_be32(&buf[pos + 8 + len]);
    if (std::uint32_t(::crc32(::crc32(0, &buf[pos + 4], uInt(4 + len)),
                              nullptr, 0)) != crc_stored)
      throw std::runtime_error("png: chunk crc mismatch: " + path);
    if (std::memcmp(type, "IHDR", 4) == 0) {
      img.width = int(detail::get_be32(data));
      img.height = int(detail::get_be32(data + 4));
      if (data[8] != 8) throw std::runtime_error("png: unsupported bit depth");
      color_type = data[9];
      if (color_type != 2 && color_type != 3)
        throw std::runtime_error("png: unsupported color type");
      if (data[12] != 0) throw std::runtime_error("png: interlace unsupported");
      img.channels = color_type == 3 ? 1 : 3;
    } else if (std::memcmp(type, "PLTE", 4) == 0) {
      for (std::uint32_t i = 0; i + 2 < len; i += 3)
        img.palette.push_back({data[i], data[i + 1], data[i + 2]});
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.insert(idat.end(), data, data + len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      break;
    }
    pos += 12 + len;
  }
  if (img.width <= 0 || img.height <= 0 || color_type < 0)
    throw std::runtime_error("png: missing IHDR: " + path);

  const std::size_t rowbytes = std::size_t(img.width) * img.channels;
  const auto raw =
      detail::zlib_unpack(idat.data(), idat.size(), (rowbytes + 1) * img.height);

  img.pixels.assign(rowbytes * img.height, 0);
  const int bpp = img.channels;
  std::vector<std::uint8_t> prev(rowbytes, 0);
  for (int y = 0; y < img.height; ++y) {
    const std::uint8_t filter = raw[std::size_t(y) * (rowbytes + 1)];
    const std::uint8_t* src = &raw[std::size_t(y) * (rowbytes + 1) + 1];
    std::uint8_t* dst = &img.pixels[std::size_t(y) * rowbytes];
    for (std::size_t i = 0; i < rowbytes; ++i) {
      const int a = i >= std::size_t(bpp) ? dst[i - bpp] : 0;
      const int b = prev[i];
      const int c = i >= std::size_t(bpp) ? prev[i - bpp] : 0;
      int v = src[i];
      switch (filter) {
        case 0: break;
        case 1: v += a; break;
        case 2: v += b; break;
        case 3: v += (a + b) / 2; break;
        case 4: v += detail::paeth(a, b, c); break;
        default: throw std::runtime_error("png: unknown filter");
      }
      dst[i] = std::uint8_t(v);
    }
    std::memcpy(prev.data(), dst, rowbytes);
  }
  return img;
}

}  // namespace lns::io
