#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace lns::io {

// CRC-64/XZ (reflected, poly 0xC96C5795D7870F42, init/xorout ~0).
inline std::uint64_t crc64(const void* data, std::size_t len,
                           std::uint64_t seed = 0) {
  static const auto table = [] {
    std::array<std::uint64_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint64_t c = i;
      for (int b = 0; b < 8; ++b)
        c = (c & 1) ? (c >> 1) ^ 0xC96C5795D7870F42ULL : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  std::uint64_t crc = ~seed;
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i)
    crc = table[(crc ^ p[i]) & 0xFF] ^ (crc >> 8);
  return ~crc;
}

}  // namespace lns::io
