// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <string_view>

namespace evomon {

/// Incremental 64-bit FNV-1a.
class Fnv1a64 {
 public:
  Fnv1a64& update(std::string_view bytes) {
    for (unsigned char c : bytes) {
      state_ ^= c;
      state_ *= 0x100000001B3ULL;
    }
    return *this;
  }

  std::uint64_t value() const { return state_; }

  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
    return buf;
  }

 private:
  std::uint64_t state_ = 0xCBF29CE484222325ULL;
};

/// Digest of an ordered id sequence; written into snapshot metadata so that
/// blocks written against a different row order can be detected.
inline std::string order_digest(std::span<const std::string> ids) {
  Fnv1a64 h;
  for (const auto& id : ids) {
    h.update(id);
    h.update(std::string_view("\n", 1));
  }
  return h.hex();
}

}  // namespace evomon
