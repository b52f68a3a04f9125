// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace evomon::ingest {

/// 8-bit grayscale PNG, no interlace, filter 0 on every row.
std::string encode_gray_png(std::size_t width, std::size_t height, std::span<const std::uint8_t> pixels);

}  // namespace evomon::ingest
