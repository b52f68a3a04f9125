// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evomon {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

/// Writes to a sibling temp file, then renames over `path`; readers see either
/// the old or the new content.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

/// Raw float32, little-endian, in the given order.
std::string encode_f32_le(std::span<const float> values);
std::vector<float> decode_f32_le(std::string_view bytes);

}  // namespace evomon
