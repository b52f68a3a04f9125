// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <functional>
#include <string_view>

namespace evomon {

enum class LogLevel { debug, info, warning, error };

using LogSink = std::function<void(LogLevel, std::string_view)>;

/// Replaces the process-wide sink (default: stderr, warnings and above).
/// Returns the previous sink.
LogSink set_log_sink(LogSink sink);

void log(LogLevel level, std::string_view message);

inline void log_warning(std::string_view message) { log(LogLevel::warning, message); }
inline void log_info(std::string_view message) { log(LogLevel::info, message); }

}  // namespace evomon
