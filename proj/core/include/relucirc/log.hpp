#pragma once

#include <functional>
#include <string_view>

namespace relucirc {

enum class LogLevel { kInfo, kWarning };

using LogSink = std::function<void(LogLevel, std::string_view)>;

/// Replaces the process-wide sink. The default writes warnings to stderr and
/// drops info messages. Returns the previous sink.
LogSink set_log_sink(LogSink sink);

void log_info(std::string_view message);
void log_warning(std::string_view message);

}  // namespace relucirc
