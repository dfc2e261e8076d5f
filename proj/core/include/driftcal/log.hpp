#pragma once

#include <string>

namespace driftcal {

enum class LogLevel { quiet = 0, warning = 1, info = 2 };

void set_log_level(LogLevel level);
LogLevel log_level();

/// Thread-safe line output to stderr.
void log_warning(const std::string& message);
void log_info(const std::string& message);

}  // namespace driftcal
