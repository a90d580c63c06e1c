#pragma once

#include <string>

namespace nmbc {

// Verbosity is read once from the NMBC_LOG environment variable:
// 0 = silent, 1 = warnings (default), 2 = info, 3 = debug.
int log_level();

void log_warn(const std::string& msg);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace nmbc
