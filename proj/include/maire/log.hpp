#pragma once

#include <spdlog/logger.h>

#include <memory>

namespace maire {

// Process-wide logger writing single-line records to stderr. The level is
// read once from the MAIRE_LOG environment variable (trace, debug, info,
// warn, error, off); the default is warn.
spdlog::logger& log();

}  // namespace maire
