#pragma once

#include <memory>

#include <spdlog/logger.h>

namespace dcot {

/// Library-wide stderr logger. Level comes from the DCOT_LOG environment
/// variable (trace, debug, info, warn, error, off); default warn.
std::shared_ptr<spdlog::logger> log();

}  // namespace dcot
