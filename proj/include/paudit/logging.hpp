#pragma once

#include <memory>

#include <spdlog/logger.h>

namespace paudit {

/// Shared stderr logger. Verbosity comes from PARAMETRIC_AUDIT_LOG
/// (trace|debug|info|warn|error|off), default warn.
std::shared_ptr<spdlog::logger> logger();

}  // namespace paudit
