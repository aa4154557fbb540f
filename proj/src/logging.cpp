#include "paudit/logging.hpp"

#include <cstdlib>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace paudit {

std::shared_ptr<spdlog::logger> logger() {
    static const std::shared_ptr<spdlog::logger> log = [] {
        auto l = spdlog::stderr_color_mt("paudit");
        spdlog::level::level_enum level = spdlog::level::warn;
        if (const char* env = std::getenv("PARAMETRIC_AUDIT_LOG"); env && *env)
            level = spdlog::level::from_str(env);
        l->set_level(level);
        return l;
    }();
    return log;
}

}  // namespace paudit
