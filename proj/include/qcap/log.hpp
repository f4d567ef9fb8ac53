#pragma once

#include <string>

namespace qcap::log {

enum class Level { Quiet = 0, Warn = 1, Info = 2 };

void set_level(Level level) noexcept;
Level level() noexcept;

void warn(const std::string& msg);
void info(const std::string& msg);

}  // namespace qcap::log
