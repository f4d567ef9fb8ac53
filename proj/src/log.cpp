#include "qcap/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

#include "qcap/errors.hpp"

namespace qcap {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
    case ErrorKind::BlowUpOrInstability: return "BlowUpOrInstability";
    case ErrorKind::NoContraction: return "NoContraction";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::Inconsistent: return "Inconsistent";
    case ErrorKind::NotAsymptotic: return "NotAsymptotic";
    case ErrorKind::DegenerateProbe: return "DegenerateProbe";
    case ErrorKind::BadData: return "BadData";
    case ErrorKind::IllPosed: return "IllPosed";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::LinearSolve: return "LinearSolveFailure";
    case ErrorKind::StiffFailure: return "StiffFailure";
    case ErrorKind::NonMonotoneConvergence: return "NonMonotoneConvergence";
  }
  return "Error";
}

namespace log {
namespace {
std::atomic<Level> g_level{Level::Warn};
std::mutex g_mutex;
}  // namespace

void set_level(Level l) noexcept { g_level = l; }
Level level() noexcept { return g_level; }

void warn(const std::string& msg) {
  if (g_level.load() < Level::Warn) return;
  std::lock_guard lock(g_mutex);
  std::clog << "[qcap] warning: " << msg << '\n';
}

void info(const std::string& msg) {
  if (g_level.load() < Level::Info) return;
  std::lock_guard lock(g_mutex);
  std::clog << "[qcap] " << msg << '\n';
}

}  // namespace log
}  // namespace qcap
