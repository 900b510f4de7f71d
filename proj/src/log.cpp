#include "olfalign/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace olfalign::log {
namespace {

std::atomic<Level> g_level{Level::warn};
std::mutex g_mutex;

void emit(Level at, std::string_view tag, std::string_view message) {
  if (at < g_level.load(std::memory_order_relaxed)) return;
  std::lock_guard lock(g_mutex);
  std::cerr << '[' << tag << "] " << message << '\n';
}

}  // namespace

void set_level(Level level) { g_level.store(level, std::memory_order_relaxed); }
Level level() { return g_level.load(std::memory_order_relaxed); }

void debug(std::string_view message) { emit(Level::debug, "debug", message); }
void info(std::string_view message) { emit(Level::info, "info", message); }
void warn(std::string_view message) { emit(Level::warn, "warn", message); }
void error(std::string_view message) { emit(Level::error, "error", message); }

}  // namespace olfalign::log
