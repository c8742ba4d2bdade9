#include "rsf/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace rsf::log {

namespace {
std::atomic<int> g_level{static_cast<int>(Level::Info)};
std::mutex g_mutex;

void emit(Level at, const char* tag, const std::string& msg) {
    if (g_level.load() < static_cast<int>(at)) return;
    std::lock_guard<std::mutex> lock(g_mutex);
    std::cerr << tag << msg << '\n';
}
}  // namespace

void set_level(Level l) { g_level.store(static_cast<int>(l)); }
Level level() { return static_cast<Level>(g_level.load()); }

void warn(const std::string& msg) { emit(Level::Warn, "warning: ", msg); }
void info(const std::string& msg) { emit(Level::Info, "", msg); }
void debug(const std::string& msg) { emit(Level::Debug, "debug: ", msg); }

}  // namespace rsf::log
