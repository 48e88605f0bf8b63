#pragma once

#include <iostream>
#include <mutex>
#include <string>

namespace citywell::log {

enum class Level { debug = 0, info = 1, warn = 2, error = 3, silent = 4 };

inline Level& threshold() {
    static Level lvl = Level::info;
    return lvl;
}

inline std::mutex& sink_mutex() {
    static std::mutex m;
    return m;
}

inline void emit(Level lvl, const std::string& msg) {
    if (lvl < threshold()) return;
    static const char* names[] = {"debug", "info", "warn", "error"};
    std::lock_guard<std::mutex> lock(sink_mutex());
    std::cerr << "[" << names[static_cast<int>(lvl)] << "] " << msg << "\n";
}

inline void info(const std::string& msg) { emit(Level::info, msg); }
inline void warn(const std::string& msg) { emit(Level::warn, msg); }
inline void error(const std::string& msg) { emit(Level::error, msg); }

}  // namespace citywell::log
