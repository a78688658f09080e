#pragma once

#include <functional>
#include <iostream>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>

namespace restruct {

using LogSink = std::function<void(std::string_view level, std::string_view message)>;

namespace detail {
inline LogSink& log_sink() {
    static LogSink sink = [](std::string_view level, std::string_view message) {
        std::clog << "[restruct] " << level << ": " << message << '\n';
    };
    return sink;
}
inline std::mutex& log_mutex() {
    static std::mutex m;
    return m;
}
} // namespace detail

/// Replace the process-wide log sink; returns the previous one. An empty sink silences logging.
inline LogSink set_log_sink(LogSink sink) {
    std::lock_guard lock(detail::log_mutex());
    return std::exchange(detail::log_sink(), std::move(sink));
}

inline void log_message(std::string_view level, std::string_view message) {
    std::lock_guard lock(detail::log_mutex());
    if (detail::log_sink()) detail::log_sink()(level, message);
}

inline void log_warning(std::string_view message) { log_message("warning", message); }
inline void log_info(std::string_view message) { log_message("info", message); }

} // namespace restruct
