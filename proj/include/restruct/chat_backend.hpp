#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <functional>
#include <mutex>
#include <string>
#include <thread>

#include "restruct/error.hpp"
#include "restruct/io.hpp"
#include "restruct/log.hpp"

namespace restruct {

struct DecodingParams {
    double temperature = 0.0;
};

/// A chat-completion model. Implementations must be safe to call from
/// several threads; a transport or protocol failure raises BackendError.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual std::string complete(const std::string& system, const std::string& user,
                                 const DecodingParams& params) const = 0;
    virtual std::string identity() const = 0;
};

struct RetryPolicy {
    int retries = 3; ///< extra attempts after the first
    std::chrono::milliseconds initial_backoff{500};
    double multiplier = 2.0;
    /// Replaceable so tests do not sleep.
    std::function<void(std::chrono::milliseconds)> sleep = [](std::chrono::milliseconds d) {
        std::this_thread::sleep_for(d);
    };
};

/// Append-only JSON-lines record of every prompt/response exchange. No
/// timestamps are written so that equal runs produce equal files.
class TranscriptLog {
public:
    TranscriptLog() = default;
    explicit TranscriptLog(const fs::path& path) : path_(path) {
        if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
        std::ofstream(path_, std::ios::trunc);
    }

    void append(json record) {
        std::lock_guard lock(mutex_);
        record["seq"] = seq_++;
        if (path_.empty()) return;
        std::ofstream out(path_, std::ios::app);
        if (!out) throw DataError("cannot append to transcript: " + path_.string());
        out << record.dump() << '\n';
    }

    std::uint64_t size() const {
        std::lock_guard lock(mutex_);
        return seq_;
    }

private:
    fs::path path_;
    mutable std::mutex mutex_;
    std::uint64_t seq_ = 0;
};

/// One logical completion with transport retries and exponential backoff.
/// Every attempt, failed or not, is appended to `transcript` when given.
inline std::string complete_with_retry(const ChatBackend& backend, const std::string& system, const std::string& user,
                                       const DecodingParams& params, const RetryPolicy& policy,
                                       TranscriptLog* transcript, std::string_view agent) {
    auto delay = policy.initial_backoff;
    for (int attempt = 0;; ++attempt) {
        json rec = {{"agent", agent}, {"attempt", attempt}, {"model", backend.identity()}, {"system", system},
                    {"user", user}};
        try {
            auto text = backend.complete(system, user, params);
            if (transcript) {
                rec["response"] = text;
                transcript->append(std::move(rec));
            }
            return text;
        } catch (const BackendError& e) {
            if (transcript) {
                rec["error"] = e.what();
                transcript->append(std::move(rec));
            }
            if (attempt >= policy.retries) throw;
            log_warning(std::string(agent) + ": backend call failed (" + e.what() + "), retrying");
            if (policy.sleep) policy.sleep(delay);
            delay = std::chrono::milliseconds(static_cast<std::int64_t>(static_cast<double>(delay.count()) * policy.multiplier));
        }
    }
}

} // namespace restruct
