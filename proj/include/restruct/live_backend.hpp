#pragma once

// Chat-completion client over HTTP(S). Requires httplib; link the
// `restruct_live` target, which enables TLS when OpenSSL is available.

#include <cstdlib>
#include <string>

#include <httplib.h>

#include "restruct/chat_backend.hpp"
#include "restruct/error.hpp"
#include "restruct/io.hpp"

namespace restruct {

struct LiveBackendConfig {
    std::string endpoint = "https://api.openai.com/v1/chat/completions";
    std::string model = "gpt-4";
    std::string api_key_env = "OPENAI_API_KEY"; ///< empty: send no Authorization header
    int timeout_seconds = 120;
};

class LiveBackend : public ChatBackend {
public:
    explicit LiveBackend(LiveBackendConfig config) : config_(std::move(config)) {
        const auto scheme = config_.endpoint.find("://");
        if (scheme == std::string::npos) throw UsageError("backend endpoint must start with http:// or https://");
        const auto slash = config_.endpoint.find('/', scheme + 3);
        base_ = config_.endpoint.substr(0, slash);
        path_ = slash == std::string::npos ? "/" : config_.endpoint.substr(slash);
        if (!config_.api_key_env.empty()) {
            const char* key = std::getenv(config_.api_key_env.c_str());
            if (!key || !*key) throw UsageError("environment variable " + config_.api_key_env + " is not set");
            api_key_ = key;
        }
    }

    std::string identity() const override { return config_.model; }

    std::string complete(const std::string& system, const std::string& user, const DecodingParams& params) const override {
        const json body = {{"model", config_.model},
                           {"messages", json::array({{{"role", "system"}, {"content", system}},
                                                     {{"role", "user"}, {"content", user}}})},
                           {"temperature", params.temperature}};
        httplib::Client client(base_);
        client.set_connection_timeout(config_.timeout_seconds, 0);
        client.set_read_timeout(config_.timeout_seconds, 0);
        httplib::Headers headers;
        if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
        const auto res = client.Post(path_, headers, body.dump(), "application/json");
        if (!res) throw BackendError("request to " + config_.endpoint + " failed: " + httplib::to_string(res.error()));
        if (res->status != 200)
            throw BackendError("backend returned HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
        try {
            const auto j = json::parse(res->body);
            return j.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception& e) {
            throw BackendError(std::string("malformed chat completion response: ") + e.what());
        }
    }

private:
    LiveBackendConfig config_;
    std::string base_, path_, api_key_;
};

} // namespace restruct
