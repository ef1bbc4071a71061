#pragma once

// LLM completers: a deterministic stub reading canned responses keyed by prompt hash, and a
// remote chat-completions client configured from LLM_ENDPOINT / LLM_API_KEY / LLM_MODEL.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "ubsr/core/error.hpp"
#include "ubsr/io/table_io.hpp"

#ifdef UBSR_WITH_HTTP_CLIENT
#include "httplib.h"
#endif

namespace ubsr {

struct GenerationLimits {
    int max_tokens = 4096;
    double temperature = 0.0;
};

class Completer {
public:
    virtual ~Completer() = default;
    virtual std::string complete(const std::string& prompt, const GenerationLimits& limits) = 0;
    virtual std::string name() const = 0;
};

/// 64-bit FNV-1a as 16 lowercase hex digits.
inline std::string prompt_hash(std::string_view text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

class StubCompleter : public Completer {
public:
    explicit StubCompleter(std::filesystem::path dir) : dir_(std::move(dir)) {}

    std::filesystem::path response_path(const std::string& prompt) const {
        return dir_ / (prompt_hash(prompt) + ".txt");
    }

    std::string complete(const std::string& prompt, const GenerationLimits&) override {
        auto path = response_path(prompt);
        if (!std::filesystem::exists(path))
            throw IoError("stub completer: no canned response " + path.string() + " for this prompt");
        return read_text_file(path);
    }

    std::string name() const override { return "stub:" + dir_.string(); }

private:
    std::filesystem::path dir_;
};

struct RemoteConfig {
    std::string endpoint;  // full URL of a chat-completions endpoint
    std::string api_key;
    std::string model;

    static RemoteConfig from_env() {
        auto get = [](const char* k) {
            const char* v = std::getenv(k);
            return v ? std::string(v) : std::string();
        };
        RemoteConfig c{get("LLM_ENDPOINT"), get("LLM_API_KEY"), get("LLM_MODEL")};
        if (c.endpoint.empty()) throw Error("remote completer: LLM_ENDPOINT is not set");
        return c;
    }
};

/// Request body for an OpenAI-style chat-completions endpoint.
inline nlohmann::json chat_request(const RemoteConfig& cfg, const std::string& prompt, const GenerationLimits& limits) {
    nlohmann::json body = {{"messages", {{{"role", "user"}, {"content", prompt}}}},
                           {"max_tokens", limits.max_tokens},
                           {"temperature", limits.temperature}};
    if (!cfg.model.empty()) body["model"] = cfg.model;
    return body;
}

/// Accepts `choices[0].message.content` or `choices[0].text`.
inline std::string chat_response_text(const std::string& body) {
    auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded()) throw ResponseParseError("remote completer: response is not JSON");
    if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
        const auto& c = j["choices"][0];
        if (c.contains("message") && c["message"].contains("content") && c["message"]["content"].is_string())
            return c["message"]["content"].get<std::string>();
        if (c.contains("text") && c["text"].is_string()) return c["text"].get<std::string>();
    }
    throw ResponseParseError("remote completer: no completion text in response");
}

#ifdef UBSR_WITH_HTTP_CLIENT
class RemoteCompleter : public Completer {
public:
    explicit RemoteCompleter(RemoteConfig cfg) : cfg_(std::move(cfg)) {
        auto scheme_end = cfg_.endpoint.find("://");
        if (scheme_end == std::string::npos) throw Error("LLM_ENDPOINT must be an absolute URL");
        auto path_start = cfg_.endpoint.find('/', scheme_end + 3);
        base_ = cfg_.endpoint.substr(0, path_start);
        path_ = path_start == std::string::npos ? "/" : cfg_.endpoint.substr(path_start);
    }

    std::string complete(const std::string& prompt, const GenerationLimits& limits) override {
        httplib::Client cli(base_);
        cli.set_read_timeout(300, 0);
        httplib::Headers headers;
        if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);
        auto res = cli.Post(path_, headers, chat_request(cfg_, prompt, limits).dump(), "application/json");
        if (!res) throw IoError("remote completer: request to " + cfg_.endpoint + " failed: " + httplib::to_string(res.error()));
        if (res->status != 200)
            throw IoError("remote completer: HTTP " + std::to_string(res->status) + " from " + cfg_.endpoint);
        return chat_response_text(res->body);
    }

    std::string name() const override { return "remote:" + cfg_.endpoint; }

private:
    RemoteConfig cfg_;
    std::string base_;
    std::string path_;
};
#endif

/// `stub:<dir>` or `remote` (environment-configured).
inline std::unique_ptr<Completer> make_completer(std::string_view spec) {
    if (spec.substr(0, 5) == "stub:") return std::make_unique<StubCompleter>(std::string(spec.substr(5)));
    if (spec == "remote") {
#ifdef UBSR_WITH_HTTP_CLIENT
        return std::make_unique<RemoteCompleter>(RemoteConfig::from_env());
#else
        throw Error("remote completer not compiled in (build with UBSR_WITH_HTTP_CLIENT)");
#endif
    }
    throw Error("unknown completer '" + std::string(spec) + "' (expected stub:<dir> or remote)");
}

}  // namespace ubsr
