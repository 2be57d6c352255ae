// SPDX-License-Identifier: Apache-2.0
#include "labyrinth/llm/openai.hpp"

#include "labyrinth/llm/wire.hpp"

#include <httplib.h>

#include <cstdlib>
#include <iostream>
#include <thread>

namespace labyrinth::llm {

namespace {

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : fallback;
}

bool retryable_status(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

OpenAiConfig OpenAiConfig::from_env(OpenAiConfig base) {
    base.base_url = env_or("LABYRINTH_API_URL", base.base_url);
    base.model = env_or("LABYRINTH_MODEL", base.model);
    base.embedding_model = env_or("LABYRINTH_EMBED_MODEL", base.embedding_model);
    base.api_key = env_or("LABYRINTH_API_KEY", env_or("OPENAI_API_KEY", base.api_key));
    const std::string debug = env_or("LABYRINTH_DEBUG", "");
    if (!debug.empty() && debug != "0") base.debug = true;
    return base;
}

OpenAiConfig OpenAiConfig::from_env() { return from_env(OpenAiConfig{}); }

OpenAiProvider::OpenAiProvider(OpenAiConfig config) : config_(std::move(config)) {
    std::string url = config_.base_url;
    while (!url.empty() && url.back() == '/') url.pop_back();
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) throw Error("provider URL needs a scheme: " + config_.base_url);
    const auto slash = url.find('/', scheme + 3);
    origin_ = url.substr(0, slash);
    path_prefix_ = slash == std::string::npos ? "" : url.substr(slash);
}

void OpenAiProvider::log(std::string_view label, const std::string& text) const {
    if (!config_.debug) return;
    std::string redacted = text;
    if (!config_.api_key.empty()) {
        for (auto pos = redacted.find(config_.api_key); pos != std::string::npos;
             pos = redacted.find(config_.api_key, pos)) {
            redacted.replace(pos, config_.api_key.size(), "[redacted]");
        }
    }
    std::cerr << "[labyrinth:provider] " << label << ": " << redacted << "\n";
}

std::string OpenAiProvider::post(const std::string& path, const Json& body) const {
    httplib::Client client(origin_);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
    const std::string payload = body.dump();
    log("request " + path, payload);

    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(config_.backoff * (1 << (attempt - 1)));
        auto res = client.Post(path_prefix_ + path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport failure: " + httplib::to_string(res.error());
            log("error", last_error);
            continue;
        }
        log("response " + std::to_string(res->status), res->body);
        if (res->status >= 200 && res->status < 300) return res->body;
        last_error = "provider returned HTTP " + std::to_string(res->status);
        if (!retryable_status(res->status)) throw ProviderError(last_error, res->body, false);
    }
    throw ProviderError(last_error + " after " + std::to_string(config_.max_retries + 1) + " attempts", {}, true);
}

ModelTurn OpenAiProvider::complete(const PromptPackage& prompt) {
    return wire::parse_chat_response(post("/chat/completions", wire::chat_request(prompt, config_.model)));
}

std::vector<Vector> OpenAiProvider::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) throw Error("embed needs at least one text");
    return wire::parse_embedding_response(
        post("/embeddings", wire::embedding_request(texts, config_.embedding_model)), texts.size());
}

}  // namespace labyrinth::llm
