// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "labyrinth/llm/provider.hpp"

#include <chrono>

namespace labyrinth::llm {

struct OpenAiConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string model = "gpt-4o";
    std::string embedding_model = "text-embedding-3-small";
    std::string api_key;
    int max_retries = 3;
    std::chrono::milliseconds backoff{500};
    std::chrono::seconds timeout{120};
    bool debug = false;

    // LABYRINTH_API_URL, LABYRINTH_MODEL, LABYRINTH_EMBED_MODEL,
    // LABYRINTH_API_KEY (or OPENAI_API_KEY), LABYRINTH_DEBUG.
    static OpenAiConfig from_env(OpenAiConfig base);
    static OpenAiConfig from_env();
};

// Chat completions and embeddings against an OpenAI-compatible endpoint.
// Stateless between calls, so it can be shared across sessions.
class OpenAiProvider final : public LlmProvider {
public:
    explicit OpenAiProvider(OpenAiConfig config);

    ModelTurn complete(const PromptPackage& prompt) override;
    std::vector<Vector> embed(const std::vector<std::string>& texts) override;

    const OpenAiConfig& config() const { return config_; }

private:
    std::string post(const std::string& path, const Json& body) const;
    void log(std::string_view label, const std::string& text) const;

    OpenAiConfig config_;
    std::string origin_;
    std::string path_prefix_;
};

}  // namespace labyrinth::llm
