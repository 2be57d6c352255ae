// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "labyrinth/llm/hashed_embedder.hpp"
#include "labyrinth/llm/provider.hpp"

#include <deque>
#include <map>
#include <mutex>

namespace labyrinth::llm {

// Replays fixed turns and records every prompt it receives. Each purpose has
// its own queue; purposes without one draw from the primary script. An
// exhausted queue yields Stop.
class ScriptedProvider final : public LlmProvider {
public:
    explicit ScriptedProvider(std::vector<ModelTurn> script = {}, std::map<std::string, Vector> canned_embeddings = {});

    // {"gm": [...], "npc_gen": [...], ...}; a bare array replaces the primary script.
    void load(const Json& doc);

    void set_script(Purpose purpose, std::vector<ModelTurn> turns);
    void add_embedding(std::string text, Vector vector);
    // The next `count` complete() calls for `purpose` throw a retryable ProviderError.
    void inject_failure(Purpose purpose, int count = 1);

    ModelTurn complete(const PromptPackage& prompt) override;
    std::vector<Vector> embed(const std::vector<std::string>& texts) override;

    std::vector<PromptPackage> prompts() const;
    std::vector<PromptPackage> prompts_for(Purpose purpose) const;
    std::size_t remaining(Purpose purpose) const;

private:
    std::deque<ModelTurn>& queue_for(Purpose purpose);

    mutable std::mutex mutex_;
    std::deque<ModelTurn> primary_;
    std::map<Purpose, std::deque<ModelTurn>> scripts_;
    std::map<Purpose, int> failures_;
    std::map<std::string, Vector> canned_;
    std::vector<PromptPackage> recorded_;
};

}  // namespace labyrinth::llm
