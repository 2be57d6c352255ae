// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "labyrinth/error.hpp"
#include "labyrinth/llm/chat.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace labyrinth::llm {

using Vector = std::vector<double>;

// Why a prompt is sent. Scripted providers keep one script per purpose.
enum class Purpose {
    Gm,
    Summarize,
    Judge,
    SceneInitClassify,
    SceneInitCount,
    SceneInitGenerate,
    NpcGen,
    StateRegen,
    Paraphrase,
    PlayerAgent,
};

std::string_view purpose_name(Purpose purpose);  // "gm", "npc_gen", ...
std::optional<Purpose> parse_purpose(std::string_view name);

struct PromptPackage {
    Purpose purpose = Purpose::Gm;
    std::string system_instruction;
    std::vector<std::string> rules;
    std::optional<std::string> state_block;
    std::vector<functions::FunctionSpec> tool_specs;
    std::vector<ChatEvent> messages;
    std::size_t token_estimate = 0;
    // Structured inputs for offline providers; never sent over the wire.
    Json context;
};

// Text placed in the system role: instruction, rules, then the state block.
std::string render_system_text(const PromptPackage& prompt);
std::size_t estimate_tokens(const functions::FunctionSpec& spec);

class ProviderError : public Error {
public:
    explicit ProviderError(const std::string& message, std::string raw_payload = {}, bool retryable = false)
        : Error(message), raw_payload_(std::move(raw_payload)), retryable_(retryable) {}

    const std::string& raw_payload() const { return raw_payload_; }
    bool retryable() const { return retryable_; }

private:
    std::string raw_payload_;
    bool retryable_;
};

class Embedder {
public:
    virtual ~Embedder() = default;
    // One vector per text, all of the same dimension. Throws on an empty list.
    virtual std::vector<Vector> embed(const std::vector<std::string>& texts) = 0;
};

class LlmProvider : public Embedder {
public:
    virtual ModelTurn complete(const PromptPackage& prompt) = 0;
    // Exact count when the provider can supply one.
    virtual std::optional<std::size_t> count_tokens(const PromptPackage&) { return std::nullopt; }
};

}  // namespace labyrinth::llm
