// SPDX-License-Identifier: Apache-2.0
//
// Prompt assembly under a token budget, plus chat-history summarization.
#pragma once

#include "labyrinth/llm/provider.hpp"

#include <optional>
#include <span>

namespace labyrinth::prompt {

using llm::ChatEvent;
using llm::Json;

enum class ConcatMode { Simple, Retrieval };
enum class SummarizationMode { Off, Periodic, Always };
enum class RuleInjection { Full, TopK };

struct PromptConfig {
    ConcatMode concat_mode = ConcatMode::Simple;
    std::size_t retrieval_k = 8;
    // Caps the number of history messages kept (pinned current-turn events excluded).
    std::optional<std::size_t> max_messages;
    SummarizationMode summarization = SummarizationMode::Off;
    int summary_period = 3;
    bool keep_raw_after_summary = true;
    RuleInjection rule_injection = RuleInjection::TopK;
    std::size_t rule_k = 5;
    // Player messages used as retrieval queries: 0 means those of the current turn.
    std::size_t rule_query_window = 0;
    std::size_t context_budget = 8000;

    ValidationErrors validate() const;
    bool operator==(const PromptConfig&) const = default;
};

Json to_json(const PromptConfig& config);
// Missing keys keep their defaults; unknown keys and bad values are errors.
Checked<PromptConfig> prompt_config_from_json(const Json& doc);

class BudgetTooSmall : public Error {
public:
    BudgetTooSmall(std::size_t mandatory, std::size_t budget);
};

struct BuildInputs {
    llm::Purpose purpose = llm::Purpose::Gm;
    std::string system_instruction;
    std::vector<std::string> rules;
    std::optional<std::string> state_block;
    std::vector<functions::FunctionSpec> tools;
    // Working history; events from pinned_from on belong to the current turn
    // and are always included.
    std::span<const ChatEvent> history;
    std::size_t pinned_from = 0;
    // Retrieval-mode queries; defaults to the pinned player messages, else the
    // latest player message in the history.
    std::vector<std::string> queries;
    // Always-mode summary of everything before the pinned events.
    std::optional<ChatEvent> ephemeral_summary;
};

// Keeps mandatory parts (instruction, rules, state block, tools, pinned
// events) and as much history as fits. Old messages go first, then old
// summaries. A function call and its result are kept or dropped together.
// Retrieval mode needs an embedder.
llm::PromptPackage build_prompt(const BuildInputs& inputs, const PromptConfig& config,
                                llm::Embedder* embedder = nullptr);

// Text used to embed an event for retrieval.
std::string event_text(const ChatEvent& event);

// Index ranges [first, last] of history that must stay together.
std::vector<std::pair<std::size_t, std::size_t>> atomic_units(std::span<const ChatEvent> events);

struct SummaryUpdate {
    ChatEvent summary;
    std::vector<ChatEvent> history;
};

// Periodic mode: once `summary_period` player turns have completed since the
// last summary, asks the provider to summarize them. The summary is appended
// to the history (replacing the summarized events unless keep_raw is set) and
// receives `counter`. Returns nullopt when not due, when the mode is not
// Periodic, or when the provider fails.
std::optional<SummaryUpdate> maybe_summarize(std::span<const ChatEvent> history, const PromptConfig& config,
                                             llm::LlmProvider& provider, std::uint64_t counter);

// One summary of `events` for Always mode; nullopt on failure or empty input.
std::optional<ChatEvent> summarize_events(std::span<const ChatEvent> events, llm::LlmProvider& provider);

}  // namespace labyrinth::prompt
