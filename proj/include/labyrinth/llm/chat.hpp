// SPDX-License-Identifier: Apache-2.0
//
// Dialogue records shared by the engine, the prompt builder and providers.
#pragma once

#include "labyrinth/functions/registry.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace labyrinth::llm {

using Json = nlohmann::json;
using functions::FunctionCall;

enum class EventKind { PlayerMessage, GmMessage, FunctionCallMsg, FunctionResultMsg, SummaryMsg, SystemMsg };

std::string_view event_kind_name(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view name);

inline constexpr std::string_view kGmSpeaker = "GM";
inline constexpr std::string_view kSystemSpeaker = "system";

struct ChatEvent {
    EventKind kind = EventKind::SystemMsg;
    std::string speaker;
    std::string content;
    // The invocation on FunctionCallMsg.
    std::optional<FunctionCall> call;
    // On FunctionResultMsg: the call_id of the call it answers.
    std::string call_id;
    std::uint64_t counter = 0;
    int turn = 0;
    bool error = false;
    // On SummaryMsg: first and last counters of the summarized events.
    std::optional<std::pair<std::uint64_t, std::uint64_t>> covers;
    // Structured extras: the state diff and test result of a function result,
    // the diff of a regenerated state swap.
    Json detail;

    bool operator==(const ChatEvent&) const = default;
};

ChatEvent player_message(std::string player, std::string text);
ChatEvent gm_message(std::string text);
ChatEvent function_call_message(FunctionCall call);
ChatEvent function_result_message(const FunctionCall& call, std::string text, bool error, Json detail = {});
ChatEvent summary_message(std::string text, std::uint64_t first, std::uint64_t last);
ChatEvent system_message(std::string text, Json detail = {});

Json to_json(const ChatEvent& event);
ChatEvent event_from_json(const Json& doc);

// What the model produced for one request.
struct TextTurn {
    std::string content;
    // Set when the provider marked the text as the end of its turn.
    bool final = false;

    bool operator==(const TextTurn&) const = default;
};
struct StopTurn {
    bool operator==(const StopTurn&) const = default;
};
using ModelTurn = std::variant<TextTurn, FunctionCall, StopTurn>;

Json to_json(const ModelTurn& turn);
// Accepts {"text": ..., "final"?: bool}, {"call": {"name", "arguments"}} or {"stop": true}.
ModelTurn turn_from_json(const Json& doc);
std::vector<ModelTurn> turns_from_json(const Json& doc);

// ceil(characters / 4), counting UTF-8 code points.
std::size_t estimate_tokens(std::string_view text);
std::size_t estimate_tokens(const ChatEvent& event);

}  // namespace labyrinth::llm
