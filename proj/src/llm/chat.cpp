// SPDX-License-Identifier: Apache-2.0
#include "labyrinth/llm/chat.hpp"

#include "labyrinth/error.hpp"

#include <array>

namespace labyrinth::llm {

namespace {

constexpr std::array<std::pair<EventKind, std::string_view>, 6> kKindNames = {{
    {EventKind::PlayerMessage, "player_message"},
    {EventKind::GmMessage, "gm_message"},
    {EventKind::FunctionCallMsg, "function_call"},
    {EventKind::FunctionResultMsg, "function_result"},
    {EventKind::SummaryMsg, "summary"},
    {EventKind::SystemMsg, "system"},
}};

}  // namespace

std::string_view event_kind_name(EventKind kind) {
    for (const auto& [k, name] : kKindNames) {
        if (k == kind) return name;
    }
    return "system";
}

std::optional<EventKind> parse_event_kind(std::string_view name) {
    for (const auto& [k, n] : kKindNames) {
        if (n == name) return k;
    }
    return std::nullopt;
}

ChatEvent player_message(std::string player, std::string text) {
    ChatEvent e;
    e.kind = EventKind::PlayerMessage;
    e.speaker = std::move(player);
    e.content = std::move(text);
    return e;
}

ChatEvent gm_message(std::string text) {
    ChatEvent e;
    e.kind = EventKind::GmMessage;
    e.speaker = std::string(kGmSpeaker);
    e.content = std::move(text);
    return e;
}

ChatEvent function_call_message(FunctionCall call) {
    ChatEvent e;
    e.kind = EventKind::FunctionCallMsg;
    e.speaker = std::string(kGmSpeaker);
    e.call = std::move(call);
    return e;
}

ChatEvent function_result_message(const FunctionCall& call, std::string text, bool error, Json detail) {
    ChatEvent e;
    e.kind = EventKind::FunctionResultMsg;
    e.speaker = call.name;
    e.content = std::move(text);
    e.call_id = call.call_id;
    e.error = error;
    e.detail = std::move(detail);
    return e;
}

ChatEvent summary_message(std::string text, std::uint64_t first, std::uint64_t last) {
    ChatEvent e;
    e.kind = EventKind::SummaryMsg;
    e.speaker = std::string(kSystemSpeaker);
    e.content = std::move(text);
    e.covers = std::make_pair(first, last);
    return e;
}

ChatEvent system_message(std::string text, Json detail) {
    ChatEvent e;
    e.kind = EventKind::SystemMsg;
    e.speaker = std::string(kSystemSpeaker);
    e.content = std::move(text);
    e.detail = std::move(detail);
    return e;
}

Json to_json(const ChatEvent& event) {
    Json j = {
        {"counter", event.counter},
        {"turn", event.turn},
        {"kind", event_kind_name(event.kind)},
        {"speaker", event.speaker},
        {"content", event.content},
    };
    if (event.call) j["call"] = functions::to_json(*event.call);
    if (!event.call_id.empty()) j["call_id"] = event.call_id;
    if (event.error) j["error"] = true;
    if (event.covers) j["covers"] = {event.covers->first, event.covers->second};
    if (!event.detail.is_null()) j["detail"] = event.detail;
    return j;
}

ChatEvent event_from_json(const Json& doc) {
    if (!doc.is_object()) throw Error("chat event must be an object");
    ChatEvent e;
    const auto kind = parse_event_kind(doc.value("kind", std::string{}));
    if (!kind) throw Error("unknown chat event kind: " + doc.value("kind", std::string{}));
    e.kind = *kind;
    e.speaker = doc.value("speaker", std::string{});
    e.content = doc.value("content", std::string{});
    if (doc.contains("call")) e.call = functions::call_from_json(doc.at("call"));
    e.call_id = doc.value("call_id", std::string{});
    e.counter = doc.value("counter", std::uint64_t{0});
    e.turn = doc.value("turn", 0);
    e.error = doc.value("error", false);
    if (doc.contains("covers")) {
        const auto& c = doc.at("covers");
        e.covers = std::make_pair(c.at(0).get<std::uint64_t>(), c.at(1).get<std::uint64_t>());
    }
    if (doc.contains("detail")) e.detail = doc.at("detail");
    return e;
}

Json to_json(const ModelTurn& turn) {
    if (const auto* t = std::get_if<TextTurn>(&turn)) {
        Json j = {{"text", t->content}};
        if (t->final) j["final"] = true;
        return j;
    }
    if (const auto* c = std::get_if<FunctionCall>(&turn)) return {{"call", functions::to_json(*c)}};
    return {{"stop", true}};
}

ModelTurn turn_from_json(const Json& doc) {
    if (!doc.is_object()) throw Error("model turn must be an object");
    if (doc.contains("text")) {
        const auto& text = doc.at("text");
        return TextTurn{text.is_string() ? text.get<std::string>() : text.dump(), doc.value("final", false)};
    }
    if (doc.contains("call")) return functions::call_from_json(doc.at("call"));
    if (doc.contains("stop")) return StopTurn{};
    throw Error("model turn needs one of text, call or stop: " + doc.dump());
}

std::vector<ModelTurn> turns_from_json(const Json& doc) {
    if (!doc.is_array()) throw Error("script must be an array of turns");
    std::vector<ModelTurn> out;
    out.reserve(doc.size());
    for (const auto& t : doc) out.push_back(turn_from_json(t));
    return out;
}

std::size_t estimate_tokens(std::string_view text) {
    std::size_t chars = 0;
    for (unsigned char c : text) chars += (c & 0xC0) != 0x80;
    return (chars + 3) / 4;
}

std::size_t estimate_tokens(const ChatEvent& event) {
    std::size_t n = estimate_tokens(event.speaker) + estimate_tokens(event.content);
    if (event.call) n += estimate_tokens(event.call->name) + estimate_tokens(event.call->arguments.dump());
    return n;
}

}  // namespace labyrinth::llm
