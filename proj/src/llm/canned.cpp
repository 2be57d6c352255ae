// SPDX-License-Identifier: Apache-2.0
#include "labyrinth/llm/canned.hpp"

#include <algorithm>
#include <array>

namespace labyrinth::llm {

namespace {

std::uint64_t mix(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

bool offers(const PromptPackage& prompt, std::string_view tool) {
    return std::any_of(prompt.tool_specs.begin(), prompt.tool_specs.end(),
                       [&](const auto& s) { return s.name == tool; });
}

std::string first_words(const std::string& text, std::size_t n) {
    const auto words = tokenize(text);
    std::string out;
    for (std::size_t i = 0; i < words.size() && i < n; ++i) out += (i ? " " : "") + words[i];
    return out;
}

constexpr std::array<std::string_view, 4> kOpeners = {
    "The walls of the labyrinth seem to lean closer as",
    "A hush falls over the passage while",
    "Somewhere a bell chimes twice as",
    "Lantern light flickers across the stones as",
};

constexpr std::array<std::string_view, 6> kActions = {
    "I look around for anything unusual.",
    "I ask the nearest stranger which way leads to the center.",
    "I check my pack and keep moving forward.",
    "I try to climb onto the wall to get a better view.",
    "I listen carefully for footsteps.",
    "I search the ground for tracks.",
};

}  // namespace

ModelTurn CannedGmProvider::gm_turn(const PromptPackage& prompt) const {
    const auto& msgs = prompt.messages;
    auto last_player = std::find_if(msgs.rbegin(), msgs.rend(),
                                    [](const ChatEvent& e) { return e.kind == EventKind::PlayerMessage; });
    if (last_player == msgs.rend()) {
        return TextTurn{"The scene opens before you. What do you do?", true};
    }
    const ChatEvent& player = *last_player;
    const ChatEvent* last_result = nullptr;
    int calls = 0;
    for (auto it = last_player.base(); it != msgs.end(); ++it) {
        if (it->kind == EventKind::FunctionCallMsg) ++calls;
        if (it->kind == EventKind::FunctionResultMsg) last_result = &*it;
    }
    const std::uint64_t h = mix(player.speaker + "\n" + player.content);
    const std::string id = "canned-" + std::to_string(player.counter);
    if (calls == 0) {
        if (offers(prompt, "activate_test")) {
            Json args = {{"player", player.speaker}, {"difficulty", static_cast<int>(2 + h % 4)}};
            return FunctionCall{"activate_test", std::move(args), id};
        }
        if (offers(prompt, "add_object")) {
            const std::string subject = first_words(player.content, 3);
            Json args = {{"name", "Clue " + std::to_string(player.counter)},
                         {"description", "Something noticed while " + player.speaker + " acted: " + subject + "."}};
            return FunctionCall{"add_object", std::move(args), id};
        }
    }
    std::string text = std::string(kOpeners[h % kOpeners.size()]) + " " + player.speaker + " acts.";
    if (last_result) text += " " + last_result->content;
    text += " What do you do next?";
    return TextTurn{std::move(text), true};
}

ModelTurn CannedGmProvider::complete(const PromptPackage& prompt) {
    const Json& ctx = prompt.context;
    switch (prompt.purpose) {
        case Purpose::Gm: return gm_turn(prompt);
        case Purpose::Judge: {
            const bool done = ctx.value("turns_completed", 0) >= success_after_;
            Json verdict = {{"outcome", done ? "success" : "continue"},
                            {"advance_clock", !done && ctx.value("failed_tests", 0) > 0}};
            return TextTurn{verdict.dump(), true};
        }
        case Purpose::Summarize: {
            std::string out;
            for (const auto& e : prompt.messages) {
                if (e.content.empty()) continue;
                if (!out.empty()) out += "; ";
                out += e.speaker + ": " + first_words(e.content, 6);
            }
            return TextTurn{out.empty() ? "Nothing has happened yet." : out, true};
        }
        case Purpose::NpcGen: {
            const std::string name = ctx.value("name", std::string("Stranger"));
            const std::string context = ctx.value("context", std::string("a wandering figure"));
            Json npc = {{"kin", "Goblin"},
                        {"persona", name + ", " + context + "."},
                        {"goal", "Find out what the party wants."},
                        {"trait", "Curious"},
                        {"flaw", "Easily distracted"}};
            return TextTurn{npc.dump(), true};
        }
        case Purpose::StateRegen:
            if (!ctx.contains("states")) return StopTurn{};
            return TextTurn{ctx["states"].dump(), true};
        case Purpose::Paraphrase:
            return TextTurn{"In other words: " + ctx.value("text", std::string{}), true};
        case Purpose::PlayerAgent: {
            const std::string player = ctx.value("player", std::string{});
            const std::uint64_t i = mix(player) + static_cast<std::uint64_t>(ctx.value("turn", 0));
            return TextTurn{std::string(kActions[i % kActions.size()]), true};
        }
        case Purpose::SceneInitClassify:
        case Purpose::SceneInitCount:
        case Purpose::SceneInitGenerate: break;
    }
    return StopTurn{};
}

}  // namespace labyrinth::llm
