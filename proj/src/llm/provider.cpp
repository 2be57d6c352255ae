// SPDX-License-Identifier: Apache-2.0
#include "labyrinth/llm/provider.hpp"

#include "labyrinth/llm/wire.hpp"

#include <array>

namespace labyrinth::llm {

namespace {

constexpr std::array<std::pair<Purpose, std::string_view>, 10> kPurposeNames = {{
    {Purpose::Gm, "gm"},
    {Purpose::Summarize, "summarize"},
    {Purpose::Judge, "judge"},
    {Purpose::SceneInitClassify, "scene_init_classify"},
    {Purpose::SceneInitCount, "scene_init_count"},
    {Purpose::SceneInitGenerate, "scene_init_generate"},
    {Purpose::NpcGen, "npc_gen"},
    {Purpose::StateRegen, "state_regen"},
    {Purpose::Paraphrase, "paraphrase"},
    {Purpose::PlayerAgent, "player_agent"},
}};

}  // namespace

std::string_view purpose_name(Purpose purpose) {
    for (const auto& [p, name] : kPurposeNames) {
        if (p == purpose) return name;
    }
    return "gm";
}

std::optional<Purpose> parse_purpose(std::string_view name) {
    for (const auto& [p, n] : kPurposeNames) {
        if (n == name) return p;
    }
    return std::nullopt;
}

std::string render_system_text(const PromptPackage& prompt) {
    std::string out = prompt.system_instruction;
    if (!prompt.rules.empty()) {
        out += "\n\n[GAME RULES]";
        for (const auto& r : prompt.rules) out += "\n- " + r;
    }
    if (prompt.state_block) out += "\n\n" + *prompt.state_block;
    return out;
}

std::size_t estimate_tokens(const functions::FunctionSpec& spec) { return estimate_tokens(wire::tool(spec).dump()); }

}  // namespace labyrinth::llm
