// SPDX-License-Identifier: Apache-2.0
//
// The game-master toolbox: one dice-roll function and thirteen state
// functions, the per-profile subset exposed to the model, and dispatch.
#pragma once

#include "labyrinth/functions/dice.hpp"
#include "labyrinth/profile.hpp"
#include "labyrinth/state/game_state.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace labyrinth::functions {

using Json = nlohmann::json;

enum class Category { DiceRoll, State };
enum class ParamType { String, Integer, Boolean };

struct ParamSpec {
    std::string name;
    ParamType type = ParamType::String;
    bool required = true;
    std::string description;
};

struct FunctionSpec {
    std::string name;
    std::string description;
    std::vector<ParamSpec> parameters;
    Category category = Category::State;

    const ParamSpec* param(std::string_view name) const;
};

struct FunctionCall {
    std::string name;
    Json arguments = Json::object();
    std::string call_id;

    bool operator==(const FunctionCall&) const = default;
};

Json to_json(const FunctionCall& call);
FunctionCall call_from_json(const Json& doc);

// All fourteen functions, activate_test first.
const std::vector<FunctionSpec>& all_functions();
const FunctionSpec* find_function(std::string_view name);

std::vector<FunctionSpec> active_registry(const GmSettingProfile& profile);
bool is_active(const GmSettingProfile& profile, std::string_view function_name);

// Empty when the call matches its FunctionSpec; otherwise a message for the model.
std::optional<std::string> check_arguments(const FunctionCall& call, const FunctionSpec& spec);

using TableSampler = std::function<std::vector<std::size_t>(std::size_t population, std::size_t count,
                                                            RandomSource& rng)>;
// Produces the full NpcSpec for create_npc; nullopt when it cannot.
using NpcGenerator = std::function<std::optional<state::NpcSpec>(
    std::string_view name, std::string_view context, const state::SceneState& scene)>;

struct DispatchContext {
    RandomSource& rng;
    TableSampler table_sampler = sample_without_replacement;
    NpcGenerator npc_generator;
};

struct DispatchResult {
    bool ok = false;
    std::string message;
    state::StateDiff diff;
    std::optional<TestResult> test;
};

// Runs one call against the current states. Lookup and argument failures come
// back as ok=false with an empty diff, so the narration can continue.
DispatchResult dispatch(const FunctionCall& call, const state::SceneState& scene,
                        std::span<const state::PlayerState> players, DispatchContext& ctx);

}  // namespace labyrinth::functions
