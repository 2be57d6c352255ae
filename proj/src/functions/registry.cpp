// SPDX-License-Identifier: Apache-2.0
#include "labyrinth/functions/registry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace labyrinth::functions {

namespace {

using state::NpcSpec;
using state::PlayerState;
using state::SceneState;

ParamSpec str(std::string name, std::string description, bool required = true) {
    return {std::move(name), ParamType::String, required, std::move(description)};
}
ParamSpec integer(std::string name, std::string description, bool required = true) {
    return {std::move(name), ParamType::Integer, required, std::move(description)};
}
ParamSpec boolean(std::string name, std::string description) {
    return {std::move(name), ParamType::Boolean, false, std::move(description)};
}

std::vector<FunctionSpec> build_functions() {
    const ParamSpec player = str("player", "Name of the player character.");
    std::vector<FunctionSpec> f;
    f.push_back({"activate_test",
                 "Roll the dice when a player attempts something that can fail. The game master sets the "
                 "difficulty (1-6); the test succeeds when the kept die is at least the difficulty. Name a "
                 "trait of the player that helps (two dice, keep the higher) or a flaw that hinders (two "
                 "dice, keep the lower).",
                 {player, integer("difficulty", "Difficulty from 1 (trivial) to 6 (nearly impossible)."),
                  str("trait", "A trait of this player that helps with the test.", false),
                  str("flaw", "A flaw of this player that hinders the test.", false)},
                 Category::DiceRoll});
    f.push_back({"activate_action_scene",
                 "Start an action scene: every player resolves one dice action per turn under urgency.", {},
                 Category::State});
    f.push_back({"terminate_action_scene", "End the current action scene.", {}, Category::State});
    f.push_back({"create_npc",
                 "Introduce a new NPC into the scene. Its kin, persona, goal, trait and flaw are generated "
                 "from the given context.",
                 {str("name", "Name of the new NPC."),
                  str("context", "What the NPC is and why it appears, used to generate its details.")},
                 Category::State});
    f.push_back({"add_trait", "Add a new trait to a player's traits.",
                 {player, str("name", "Trait name."), str("description", "What the trait means.")},
                 Category::State});
    f.push_back({"add_flaw", "Add a new flaw to a player's flaws.",
                 {player, str("name", "Flaw name."), str("description", "What the flaw means.")},
                 Category::State});
    f.push_back({"add_item", "Add a new item to a player's inventory.",
                 {player, str("name", "Item name."), str("description", "What the item is.")},
                 Category::State});
    f.push_back({"remove_trait", "Remove a trait from a player's traits.",
                 {player, str("name", "Trait name.")}, Category::State});
    f.push_back({"remove_flaw", "Remove a flaw from a player's flaws.",
                 {player, str("name", "Flaw name.")}, Category::State});
    f.push_back({"remove_item",
                 "Remove an item from a player's inventory; the item is left behind in the environment.",
                 {player, str("name", "Item name.")}, Category::State});
    f.push_back({"use_item",
                 "Let a player use an item from their inventory. Set consumed when the item is used up.",
                 {player, str("item", "Item name."), boolean("consumed", "Remove the item after use.")},
                 Category::State});
    f.push_back({"add_object", "Add a new object to the scene environment.",
                 {str("name", "Object name."), str("description", "What the object is.")}, Category::State});
    f.push_back({"use_environment",
                 "Let a player interact with an object in the environment. Set take when the player keeps "
                 "an obtainable object.",
                 {player, str("object", "Object name."),
                  boolean("take", "Move the object into the player's inventory.")},
                 Category::State});
    f.push_back({"use_random_table",
                 "Sample entries from one of the scene's random tables. The result may introduce new "
                 "context or call for other functions such as create_npc or add_object.",
                 {str("table", "Random table name."), integer("count", "How many entries to sample.", false),
                  boolean("consume_entries", "Remove the sampled entries from the table (default true)."),
                  boolean("consume_table", "Remove the whole table after sampling (default false).")},
                 Category::State});
    return f;
}

bool has_type(const Json& v, ParamType type) {
    switch (type) {
        case ParamType::String: return v.is_string();
        case ParamType::Boolean: return v.is_boolean();
        case ParamType::Integer:
            if (v.is_number_integer()) return true;
            if (v.is_number_float()) {
                double d = v.get<double>();
                return std::isfinite(d) && std::floor(d) == d;
            }
            return false;
    }
    return false;
}

std::string_view type_name(ParamType type) {
    switch (type) {
        case ParamType::String: return "string";
        case ParamType::Integer: return "integer";
        case ParamType::Boolean: return "boolean";
    }
    return "value";
}

std::string in_quotes(std::string_view s) { return "'" + std::string(s) + "'"; }

struct Args {
    const Json& j;
    std::string text(const char* name) const { return j.at(name).get<std::string>(); }
    std::optional<std::string> opt_text(const char* name) const {
        auto it = j.find(name);
        if (it == j.end() || it->get<std::string>().empty()) return std::nullopt;
        return it->get<std::string>();
    }
    long long number(const char* name, long long fallback) const {
        auto it = j.find(name);
        if (it == j.end()) return fallback;
        return it->is_number_float() ? static_cast<long long>(it->get<double>()) : it->get<long long>();
    }
    bool flag(const char* name, bool fallback) const {
        auto it = j.find(name);
        return it == j.end() ? fallback : it->get<bool>();
    }
};

DispatchResult fail(std::string message) {
    DispatchResult r;
    r.ok = false;
    r.message = "Error: " + std::move(message);
    return r;
}

std::string list_entries(const std::vector<std::string>& entries) {
    std::ostringstream out;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (i) out << "; ";
        out << (i + 1) << ") " << entries[i];
    }
    return out.str();
}

}  // namespace

const ParamSpec* FunctionSpec::param(std::string_view param_name) const {
    auto it = std::find_if(parameters.begin(), parameters.end(), [&](const auto& p) { return p.name == param_name; });
    return it == parameters.end() ? nullptr : &*it;
}

Json to_json(const FunctionCall& call) {
    return Json{{"name", call.name}, {"arguments", call.arguments}, {"call_id", call.call_id}};
}

FunctionCall call_from_json(const Json& doc) {
    FunctionCall c;
    c.name = doc.at("name").get<std::string>();
    c.arguments = doc.value("arguments", Json::object());
    c.call_id = doc.value("call_id", std::string());
    return c;
}

const std::vector<FunctionSpec>& all_functions() {
    static const std::vector<FunctionSpec> functions = build_functions();
    return functions;
}

const FunctionSpec* find_function(std::string_view name) {
    const auto& all = all_functions();
    auto it = std::find_if(all.begin(), all.end(), [&](const auto& f) { return f.name == name; });
    return it == all.end() ? nullptr : &*it;
}

std::vector<FunctionSpec> active_registry(const GmSettingProfile& profile) {
    std::vector<FunctionSpec> out;
    for (const auto& f : all_functions()) {
        switch (profile.tools) {
            case ToolSet::All: out.push_back(f); break;
            case ToolSet::DiceOnly:
                if (f.category == Category::DiceRoll) out.push_back(f);
                break;
            case ToolSet::StatesOnly:
                if (f.category == Category::State) out.push_back(f);
                break;
            case ToolSet::None: break;
        }
    }
    return out;
}

bool is_active(const GmSettingProfile& profile, std::string_view function_name) {
    const FunctionSpec* spec = find_function(function_name);
    if (!spec) return false;
    switch (profile.tools) {
        case ToolSet::All: return true;
        case ToolSet::DiceOnly: return spec->category == Category::DiceRoll;
        case ToolSet::StatesOnly: return spec->category == Category::State;
        case ToolSet::None: return false;
    }
    return false;
}

std::optional<std::string> check_arguments(const FunctionCall& call, const FunctionSpec& spec) {
    if (!call.arguments.is_object()) return "arguments of " + spec.name + " must be an object";
    for (const auto& p : spec.parameters) {
        auto it = call.arguments.find(p.name);
        if (it == call.arguments.end() || it->is_null()) {
            if (p.required) return "missing required argument " + in_quotes(p.name) + " for " + spec.name;
            continue;
        }
        if (!has_type(*it, p.type)) {
            return "argument " + in_quotes(p.name) + " of " + spec.name + " must be a " + std::string(type_name(p.type));
        }
    }
    for (const auto& [key, _] : call.arguments.items()) {
        if (!spec.param(key)) return "unknown argument " + in_quotes(key) + " for " + spec.name;
    }
    return std::nullopt;
}

DispatchResult dispatch(const FunctionCall& call, const SceneState& scene, std::span<const PlayerState> players,
                        DispatchContext& ctx) {
    const FunctionSpec* spec = find_function(call.name);
    if (!spec) return fail("unknown function " + in_quotes(call.name) + ".");
    if (auto problem = check_arguments(call, *spec)) return fail(*problem + ".");

    // Nulls count as absent from here on.
    Json cleaned = Json::object();
    for (const auto& [k, v] : call.arguments.items()) {
        if (!v.is_null()) cleaned[k] = v;
    }
    const Args args{cleaned};

    SceneState next_scene = scene;
    std::vector<PlayerState> next_players(players.begin(), players.end());
    PlayerState* player = nullptr;
    if (spec->param("player")) {
        const std::string who = args.text("player");
        player = state::find_player(next_players, who);
        if (!player) return fail("there is no player named " + in_quotes(who) + ".");
    }

    DispatchResult result;
    result.ok = true;
    std::ostringstream msg;
    const std::string& name = call.name;

    if (name == "activate_test") {
        const long long difficulty = args.number("difficulty", 0);
        if (difficulty < kMinDifficulty || difficulty > kMaxDifficulty) {
            return fail("difficulty must be between 1 and 6, got " + std::to_string(difficulty) + ".");
        }
        auto trait = args.opt_text("trait");
        auto flaw = args.opt_text("flaw");
        if (trait && !player->traits.count(*trait)) {
            return fail(player->name + " does not have the trait " + in_quotes(*trait) + ".");
        }
        if (flaw && !player->flaws.count(*flaw)) {
            return fail(player->name + " does not have the flaw " + in_quotes(*flaw) + ".");
        }
        const Modifier modifier = modifier_for(trait.has_value(), flaw.has_value());
        TestResult test = roll_test(static_cast<int>(difficulty), modifier, ctx.rng);
        msg << "Test for " << player->name << " at difficulty " << difficulty;
        if (modifier == Modifier::Advantage) msg << " with advantage from trait " << in_quotes(*trait);
        if (modifier == Modifier::Disadvantage) msg << " with disadvantage from flaw " << in_quotes(*flaw);
        if (trait && flaw) msg << " (trait " << in_quotes(*trait) << " and flaw " << in_quotes(*flaw) << " cancel out)";
        msg << ": rolled ";
        for (std::size_t i = 0; i < test.rolls.size(); ++i) msg << (i ? " and " : "") << test.rolls[i];
        msg << ", kept " << test.kept << ". " << (test.success ? "Success." : "Failure.");
        result.test = test;
        result.message = msg.str();
        return result;  // never touches the states
    } else if (name == "activate_action_scene") {
        if (next_scene.is_action_scene) {
            msg << "The action scene is already active.";
        } else {
            next_scene.is_action_scene = true;
            msg << "The action scene has started. Each player resolves one action per turn.";
        }
    } else if (name == "terminate_action_scene") {
        if (!next_scene.is_action_scene) {
            msg << "There is no active action scene.";
        } else {
            next_scene.is_action_scene = false;
            msg << "The action scene has ended.";
        }
    } else if (name == "create_npc") {
        const std::string npc_name = args.text("name");
        if (npc_name.empty()) return fail("an NPC needs a name.");
        if (next_scene.npcs.count(npc_name)) return fail("an NPC named " + in_quotes(npc_name) + " already exists.");
        if (!ctx.npc_generator) return fail("NPC generation is unavailable.");
        std::optional<NpcSpec> spec_out = ctx.npc_generator(npc_name, args.text("context"), scene);
        if (!spec_out) return fail("could not generate details for " + in_quotes(npc_name) + ".");
        if (auto parsed = state::npc_from_json(state::to_json(*spec_out), "npc"); !parsed) {
            return fail("generated details for " + in_quotes(npc_name) + " is incomplete.");
        }
        next_scene.npcs.emplace(npc_name, *spec_out);
        msg << "New NPC " << in_quotes(npc_name) << " (" << spec_out->kin << ") enters the scene. Persona: "
            << spec_out->persona << " Goal: " << spec_out->goal << " Trait: " << spec_out->trait
            << " Flaw: " << spec_out->flaw;
    } else if (name == "add_trait" || name == "add_flaw" || name == "add_item") {
        auto& target = name == "add_trait" ? player->traits : name == "add_flaw" ? player->flaws : player->inventory;
        const char* what = name == "add_trait" ? "trait" : name == "add_flaw" ? "flaw" : "item";
        const std::string key = args.text("name");
        if (key.empty()) return fail(std::string("the ") + what + " needs a name.");
        if (target.count(key)) return fail(player->name + " already has the " + what + " " + in_quotes(key) + ".");
        target.emplace(key, args.text("description"));
        if (name == "add_item") {
            msg << player->name << " adds " << in_quotes(key) << " to the inventory.";
        } else {
            msg << player->name << " gains the " << what << " " << in_quotes(key) << ".";
        }
    } else if (name == "remove_trait" || name == "remove_flaw") {
        auto& target = name == "remove_trait" ? player->traits : player->flaws;
        const char* what = name == "remove_trait" ? "trait" : "flaw";
        const std::string key = args.text("name");
        if (!target.erase(key)) return fail(player->name + " does not have the " + what + " " + in_quotes(key) + ".");
        msg << player->name << " loses the " << what << " " << in_quotes(key) << ".";
    } else if (name == "remove_item") {
        const std::string key = args.text("name");
        auto it = player->inventory.find(key);
        if (it == player->inventory.end()) return fail(player->name + " does not have " + in_quotes(key) + ".");
        next_scene.environment[key] = it->second;
        player->inventory.erase(it);
        msg << player->name << " leaves " << in_quotes(key) << " behind; it is now part of the environment.";
    } else if (name == "use_item") {
        const std::string key = args.text("item");
        auto it = player->inventory.find(key);
        if (it == player->inventory.end()) {
            return fail(player->name + " does not have " + in_quotes(key) + " in the inventory.");
        }
        msg << player->name << " uses " << in_quotes(key) << ": " << it->second;
        if (args.flag("consumed", false)) {
            player->inventory.erase(it);
            msg << " The item is used up and removed from the inventory.";
        }
    } else if (name == "add_object") {
        const std::string key = args.text("name");
        if (key.empty()) return fail("the object needs a name.");
        if (next_scene.environment.count(key)) return fail("the environment already has " + in_quotes(key) + ".");
        next_scene.environment.emplace(key, args.text("description"));
        msg << in_quotes(key) << " is now part of the environment.";
    } else if (name == "use_environment") {
        const std::string key = args.text("object");
        auto it = next_scene.environment.find(key);
        if (it == next_scene.environment.end()) return fail("there is no object " + in_quotes(key) + " in the environment.");
        msg << player->name << " interacts with " << in_quotes(key) << ": " << it->second;
        if (args.flag("take", false)) {
            if (player->inventory.count(key)) return fail(player->name + " already carries " + in_quotes(key) + ".");
            player->inventory.emplace(key, it->second);
            next_scene.environment.erase(it);
            msg << " " << player->name << " takes it.";
        }
    } else if (name == "use_random_table") {
        const std::string table = args.text("table");
        auto it = next_scene.random_tables.find(table);
        if (it == next_scene.random_tables.end()) return fail("there is no random table " + in_quotes(table) + ".");
        const long long count = args.number("count", 1);
        if (count < 1) return fail("count must be at least 1.");
        const auto picks = ctx.table_sampler(it->second.size(), static_cast<std::size_t>(count), ctx.rng);
        std::vector<std::string> sampled;
        for (std::size_t i : picks) sampled.push_back(it->second.at(i));
        msg << "Sampled from " << in_quotes(table) << ": " << list_entries(sampled) << ".";
        if (args.flag("consume_table", false)) {
            next_scene.random_tables.erase(it);
            msg << " The table is removed.";
        } else if (args.flag("consume_entries", true)) {
            std::vector<std::size_t> sorted = picks;
            std::sort(sorted.rbegin(), sorted.rend());
            sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
            for (std::size_t i : sorted) it->second.erase(it->second.begin() + static_cast<std::ptrdiff_t>(i));
            if (it->second.empty()) {
                next_scene.random_tables.erase(it);
                msg << " The table is exhausted and removed.";
            }
        }
    } else {
        return fail("function " + in_quotes(name) + " has no implementation.");
    }

    result.message = msg.str();
    result.diff = state::diff_states(scene, players, next_scene, next_players);
    return result;
}

}  // namespace labyrinth::functions
