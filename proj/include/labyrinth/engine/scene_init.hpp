// SPDX-License-Identifier: Apache-2.0
//
// Turning a scene from the game book into a playable scene state, and
// building player characters from the kin catalog.
#pragma once

#include "labyrinth/functions/random.hpp"
#include "labyrinth/llm/provider.hpp"
#include "labyrinth/state/game_state.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace labyrinth::engine {

using llm::Json;

struct RawScene {
    std::string id;
    std::string chapter;
    std::string scene;
    std::string description;
    std::vector<std::string> locations;
    std::vector<std::string> notes;
    std::map<std::string, std::vector<std::string>> random_tables;
    std::string consequences;
    // Remaining book fields, kept as text.
    std::map<std::string, std::string> other;

    bool operator==(const RawScene&) const = default;
};

Checked<RawScene> raw_scene_from_json(const Json& doc);
Json to_json(const RawScene& raw);

enum class TableUsage { Unused, Npcs, Objects, Both };
std::string_view table_usage_name(TableUsage usage);

// How each random table was handled; reported alongside the result.
struct TableDecision {
    std::string table;
    TableUsage usage = TableUsage::Unused;
    std::size_t count = 0;
    std::vector<std::string> drawn;
};

struct InitResult {
    state::SceneState scene;
    std::vector<TableDecision> tables;
    bool repaired = false;
};

// Classifies every table, draws entries from the initialization tables,
// asks the provider for the scene state, then removes those tables. Invalid
// output gets one repair request; a second failure throws ValidationFailure.
InitResult init_scene(const RawScene& raw, const std::vector<std::string>& rules, llm::LlmProvider& provider,
                      functions::RandomSource& rng);

struct KinEntry {
    std::string persona;
    std::map<std::string, std::string> traits;
    std::map<std::string, std::string> flaws;
    std::map<std::string, std::string> items;
};

// Kins with their defaults, plus the traits and flaws a player may pick.
struct Catalog {
    std::map<std::string, KinEntry> kins;
    std::map<std::string, std::string> traits;
    std::map<std::string, std::string> flaws;
};

Checked<Catalog> catalog_from_json(const Json& doc);
Json to_json(const Catalog& catalog);
Catalog load_catalog(const std::string& path);

struct CharacterChoices {
    std::string name;
    std::string kin;
    std::string goal;
    std::string trait;
    std::string flaw;
};

// Kin defaults merged with the chosen trait and flaw. Name and goal are free.
Checked<state::PlayerState> create_character(const CharacterChoices& choices, const Catalog& catalog);

struct PackedScene {
    std::string id;
    state::SceneState scene;
};

// Every *.json scene state in `dir`, keyed by file stem and sorted by id.
std::vector<PackedScene> load_scene_pack(const std::string& dir);
// A JSON list of player states.
std::vector<state::PlayerState> load_party(const std::string& path);

}  // namespace labyrinth::engine
