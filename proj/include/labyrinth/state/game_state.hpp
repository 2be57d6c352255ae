// SPDX-License-Identifier: Apache-2.0
//
// Scene and player state records, their document form, the flat text block
// that goes into every prompt, and field-level diffs between two states.
#pragma once

#include "labyrinth/error.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace labyrinth::state {

using Json = nlohmann::json;

struct NpcSpec {
    std::string kin;
    std::string persona;
    std::string goal;
    std::string trait;
    std::string flaw;

    bool operator==(const NpcSpec&) const = default;
};

struct SceneState {
    std::string chapter;
    std::string scene;
    std::vector<std::string> scene_summary;
    std::map<std::string, NpcSpec> npcs;
    std::string success_condition;
    std::string failure_condition;
    std::vector<std::string> game_flow;
    std::map<std::string, std::string> environment;
    std::map<std::string, std::vector<std::string>> random_tables;
    // Stored and rendered, never interpreted by the engine.
    std::string consequences;
    bool is_action_scene = false;

    bool operator==(const SceneState&) const = default;
};

struct PlayerState {
    std::string name;
    std::string kin;
    std::string goal;
    std::map<std::string, std::string> traits;
    std::map<std::string, std::string> flaws;
    std::map<std::string, std::string> inventory;
    std::vector<std::string> additional_notes;

    bool operator==(const PlayerState&) const = default;
};

// Hours spent in the Labyrinth. Reaching the limit ends the scene in failure.
struct GameClock {
    int hours_elapsed = 0;
    int limit = 13;

    bool at_limit() const { return hours_elapsed >= limit; }
    void advance() {
        if (hours_elapsed < limit) ++hours_elapsed;
    }

    bool operator==(const GameClock&) const = default;
};

// Address of one diffable value: a top-level field, optionally narrowed to a
// single key of a map-valued field.
struct FieldPath {
    std::string field;
    std::optional<std::string> key;

    std::string str() const;
    auto operator<=>(const FieldPath&) const = default;
};

// `before` / `after` are absent when the keyed entry does not exist on that side.
struct FieldChange {
    FieldPath path;
    std::optional<Json> before;
    std::optional<Json> after;

    bool operator==(const FieldChange&) const = default;
};

struct StateDiff {
    std::vector<FieldChange> scene_changes;
    std::map<std::string, std::vector<FieldChange>> player_changes;

    bool empty() const;
    std::size_t size() const;
    StateDiff reversed() const;

    bool operator==(const StateDiff&) const = default;
};

// Thrown by diff_states when the two sides do not hold the same players.
class RosterMismatch : public Error {
public:
    using Error::Error;
};

// Thrown by apply_diff when a change's `before` does not match the state.
class DiffConflict : public Error {
public:
    using Error::Error;
};

// Documents.
Json to_json(const NpcSpec& npc);
Json to_json(const SceneState& scene);
Json to_json(const PlayerState& player);
Json to_json(const GameClock& clock);
Json to_json(const FieldChange& change);
Json to_json(const StateDiff& diff);

Checked<NpcSpec> npc_from_json(const Json& doc, const std::string& path = "");
Checked<SceneState> scene_from_json(const Json& doc);
Checked<PlayerState> player_from_json(const Json& doc, const std::string& path = "");
Checked<std::vector<PlayerState>> players_from_json(const Json& doc, const std::string& path = "");
GameClock clock_from_json(const Json& doc);
StateDiff diff_from_json(const Json& doc);

// Parses document text, reporting duplicate object keys (which a plain JSON
// parse would silently collapse) alongside schema errors.
Checked<Json> parse_document(std::string_view text);
Checked<SceneState> parse_scene_state(std::string_view text);
Checked<PlayerState> parse_player_state(std::string_view text);

std::string to_document(const SceneState& scene);
std::string to_document(const PlayerState& player);

ValidationErrors validate(const SceneState& scene);
ValidationErrors validate(const PlayerState& player, const std::string& path = "");

// Flat labeled text block describing the world and the party.
std::string render_scene_block(const SceneState& scene);
std::string render_player_block(const PlayerState& player);
std::string render_state_block(const SceneState& scene, std::span<const PlayerState> players);

std::vector<FieldChange> diff_scene(const SceneState& before, const SceneState& after);
std::vector<FieldChange> diff_player(const PlayerState& before, const PlayerState& after);
StateDiff diff_states(const SceneState& scene_before, std::span<const PlayerState> players_before,
                      const SceneState& scene_after, std::span<const PlayerState> players_after);

void apply_changes(SceneState& scene, std::span<const FieldChange> changes);
void apply_changes(PlayerState& player, std::span<const FieldChange> changes);
void apply_diff(const StateDiff& diff, SceneState& scene, std::vector<PlayerState>& players);

PlayerState* find_player(std::vector<PlayerState>& players, std::string_view name);
const PlayerState* find_player(std::span<const PlayerState> players, std::string_view name);

}  // namespace labyrinth::state
