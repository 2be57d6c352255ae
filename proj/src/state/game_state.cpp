// SPDX-License-Identifier: Apache-2.0
#include "labyrinth/state/game_state.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace labyrinth {

std::string describe(const ValidationErrors& errors) {
    std::ostringstream out;
    out << "validation failed";
    for (const auto& e : errors) {
        out << "; " << (e.path.empty() ? "<document>" : e.path) << ": " << e.message;
    }
    return out.str();
}

}  // namespace labyrinth

namespace labyrinth::state {

namespace {

// Top-level fields in document order, and which of them are keyed maps.
constexpr std::string_view kSceneFields[] = {
    "chapter",     "scene",         "scene_summary", "npcs",         "success_condition",
    "failure_condition", "game_flow", "environment", "random_tables", "consequences",
    "is_action_scene"};
constexpr std::string_view kSceneMaps[] = {"npcs", "environment", "random_tables"};

constexpr std::string_view kPlayerFields[] = {"name",  "kin",       "goal",
                                              "traits", "flaws",    "inventory",
                                              "additional_notes"};
constexpr std::string_view kPlayerMaps[] = {"traits", "flaws", "inventory"};

constexpr std::string_view kNpcFields[] = {"kin", "persona", "goal", "trait", "flaw"};

template <std::size_t N>
bool contains(const std::string_view (&set)[N], std::string_view v) {
    return std::find(std::begin(set), std::end(set), v) != std::end(set);
}

std::string join_path(const std::string& prefix, std::string_view field) {
    if (prefix.empty()) return std::string(field);
    return prefix + "." + std::string(field);
}

class FieldReader {
public:
    FieldReader(const Json& doc, std::string prefix, ValidationErrors& errors)
        : doc_(doc), prefix_(std::move(prefix)), errors_(errors) {}

    const Json* find(std::string_view field, bool required) {
        auto it = doc_.find(std::string(field));
        if (it == doc_.end()) {
            if (required) error(field, "missing required field");
            return nullptr;
        }
        return &*it;
    }

    void text(std::string_view field, std::string& out, bool required = true, bool non_empty = false) {
        const Json* v = find(field, required);
        if (!v) return;
        if (!v->is_string()) return error(field, "expected a string");
        out = v->get<std::string>();
        if (non_empty && out.empty()) error(field, "must not be empty");
    }

    void flag(std::string_view field, bool& out, bool required) {
        const Json* v = find(field, required);
        if (!v) return;
        if (!v->is_boolean()) return error(field, "expected a boolean");
        out = v->get<bool>();
    }

    void text_list(std::string_view field, std::vector<std::string>& out, bool required = true) {
        const Json* v = find(field, required);
        if (!v) return;
        read_list(*v, join_path(prefix_, field), out);
    }

    void text_map(std::string_view field, std::map<std::string, std::string>& out, bool required = true) {
        const Json* v = find(field, required);
        if (!v) return;
        if (!v->is_object()) return error(field, "expected an object");
        for (const auto& [key, value] : v->items()) {
            if (key.empty()) {
                errors_.push_back({join_path(prefix_, field), "empty key"});
                continue;
            }
            if (!value.is_string()) {
                errors_.push_back({join_path(join_path(prefix_, field), key), "expected a string"});
                continue;
            }
            out.emplace(key, value.get<std::string>());
        }
    }

    bool read_list(const Json& v, const std::string& path, std::vector<std::string>& out) {
        if (!v.is_array()) {
            errors_.push_back({path, "expected a list of strings"});
            return false;
        }
        bool good = true;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_string()) {
                errors_.push_back({path + "[" + std::to_string(i) + "]", "expected a string"});
                good = false;
                continue;
            }
            out.push_back(v[i].get<std::string>());
        }
        return good;
    }

    void error(std::string_view field, std::string message) {
        errors_.push_back({join_path(prefix_, field), std::move(message)});
    }

    const std::string& prefix() const { return prefix_; }
    ValidationErrors& errors() { return errors_; }

private:
    const Json& doc_;
    std::string prefix_;
    ValidationErrors& errors_;
};

std::string escape_key(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case ':': out += "\\:"; break;
            default: out += c;
        }
    }
    return out;
}

std::string escape_value(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            default: out += c;
        }
    }
    return out;
}

void render_list(std::ostringstream& out, std::string_view label, const std::vector<std::string>& items,
                 std::string_view indent = "") {
    out << indent << label << ":";
    if (items.empty()) {
        out << " (empty)\n";
        return;
    }
    out << "\n";
    for (const auto& item : items) out << indent << "  - " << escape_value(item) << "\n";
}

void render_map(std::ostringstream& out, std::string_view label, const std::map<std::string, std::string>& items) {
    out << label << ":";
    if (items.empty()) {
        out << " (empty)\n";
        return;
    }
    out << "\n";
    for (const auto& [k, v] : items) out << "  " << escape_key(k) << ": " << escape_value(v) << "\n";
}

std::optional<Json> some(const Json& j) { return std::optional<Json>(std::in_place, j); }

void diff_documents(const Json& before, const Json& after, std::span<const std::string_view> fields,
                    std::span<const std::string_view> keyed, std::vector<FieldChange>& out) {
    for (std::string_view f : fields) {
        const std::string field(f);
        const Json& a = before.at(field);
        const Json& b = after.at(field);
        if (std::find(keyed.begin(), keyed.end(), f) == keyed.end()) {
            if (a != b) out.push_back({{field, std::nullopt}, some(a), some(b)});
            continue;
        }
        // Both sides are objects; keys come out of nlohmann::json sorted.
        auto ia = a.begin();
        auto ib = b.begin();
        while (ia != a.end() || ib != b.end()) {
            if (ib == b.end() || (ia != a.end() && ia.key() < ib.key())) {
                out.push_back({{field, ia.key()}, some(ia.value()), std::nullopt});
                ++ia;
            } else if (ia == a.end() || ib.key() < ia.key()) {
                out.push_back({{field, ib.key()}, std::nullopt, some(ib.value())});
                ++ib;
            } else {
                if (ia.value() != ib.value()) out.push_back({{field, ia.key()}, some(ia.value()), some(ib.value())});
                ++ia;
                ++ib;
            }
        }
    }
}

void apply_to_document(Json& doc, std::span<const FieldChange> changes, std::string_view what) {
    for (const auto& change : changes) {
        const std::string context = std::string(what) + " " + change.path.str();
        if (!doc.contains(change.path.field)) throw DiffConflict("unknown field in " + context);
        Json& field = doc[change.path.field];
        if (!change.path.key) {
            if (!change.before || !change.after) throw DiffConflict("whole-field change needs both sides: " + context);
            if (field != *change.before) throw DiffConflict("stale before-value at " + context);
            field = *change.after;
            continue;
        }
        if (!field.is_object()) throw DiffConflict("keyed change on non-map field: " + context);
        const std::string& key = *change.path.key;
        auto it = field.find(key);
        const bool present = it != field.end();
        if (present != change.before.has_value() || (present && *it != *change.before)) {
            throw DiffConflict("stale before-value at " + context);
        }
        if (change.after) {
            field[key] = *change.after;
        } else {
            field.erase(key);
        }
    }
}

}  // namespace

std::string FieldPath::str() const {
    if (!key) return field;
    return field + "." + *key;
}

bool StateDiff::empty() const {
    if (!scene_changes.empty()) return false;
    return std::all_of(player_changes.begin(), player_changes.end(),
                       [](const auto& kv) { return kv.second.empty(); });
}

std::size_t StateDiff::size() const {
    std::size_t n = scene_changes.size();
    for (const auto& [_, changes] : player_changes) n += changes.size();
    return n;
}

StateDiff StateDiff::reversed() const {
    auto flip = [](std::vector<FieldChange> changes) {
        for (auto& c : changes) std::swap(c.before, c.after);
        return changes;
    };
    StateDiff out;
    out.scene_changes = flip(scene_changes);
    for (const auto& [name, changes] : player_changes) out.player_changes[name] = flip(changes);
    return out;
}

Json to_json(const NpcSpec& npc) {
    return Json{{"kin", npc.kin}, {"persona", npc.persona}, {"goal", npc.goal},
                {"trait", npc.trait}, {"flaw", npc.flaw}};
}

Json to_json(const SceneState& s) {
    Json npcs = Json::object();
    for (const auto& [name, npc] : s.npcs) npcs[name] = to_json(npc);
    Json tables = Json::object();
    for (const auto& [name, entries] : s.random_tables) tables[name] = entries;
    return Json{{"chapter", s.chapter},
                {"scene", s.scene},
                {"scene_summary", s.scene_summary},
                {"npcs", npcs},
                {"success_condition", s.success_condition},
                {"failure_condition", s.failure_condition},
                {"game_flow", s.game_flow},
                {"environment", Json(s.environment.empty() ? Json::object() : Json(s.environment))},
                {"random_tables", tables},
                {"consequences", s.consequences},
                {"is_action_scene", s.is_action_scene}};
}

Json to_json(const PlayerState& p) {
    auto obj = [](const std::map<std::string, std::string>& m) { return m.empty() ? Json::object() : Json(m); };
    return Json{{"name", p.name},
                {"kin", p.kin},
                {"goal", p.goal},
                {"traits", obj(p.traits)},
                {"flaws", obj(p.flaws)},
                {"inventory", obj(p.inventory)},
                {"additional_notes", Json(p.additional_notes.empty() ? Json::array() : Json(p.additional_notes))}};
}

Json to_json(const GameClock& clock) {
    return Json{{"hours_elapsed", clock.hours_elapsed}, {"limit", clock.limit}};
}

Json to_json(const FieldChange& change) {
    Json out{{"field", change.path.field}};
    if (change.path.key) out["key"] = *change.path.key;
    if (change.before) out["before"] = *change.before;
    if (change.after) out["after"] = *change.after;
    return out;
}

Json to_json(const StateDiff& diff) {
    Json scene = Json::array();
    for (const auto& c : diff.scene_changes) scene.push_back(to_json(c));
    Json players = Json::object();
    for (const auto& [name, changes] : diff.player_changes) {
        Json list = Json::array();
        for (const auto& c : changes) list.push_back(to_json(c));
        players[name] = list;
    }
    return Json{{"scene", scene}, {"players", players}};
}

StateDiff diff_from_json(const Json& doc) {
    auto change = [](const Json& j) {
        FieldChange c;
        c.path.field = j.at("field").get<std::string>();
        if (j.contains("key")) c.path.key = j.at("key").get<std::string>();
        if (j.contains("before")) c.before = some(j.at("before"));
        if (j.contains("after")) c.after = some(j.at("after"));
        return c;
    };
    StateDiff diff;
    const Json scene = doc.value("scene", Json::array());
    const Json players = doc.value("players", Json::object());
    for (const auto& c : scene) diff.scene_changes.push_back(change(c));
    for (const auto& [name, list] : players.items()) {
        auto& out = diff.player_changes[name];
        for (const auto& c : list) out.push_back(change(c));
    }
    return diff;
}

Checked<NpcSpec> npc_from_json(const Json& doc, const std::string& path) {
    ValidationErrors errors;
    if (!doc.is_object()) return ValidationErrors{{path, "expected an object"}};
    NpcSpec npc;
    FieldReader r(doc, path, errors);
    r.text("kin", npc.kin, true, true);
    r.text("persona", npc.persona, true, true);
    r.text("goal", npc.goal, true, true);
    r.text("trait", npc.trait, true, true);
    r.text("flaw", npc.flaw, true, true);
    for (const auto& [key, _] : doc.items()) {
        if (!contains(kNpcFields, key)) errors.push_back({join_path(path, key), "unknown field"});
    }
    if (!errors.empty()) return errors;
    return npc;
}

Checked<SceneState> scene_from_json(const Json& doc) {
    if (!doc.is_object()) return ValidationErrors{{"", "scene document must be an object"}};
    ValidationErrors errors;
    SceneState s;
    FieldReader r(doc, "", errors);
    r.text("chapter", s.chapter);
    r.text("scene", s.scene);
    r.text_list("scene_summary", s.scene_summary);
    if (const Json* npcs = r.find("npcs", true)) {
        if (!npcs->is_object()) {
            r.error("npcs", "expected an object");
        } else {
            for (const auto& [name, spec] : npcs->items()) {
                auto parsed = npc_from_json(spec, "npcs." + name);
                if (!parsed) {
                    errors.insert(errors.end(), parsed.errors().begin(), parsed.errors().end());
                } else {
                    s.npcs.emplace(name, parsed.value());
                }
            }
        }
    }
    r.text("success_condition", s.success_condition);
    r.text("failure_condition", s.failure_condition);
    r.text_list("game_flow", s.game_flow);
    r.text_map("environment", s.environment);
    if (const Json* tables = r.find("random_tables", true)) {
        if (!tables->is_object()) {
            r.error("random_tables", "expected an object");
        } else {
            for (const auto& [name, entries] : tables->items()) {
                std::vector<std::string> list;
                const std::string path = "random_tables." + name;
                if (!r.read_list(entries, path, list)) continue;
                if (list.empty()) {
                    errors.push_back({path, "random table must not be empty"});
                    continue;
                }
                s.random_tables.emplace(name, std::move(list));
            }
        }
    }
    r.text("consequences", s.consequences, false);
    r.flag("is_action_scene", s.is_action_scene, false);
    for (const auto& [key, _] : doc.items()) {
        if (!contains(kSceneFields, key)) errors.push_back({key, "unknown field"});
    }
    if (!errors.empty()) return errors;
    return s;
}

Checked<PlayerState> player_from_json(const Json& doc, const std::string& path) {
    if (!doc.is_object()) return ValidationErrors{{path, "player document must be an object"}};
    ValidationErrors errors;
    PlayerState p;
    FieldReader r(doc, path, errors);
    r.text("name", p.name, true, true);
    r.text("kin", p.kin);
    r.text("goal", p.goal);
    r.text_map("traits", p.traits);
    r.text_map("flaws", p.flaws);
    r.text_map("inventory", p.inventory);
    r.text_list("additional_notes", p.additional_notes, false);
    for (const auto& [key, _] : doc.items()) {
        if (!contains(kPlayerFields, key)) errors.push_back({join_path(path, key), "unknown field"});
    }
    if (!errors.empty()) return errors;
    return p;
}

Checked<std::vector<PlayerState>> players_from_json(const Json& doc, const std::string& path) {
    if (!doc.is_array()) return ValidationErrors{{path, "expected a list of players"}};
    ValidationErrors errors;
    std::vector<PlayerState> players;
    std::set<std::string> names;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const std::string item_path = path + "[" + std::to_string(i) + "]";
        auto parsed = player_from_json(doc[i], item_path);
        if (!parsed) {
            errors.insert(errors.end(), parsed.errors().begin(), parsed.errors().end());
            continue;
        }
        if (!names.insert(parsed.value().name).second) {
            errors.push_back({item_path + ".name", "duplicate player name '" + parsed.value().name + "'"});
            continue;
        }
        players.push_back(parsed.value());
    }
    if (!errors.empty()) return errors;
    return players;
}

GameClock clock_from_json(const Json& doc) {
    GameClock c;
    c.hours_elapsed = doc.value("hours_elapsed", 0);
    c.limit = doc.value("limit", 13);
    if (c.limit < 0 || c.hours_elapsed < 0 || c.hours_elapsed > c.limit) {
        throw ValidationFailure(ValidationErrors{{"clock", "hours_elapsed must lie in [0, limit]"}});
    }
    return c;
}

Checked<Json> parse_document(std::string_view text) {
    struct Frame {
        bool is_object = false;
        std::set<std::string> keys;
        std::string key;
        long index = -1;
    };
    std::vector<Frame> stack;
    ValidationErrors errors;

    auto current_path = [&stack] {
        std::string out;
        for (const auto& f : stack) {
            if (f.is_object) {
                if (!out.empty()) out += ".";
                out += f.key;
            } else {
                out += "[" + std::to_string(f.index) + "]";
            }
        }
        return out;
    };
    auto next_element = [&stack] {
        if (!stack.empty() && !stack.back().is_object) ++stack.back().index;
    };

    Json::parser_callback_t callback = [&](int, Json::parse_event_t event, Json& parsed) {
        switch (event) {
            case Json::parse_event_t::object_start:
                next_element();
                stack.push_back({true, {}, {}, -1});
                break;
            case Json::parse_event_t::array_start:
                next_element();
                stack.push_back({false, {}, {}, -1});
                break;
            case Json::parse_event_t::key: {
                auto& top = stack.back();
                top.key = parsed.get<std::string>();
                if (!top.keys.insert(top.key).second) {
                    errors.push_back({current_path(), "duplicate key '" + top.key + "'"});
                }
                break;
            }
            case Json::parse_event_t::value:
                next_element();
                break;
            case Json::parse_event_t::object_end:
            case Json::parse_event_t::array_end:
                stack.pop_back();
                break;
        }
        return true;
    };

    Json doc;
    try {
        doc = Json::parse(text.begin(), text.end(), callback);
    } catch (const Json::parse_error& e) {
        return ValidationErrors{{"", std::string("malformed document: ") + e.what()}};
    }
    if (!errors.empty()) return errors;
    return doc;
}

Checked<SceneState> parse_scene_state(std::string_view text) {
    auto doc = parse_document(text);
    if (!doc) return doc.errors();
    return scene_from_json(doc.value());
}

Checked<PlayerState> parse_player_state(std::string_view text) {
    auto doc = parse_document(text);
    if (!doc) return doc.errors();
    return player_from_json(doc.value());
}

std::string to_document(const SceneState& scene) { return to_json(scene).dump(2) + "\n"; }
std::string to_document(const PlayerState& player) { return to_json(player).dump(2) + "\n"; }

ValidationErrors validate(const SceneState& scene) {
    auto round_trip = scene_from_json(to_json(scene));
    return round_trip.errors();
}

ValidationErrors validate(const PlayerState& player, const std::string& path) {
    return player_from_json(to_json(player), path).errors();
}

std::string render_scene_block(const SceneState& s) {
    std::ostringstream out;
    out << "[SCENE STATE]\n";
    out << "chapter: " << escape_value(s.chapter) << "\n";
    out << "scene: " << escape_value(s.scene) << "\n";
    render_list(out, "scene_summary", s.scene_summary);
    out << "npcs:";
    if (s.npcs.empty()) out << " (empty)";
    out << "\n";
    for (const auto& [name, npc] : s.npcs) {
        out << "  " << escape_key(name) << ":\n";
        out << "    kin: " << escape_value(npc.kin) << "\n";
        out << "    persona: " << escape_value(npc.persona) << "\n";
        out << "    goal: " << escape_value(npc.goal) << "\n";
        out << "    trait: " << escape_value(npc.trait) << "\n";
        out << "    flaw: " << escape_value(npc.flaw) << "\n";
    }
    out << "success_condition: " << escape_value(s.success_condition) << "\n";
    out << "failure_condition: " << escape_value(s.failure_condition) << "\n";
    render_list(out, "game_flow", s.game_flow);
    render_map(out, "environment", s.environment);
    out << "random_tables:";
    if (s.random_tables.empty()) out << " (empty)";
    out << "\n";
    for (const auto& [name, entries] : s.random_tables) {
        render_list(out, escape_key(name), entries, "  ");
    }
    out << "consequences: " << escape_value(s.consequences) << "\n";
    out << "is_action_scene: " << (s.is_action_scene ? "true" : "false") << "\n";
    return out.str();
}

std::string render_player_block(const PlayerState& p) {
    std::ostringstream out;
    out << "[PLAYER STATE: " << escape_key(p.name) << "]\n";
    out << "name: " << escape_value(p.name) << "\n";
    out << "kin: " << escape_value(p.kin) << "\n";
    out << "goal: " << escape_value(p.goal) << "\n";
    render_map(out, "traits", p.traits);
    render_map(out, "flaws", p.flaws);
    render_map(out, "inventory", p.inventory);
    render_list(out, "additional_notes", p.additional_notes);
    return out.str();
}

std::string render_state_block(const SceneState& scene, std::span<const PlayerState> players) {
    std::string out = render_scene_block(scene);
    for (const auto& p : players) out += render_player_block(p);
    return out;
}

std::vector<FieldChange> diff_scene(const SceneState& before, const SceneState& after) {
    std::vector<FieldChange> out;
    diff_documents(to_json(before), to_json(after), kSceneFields, kSceneMaps, out);
    return out;
}

std::vector<FieldChange> diff_player(const PlayerState& before, const PlayerState& after) {
    std::vector<FieldChange> out;
    diff_documents(to_json(before), to_json(after), kPlayerFields, kPlayerMaps, out);
    return out;
}

StateDiff diff_states(const SceneState& scene_before, std::span<const PlayerState> players_before,
                      const SceneState& scene_after, std::span<const PlayerState> players_after) {
    std::map<std::string, const PlayerState*> after_by_name;
    for (const auto& p : players_after) {
        if (!after_by_name.emplace(p.name, &p).second) throw RosterMismatch("duplicate player '" + p.name + "'");
    }
    if (players_before.size() != players_after.size()) throw RosterMismatch("player rosters differ in size");

    StateDiff diff;
    diff.scene_changes = diff_scene(scene_before, scene_after);
    std::set<std::string> seen;
    for (const auto& p : players_before) {
        if (!seen.insert(p.name).second) throw RosterMismatch("duplicate player '" + p.name + "'");
        auto it = after_by_name.find(p.name);
        if (it == after_by_name.end()) throw RosterMismatch("player '" + p.name + "' missing after");
        auto changes = diff_player(p, *it->second);
        if (!changes.empty()) diff.player_changes.emplace(p.name, std::move(changes));
    }
    return diff;
}

void apply_changes(SceneState& scene, std::span<const FieldChange> changes) {
    if (changes.empty()) return;
    Json doc = to_json(scene);
    apply_to_document(doc, changes, "scene");
    auto parsed = scene_from_json(doc);
    if (!parsed) throw DiffConflict("diff produces an invalid scene: " + describe(parsed.errors()));
    scene = std::move(parsed).value();
}

void apply_changes(PlayerState& player, std::span<const FieldChange> changes) {
    if (changes.empty()) return;
    Json doc = to_json(player);
    apply_to_document(doc, changes, "player " + player.name);
    auto parsed = player_from_json(doc);
    if (!parsed) throw DiffConflict("diff produces an invalid player: " + describe(parsed.errors()));
    player = std::move(parsed).value();
}

void apply_diff(const StateDiff& diff, SceneState& scene, std::vector<PlayerState>& players) {
    // Stage everything first so a conflict leaves the inputs untouched.
    SceneState next_scene = scene;
    std::vector<PlayerState> next_players = players;
    apply_changes(next_scene, diff.scene_changes);
    for (const auto& [name, changes] : diff.player_changes) {
        PlayerState* p = find_player(next_players, name);
        if (!p) throw DiffConflict("diff names unknown player '" + name + "'");
        apply_changes(*p, changes);
    }
    scene = std::move(next_scene);
    players = std::move(next_players);
}

PlayerState* find_player(std::vector<PlayerState>& players, std::string_view name) {
    auto it = std::find_if(players.begin(), players.end(), [&](const auto& p) { return p.name == name; });
    return it == players.end() ? nullptr : &*it;
}

const PlayerState* find_player(std::span<const PlayerState> players, std::string_view name) {
    auto it = std::find_if(players.begin(), players.end(), [&](const auto& p) { return p.name == name; });
    return it == players.end() ? nullptr : &*it;
}

}  // namespace labyrinth::state
