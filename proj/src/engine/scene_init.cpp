// SPDX-License-Identifier: Apache-2.0
#include "labyrinth/engine/scene_init.hpp"

#include "labyrinth/engine/instructions.hpp"
#include "labyrinth/engine/reply.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace labyrinth::engine {

namespace {

bool read_text(const Json& doc, const std::string& key, std::string& out, ValidationErrors& errors, bool required) {
    const auto it = doc.find(key);
    if (it == doc.end()) {
        if (required) errors.push_back({key, "missing field"});
        return false;
    }
    if (!it->is_string()) {
        errors.push_back({key, "expected text"});
        return false;
    }
    out = it->get<std::string>();
    return true;
}

void read_list(const Json& doc, const std::string& key, std::vector<std::string>& out, ValidationErrors& errors) {
    const auto it = doc.find(key);
    if (it == doc.end()) return;
    if (it->is_string()) {
        out.push_back(it->get<std::string>());
        return;
    }
    if (!it->is_array()) {
        errors.push_back({key, "expected a list of texts"});
        return;
    }
    for (std::size_t i = 0; i < it->size(); ++i) {
        if (!(*it)[i].is_string()) {
            errors.push_back({key + "[" + std::to_string(i) + "]", "expected text"});
        } else {
            out.push_back((*it)[i].get<std::string>());
        }
    }
}

void read_map(const Json& doc, const std::string& key, std::map<std::string, std::string>& out,
              ValidationErrors& errors, const std::string& prefix = "") {
    const auto it = doc.find(key);
    if (it == doc.end()) return;
    if (!it->is_object()) {
        errors.push_back({prefix + key, "expected an object of texts"});
        return;
    }
    for (const auto& [name, value] : it->items()) {
        if (!value.is_string()) {
            errors.push_back({prefix + key + "." + name, "expected text"});
        } else {
            out.emplace(name, value.get<std::string>());
        }
    }
}

std::string render_raw(const RawScene& raw) {
    std::ostringstream out;
    out << "[SCENE]\n" << raw.chapter << " / " << raw.scene << "\n[DESCRIPTION]\n" << raw.description << "\n";
    if (!raw.locations.empty()) {
        out << "[LOCATIONS]\n";
        for (const auto& l : raw.locations) out << "- " << l << "\n";
    }
    if (!raw.notes.empty()) {
        out << "[NOTES]\n";
        for (const auto& n : raw.notes) out << "- " << n << "\n";
    }
    for (const auto& [k, v] : raw.other) out << "[" << k << "]\n" << v << "\n";
    return out.str();
}

std::string render_table(const std::string& name, const std::vector<std::string>& entries) {
    std::string out = "Table: " + name + "\nEntries:";
    for (const auto& e : entries) out += "\n- " + e;
    return out;
}

llm::PromptPackage request(llm::Purpose purpose, const std::string& instruction, const std::vector<std::string>& rules,
                           const std::string& block, const std::string& message, Json context) {
    llm::PromptPackage p;
    p.purpose = purpose;
    p.system_instruction = instruction;
    p.rules = rules;
    p.state_block = block;
    p.messages.push_back(llm::system_message(message));
    p.token_estimate = llm::estimate_tokens(llm::render_system_text(p)) + llm::estimate_tokens(p.messages.front());
    p.context = std::move(context);
    return p;
}

TableUsage parse_usage(const std::string& reply) {
    std::string word;
    if (auto doc = extract_json(reply); doc && doc->is_object() && doc->contains("usage") &&
                                        doc->at("usage").is_string()) {
        word = first_word(doc->at("usage").get<std::string>());
    } else {
        word = first_word(reply);
    }
    if (word.rfind("init-", 0) == 0 || word.rfind("init_", 0) == 0) word = word.substr(5);
    if (word == "npcs" || word == "npc") return TableUsage::Npcs;
    if (word == "objects" || word == "object") return TableUsage::Objects;
    if (word == "both") return TableUsage::Both;
    return TableUsage::Unused;
}

std::size_t parse_count(const std::string& reply, std::size_t table_size) {
    long long n = 1;
    if (auto doc = extract_json(reply); doc && doc->is_object() && doc->contains("count") &&
                                        doc->at("count").is_number_integer()) {
        n = doc->at("count").get<long long>();
    } else if (doc && doc->is_number_integer()) {
        n = doc->get<long long>();
    } else {
        for (std::size_t i = 0; i < reply.size(); ++i) {
            if (std::isdigit(static_cast<unsigned char>(reply[i]))) {
                std::size_t end = i;
                while (end < reply.size() && std::isdigit(static_cast<unsigned char>(reply[end]))) ++end;
                n = std::stoll(reply.substr(i, std::min<std::size_t>(end - i, 9)));
                break;
            }
        }
    }
    if (n < 1) n = 1;
    return std::min<std::size_t>(static_cast<std::size_t>(n), table_size);
}

}  // namespace

std::string_view table_usage_name(TableUsage usage) {
    switch (usage) {
        case TableUsage::Npcs: return "npcs";
        case TableUsage::Objects: return "objects";
        case TableUsage::Both: return "both";
        case TableUsage::Unused: break;
    }
    return "unused";
}

Checked<RawScene> raw_scene_from_json(const Json& doc) {
    if (!doc.is_object()) return ValidationErrors{{"", "raw scene must be an object"}};
    RawScene r;
    ValidationErrors errors;
    read_text(doc, "id", r.id, errors, false);
    read_text(doc, "chapter", r.chapter, errors, false);
    read_text(doc, "scene", r.scene, errors, true);
    read_text(doc, "description", r.description, errors, true);
    read_text(doc, "consequences", r.consequences, errors, false);
    read_list(doc, "locations", r.locations, errors);
    read_list(doc, "notes", r.notes, errors);
    if (const auto it = doc.find("random_tables"); it != doc.end()) {
        if (!it->is_object()) {
            errors.push_back({"random_tables", "expected an object"});
        } else {
            for (const auto& [name, entries] : it->items()) {
                std::vector<std::string> list;
                read_list(*it, name, list, errors);
                if (list.empty()) {
                    errors.push_back({"random_tables." + name, "random table must not be empty"});
                } else {
                    r.random_tables.emplace(name, std::move(list));
                }
            }
        }
    }
    static const std::vector<std::string> known = {"id",    "chapter",   "scene",        "description",
                                                   "notes", "locations", "random_tables", "consequences"};
    for (const auto& [key, value] : doc.items()) {
        if (std::find(known.begin(), known.end(), key) != known.end()) continue;
        r.other.emplace(key, value.is_string() ? value.get<std::string>() : value.dump());
    }
    if (doc.contains("scene") && r.scene.empty()) errors.push_back({"scene", "must not be empty"});
    if (doc.contains("description") && r.description.empty()) errors.push_back({"description", "must not be empty"});
    if (!errors.empty()) return errors;
    if (r.id.empty()) r.id = r.scene;
    return r;
}

Json to_json(const RawScene& raw) {
    Json doc = {{"id", raw.id},
                {"chapter", raw.chapter},
                {"scene", raw.scene},
                {"description", raw.description},
                {"locations", raw.locations},
                {"notes", raw.notes},
                {"random_tables", raw.random_tables}};
    if (!raw.consequences.empty()) doc["consequences"] = raw.consequences;
    for (const auto& [k, v] : raw.other) doc[k] = v;
    return doc;
}

InitResult init_scene(const RawScene& raw, const std::vector<std::string>& rules, llm::LlmProvider& provider,
                      functions::RandomSource& rng) {
    using llm::Purpose;
    InitResult result;
    const std::string block = render_raw(raw);
    std::vector<std::string> drawn_npcs;
    std::vector<std::string> drawn_objects;
    std::map<std::string, std::vector<std::string>> remaining;

    for (const auto& [name, entries] : raw.random_tables) {
        TableDecision d;
        d.table = name;
        const std::string table_text = render_table(name, entries);
        const Json table_ctx = {{"table", name}, {"entries", entries}, {"scene", raw.scene}};
        const auto usage = reply_text(provider.complete(
            request(Purpose::SceneInitClassify, instructions::classify_table(), rules, block, table_text, table_ctx)));
        d.usage = usage ? parse_usage(*usage) : TableUsage::Unused;
        if (d.usage == TableUsage::Unused) {
            remaining.emplace(name, entries);
            result.tables.push_back(std::move(d));
            continue;
        }
        const auto count = reply_text(provider.complete(
            request(Purpose::SceneInitCount, instructions::count_entries(), rules, block, table_text, table_ctx)));
        d.count = count ? parse_count(*count, entries.size()) : 1;
        for (std::size_t i : functions::sample_without_replacement(entries.size(), d.count, rng)) {
            d.drawn.push_back(entries[i]);
        }
        if (d.usage != TableUsage::Objects) drawn_npcs.insert(drawn_npcs.end(), d.drawn.begin(), d.drawn.end());
        if (d.usage != TableUsage::Npcs) drawn_objects.insert(drawn_objects.end(), d.drawn.begin(), d.drawn.end());
        result.tables.push_back(std::move(d));
    }

    std::string drawn_text = "Drawn NPC entries:";
    for (const auto& e : drawn_npcs) drawn_text += "\n- " + e;
    drawn_text += "\nDrawn object entries:";
    for (const auto& e : drawn_objects) drawn_text += "\n- " + e;
    Json context = {{"raw", to_json(raw)}, {"drawn", {{"npcs", drawn_npcs}, {"objects", drawn_objects}}}};

    auto assemble = [&](const std::optional<std::string>& reply, ValidationErrors& errors) -> std::optional<state::SceneState> {
        if (!reply) {
            errors.push_back({"", "no scene state returned"});
            return std::nullopt;
        }
        const auto doc = extract_json(*reply);
        if (!doc || !doc->is_object()) {
            errors.push_back({"", "reply is not a JSON object"});
            return std::nullopt;
        }
        Json scene = {{"chapter", raw.chapter.empty() ? raw.scene : raw.chapter},
                      {"scene", raw.scene},
                      {"random_tables", remaining},
                      {"is_action_scene", false}};
        if (!raw.consequences.empty()) scene["consequences"] = raw.consequences;
        for (const char* key : {"scene_summary", "npcs", "success_condition", "failure_condition", "game_flow",
                                "environment"}) {
            if (doc->contains(key)) scene[key] = doc->at(key);
        }
        auto parsed = state::scene_from_json(scene);
        if (!parsed) {
            errors = parsed.errors();
            return std::nullopt;
        }
        state::SceneState s = parsed.value();
        for (const auto& object : drawn_objects) {
            if (!s.environment.count(object)) s.environment.emplace(object, "Placed here when the scene began.");
        }
        errors = state::validate(s);
        if (!errors.empty()) return std::nullopt;
        return s;
    };

    ValidationErrors errors;
    const auto first = reply_text(provider.complete(
        request(Purpose::SceneInitGenerate, instructions::generate_scene(), rules, block, drawn_text, context)));
    if (auto scene = assemble(first, errors)) {
        result.scene = std::move(*scene);
        return result;
    }
    Json problems = Json::array();
    for (const auto& e : errors) problems.push_back({{"path", e.path}, {"message", e.message}});
    context["errors"] = problems;
    context["previous"] = first.value_or("");
    const auto second = reply_text(provider.complete(request(Purpose::SceneInitGenerate,
                                                             instructions::generate_scene() + "\n\n" +
                                                                 instructions::repair_scene(),
                                                             rules, block, drawn_text + "\nProblems:\n" + describe(errors),
                                                             context)));
    ValidationErrors again;
    if (auto scene = assemble(second, again)) {
        result.scene = std::move(*scene);
        result.repaired = true;
        return result;
    }
    throw ValidationFailure(again);
}

Checked<Catalog> catalog_from_json(const Json& doc) {
    if (!doc.is_object()) return ValidationErrors{{"", "catalog must be an object"}};
    Catalog c;
    ValidationErrors errors;
    read_map(doc, "traits", c.traits, errors);
    read_map(doc, "flaws", c.flaws, errors);
    const auto kins = doc.find("kins");
    if (kins == doc.end() || !kins->is_object() || kins->empty()) {
        errors.push_back({"kins", "expected a non-empty object"});
    } else {
        for (const auto& [name, entry] : kins->items()) {
            const std::string prefix = "kins." + name + ".";
            if (!entry.is_object()) {
                errors.push_back({"kins." + name, "expected an object"});
                continue;
            }
            KinEntry k;
            if (entry.contains("persona") && entry["persona"].is_string()) {
                k.persona = entry["persona"].get<std::string>();
            } else {
                errors.push_back({prefix + "persona", "missing text"});
            }
            read_map(entry, "traits", k.traits, errors, prefix);
            read_map(entry, "flaws", k.flaws, errors, prefix);
            read_map(entry, "items", k.items, errors, prefix);
            c.kins.emplace(name, std::move(k));
        }
    }
    if (!errors.empty()) return errors;
    return c;
}

Json to_json(const Catalog& catalog) {
    Json kins = Json::object();
    for (const auto& [name, k] : catalog.kins) {
        kins[name] = {{"persona", k.persona}, {"traits", k.traits}, {"flaws", k.flaws}, {"items", k.items}};
    }
    return {{"kins", kins}, {"traits", catalog.traits}, {"flaws", catalog.flaws}};
}

namespace {

Json read_json_file(const std::string& path, const std::string& what) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + what + " " + path);
    Json doc = Json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw Error(what + " " + path + " is not valid JSON");
    return doc;
}

}  // namespace

Catalog load_catalog(const std::string& path) { return catalog_from_json(read_json_file(path, "catalog")).value(); }

std::vector<PackedScene> load_scene_pack(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw Error("scene pack " + dir + " is not a directory");
    std::vector<PackedScene> pack;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
        auto parsed = state::scene_from_json(read_json_file(entry.path().string(), "scene"));
        if (!parsed) {
            ValidationErrors errors;
            for (const auto& e : parsed.errors()) errors.push_back({entry.path().filename().string() + ":" + e.path, e.message});
            throw ValidationFailure(errors);
        }
        pack.push_back({entry.path().stem().string(), parsed.value()});
    }
    std::sort(pack.begin(), pack.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    if (pack.empty()) throw Error("scene pack " + dir + " holds no scenes");
    return pack;
}

std::vector<state::PlayerState> load_party(const std::string& path) {
    return state::players_from_json(read_json_file(path, "party")).value();
}

Checked<state::PlayerState> create_character(const CharacterChoices& choices, const Catalog& catalog) {
    ValidationErrors errors;
    const auto kin = catalog.kins.find(choices.kin);
    if (kin == catalog.kins.end()) errors.push_back({"kin", "unknown kin " + choices.kin});
    const auto trait = catalog.traits.find(choices.trait);
    if (trait == catalog.traits.end()) errors.push_back({"trait", "trait " + choices.trait + " is not in the catalog"});
    const auto flaw = catalog.flaws.find(choices.flaw);
    if (flaw == catalog.flaws.end()) errors.push_back({"flaw", "flaw " + choices.flaw + " is not in the catalog"});
    if (choices.name.empty()) errors.push_back({"name", "must not be empty"});
    if (choices.goal.empty()) errors.push_back({"goal", "must not be empty"});
    if (!errors.empty()) return errors;

    state::PlayerState p;
    p.name = choices.name;
    p.kin = choices.kin;
    p.goal = choices.goal;
    p.traits = kin->second.traits;
    p.flaws = kin->second.flaws;
    p.inventory = kin->second.items;
    p.traits.insert_or_assign(trait->first, trait->second);
    p.flaws.insert_or_assign(flaw->first, flaw->second);
    if (!kin->second.persona.empty()) p.additional_notes.push_back("Persona: " + kin->second.persona);
    if (auto more = state::validate(p); !more.empty()) return more;
    return p;
}

}  // namespace labyrinth::engine
