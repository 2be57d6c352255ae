// SPDX-License-Identifier: Apache-2.0
#include "labyrinth/eval/evalkit.hpp"

#include "labyrinth/engine/instructions.hpp"
#include "labyrinth/llm/scripted.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <regex>
#include <set>
#include <sstream>

namespace labyrinth::eval {

using llm::EventKind;

namespace {

Json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    Json doc = Json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw Error(path + " is not valid JSON");
    return doc;
}

void prefixed(ValidationErrors& out, const ValidationErrors& in, const std::string& prefix) {
    for (const auto& e : in) out.push_back({prefix + (e.path.empty() ? "" : "." + e.path), e.message});
}

Json players_json(const std::vector<state::PlayerState>& players) {
    Json out = Json::array();
    for (const auto& p : players) out.push_back(state::to_json(p));
    return out;
}

std::string three_places(double v) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(3) << v;
    return ss.str();
}

double as_double(const Score& s) { return static_cast<double>(s.numerator()) / static_cast<double>(s.denominator()); }

bool is_dialogue(EventKind kind) {
    return kind == EventKind::PlayerMessage || kind == EventKind::GmMessage || kind == EventKind::FunctionCallMsg ||
           kind == EventKind::FunctionResultMsg;
}

void apply_logged(const ChatEvent& e, state::SceneState& scene, std::vector<state::PlayerState>& players) {
    const bool result = e.kind == EventKind::FunctionResultMsg;
    const bool regen = e.kind == EventKind::SystemMsg && e.detail.is_object() && e.detail.value("state_regen", false);
    if (!(result || regen) || !e.detail.is_object() || !e.detail.contains("diff")) return;
    state::apply_diff(state::diff_from_json(e.detail["diff"]), scene, players);
}

}  // namespace

Checked<UnitTestCase> case_from_json(const Json& doc) {
    if (!doc.is_object()) return ValidationErrors{{"", "case must be an object"}};
    UnitTestCase c;
    ValidationErrors errors;
    if (doc.contains("id") && doc["id"].is_string() && !doc["id"].get<std::string>().empty()) {
        c.id = doc["id"].get<std::string>();
    } else {
        errors.push_back({"id", "missing text"});
    }
    auto scene = [&](const char* key, state::SceneState& out) {
        if (!doc.contains(key)) return errors.push_back({key, "missing field"});
        auto parsed = state::scene_from_json(doc[key]);
        if (parsed) {
            out = parsed.value();
        } else {
            prefixed(errors, parsed.errors(), key);
        }
    };
    auto players = [&](const char* key, std::vector<state::PlayerState>& out) {
        if (!doc.contains(key)) return errors.push_back({key, "missing field"});
        auto parsed = state::players_from_json(doc[key], key);
        if (parsed) {
            out = parsed.value();
        } else {
            errors.insert(errors.end(), parsed.errors().begin(), parsed.errors().end());
        }
    };
    scene("input_scene", c.input_scene);
    players("input_players", c.input_players);
    scene("expected_scene", c.expected_scene);
    players("expected_players", c.expected_players);
    if (!doc.contains("input_dialogue") || !doc["input_dialogue"].is_array() || doc["input_dialogue"].empty()) {
        errors.push_back({"input_dialogue", "must be a non-empty list of events"});
    } else {
        for (std::size_t i = 0; i < doc["input_dialogue"].size(); ++i) {
            try {
                c.input_dialogue.push_back(llm::event_from_json(doc["input_dialogue"][i]));
            } catch (const std::exception& e) {
                errors.push_back({"input_dialogue[" + std::to_string(i) + "]", e.what()});
            }
        }
        if (errors.empty() && c.input_dialogue.back().kind != EventKind::PlayerMessage) {
            errors.push_back({"input_dialogue", "must end with a player message"});
        }
    }
    if (doc.contains("seed")) {
        doc["seed"].is_number_unsigned() ? void(c.seed = doc["seed"].get<std::uint64_t>())
                                         : errors.push_back({"seed", "must be a non-negative integer"});
    }
    c.paraphrased = doc.value("paraphrased", false);
    c.note = doc.value("note", std::string());
    if (errors.empty()) {
        try {
            if (state::diff_states(c.input_scene, c.input_players, c.expected_scene, c.expected_players).empty()) {
                errors.push_back({"expected_scene", "expected states equal the input states"});
            }
        } catch (const state::RosterMismatch& e) {
            errors.push_back({"expected_players", e.what()});
        }
    }
    if (!errors.empty()) return errors;
    return c;
}

Json to_json(const UnitTestCase& c) {
    Json dialogue = Json::array();
    for (const auto& e : c.input_dialogue) dialogue.push_back(llm::to_json(e));
    Json doc = {{"id", c.id},
                {"input_scene", state::to_json(c.input_scene)},
                {"input_players", players_json(c.input_players)},
                {"input_dialogue", dialogue},
                {"expected_scene", state::to_json(c.expected_scene)},
                {"expected_players", players_json(c.expected_players)},
                {"seed", c.seed}};
    if (c.paraphrased) doc["paraphrased"] = true;
    if (!c.note.empty()) doc["note"] = c.note;
    return doc;
}

UnitTestCase load_case(const std::string& path) {
    auto parsed = case_from_json(read_json(path));
    if (!parsed) throw ValidationFailure(parsed.errors());
    return parsed.value();
}

std::vector<UnitTestCase> load_suite(const std::string& manifest_path) {
    const Json manifest = read_json(manifest_path);
    if (!manifest.contains("cases") || !manifest["cases"].is_array() || manifest["cases"].empty()) {
        throw ValidationFailure("cases", "manifest must list at least one case file");
    }
    const auto base = std::filesystem::path(manifest_path).parent_path();
    std::vector<UnitTestCase> cases;
    std::set<std::string> ids;
    for (const auto& entry : manifest["cases"]) {
        const auto path = (base / entry.get<std::string>()).string();
        auto c = load_case(path);
        if (!ids.insert(c.id).second) throw ValidationFailure("cases", "duplicate case id " + c.id);
        cases.push_back(std::move(c));
    }
    return cases;
}

Json to_json(const CaseOutcome& o) {
    Json doc = {{"id", o.id}, {"pass", o.pass}, {"diff", state::to_json(o.diff)}};
    if (o.errored) {
        doc["errored"] = true;
        doc["error"] = o.error;
    }
    return doc;
}

CaseOutcome run_unit_test(const UnitTestCase& c, const GmSettingProfile& profile, llm::LlmProvider& provider,
                          const HarnessSetup& setup) {
    CaseOutcome out;
    out.id = c.id;
    try {
        engine::Session session(c.id, c.input_scene, c.input_players, profile, setup.config, c.seed);
        std::size_t split = c.input_dialogue.size();
        while (split > 0 && c.input_dialogue[split - 1].kind == EventKind::PlayerMessage) --split;
        for (std::size_t i = 0; i < split; ++i) {
            ChatEvent e = c.input_dialogue[i];
            // Keep earlier call ids apart from the ones the engine assigns.
            if (e.call) e.call->call_id = "ctx_" + e.call->call_id;
            if (!e.call_id.empty()) e.call_id = "ctx_" + e.call_id;
            session.append(std::move(e));
        }
        std::vector<engine::PlayerInput> inputs;
        for (std::size_t i = split; i < c.input_dialogue.size(); ++i) {
            inputs.push_back({c.input_dialogue[i].speaker, c.input_dialogue[i].content});
        }
        engine::GameMaster gm(provider, setup.rules, setup.embedder);
        gm.gm_turn(session, inputs);
        out.diff = state::diff_states(c.expected_scene, c.expected_players, session.scene(), session.players());
        out.pass = out.diff.empty();
    } catch (const std::exception& e) {
        out.errored = true;
        out.pass = false;
        out.error = e.what();
    }
    return out;
}

SuiteReport make_report(int trial, std::vector<CaseOutcome> outcomes) {
    SuiteReport r;
    r.trial = trial;
    std::sort(outcomes.begin(), outcomes.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    for (const auto& o : outcomes) {
        if (o.errored) {
            ++r.errored;
            continue;
        }
        ++r.scored;
        if (o.pass) ++r.passed;
    }
    r.per_case = std::move(outcomes);
    r.score = r.scored == 0 ? Score(0) : Score(static_cast<long long>(r.passed), static_cast<long long>(r.scored));
    return r;
}

Json to_json(const SuiteReport& r) {
    Json cases = Json::array();
    for (const auto& o : r.per_case) cases.push_back(to_json(o));
    std::ostringstream fraction;
    fraction << r.score.numerator() << "/" << r.score.denominator();
    return {{"trial", r.trial},
            {"score", fraction.str()},
            {"score_value", std::stod(three_places(as_double(r.score)))},
            {"passed", r.passed},
            {"scored", r.scored},
            {"errored", r.errored},
            {"cases", cases}};
}

std::vector<SuiteReport> score_suite(const std::vector<UnitTestCase>& cases, const GmSettingProfile& profile,
                                     const ProviderFactory& factory, int trials, const HarnessSetup& setup) {
    if (cases.empty()) throw ValidationFailure("cases", "the suite needs at least one case");
    if (trials < 1) throw ValidationFailure("trials", "must be at least 1");
    std::vector<SuiteReport> reports;
    for (int t = 1; t <= trials; ++t) {
        std::vector<CaseOutcome> outcomes;
        for (const auto& c : cases) {
            auto provider = factory(c, t);
            outcomes.push_back(run_unit_test(c, profile, *provider, setup));
        }
        reports.push_back(make_report(t, std::move(outcomes)));
    }
    return reports;
}

std::string format_score_table(const std::vector<std::pair<ProfileId, std::vector<SuiteReport>>>& results) {
    std::ostringstream out;
    std::size_t rows = 0;
    out << std::left << std::setw(6) << "Trial";
    for (const auto& [id, reports] : results) {
        out << std::setw(12) << profile_name(id);
        rows = std::max(rows, reports.size());
    }
    out << "\n";
    for (std::size_t i = 0; i < rows; ++i) {
        out << std::setw(6) << (i + 1);
        for (const auto& [id, reports] : results) {
            out << std::setw(12) << (i < reports.size() ? three_places(as_double(reports[i].score)) : "-");
        }
        out << "\n";
    }
    out << std::setw(6) << "Avg";
    for (const auto& [id, reports] : results) {
        Score sum(0);
        for (const auto& r : reports) sum += r.score;
        out << std::setw(12)
            << (reports.empty() ? "-" : three_places(as_double(sum / static_cast<long long>(reports.size()))));
    }
    out << "\n";
    return out.str();
}

ProviderFactory scripted_factory(Json scripts) {
    return [scripts = std::move(scripts)](const UnitTestCase& c, int) -> std::unique_ptr<llm::LlmProvider> {
        auto provider = std::make_unique<llm::ScriptedProvider>();
        if (scripts.contains(c.id)) provider->load(scripts[c.id]);
        return provider;
    };
}

TranscriptStats transcript_stats(const std::vector<engine::Transcript>& transcripts) {
    TranscriptStats s;
    std::set<std::string> scenes;
    for (const auto& t : transcripts) {
        ++s.total_scripts;
        scenes.insert(t.header.is_object() ? t.header.value("scene_id", std::string()) : std::string());
        std::size_t calls = 0;
        for (const auto& e : t.events) {
            if (e.kind == EventKind::PlayerMessage || e.kind == EventKind::GmMessage) ++s.total_utterances;
            if (e.kind == EventKind::GmMessage && !e.content.empty()) ++s.total_generated_responses;
            if (e.kind == EventKind::FunctionCallMsg) ++calls;
        }
        s.total_function_calls += calls;
        if (calls > 0) ++s.scripts_with_functions;
    }
    s.total_scenes = scenes.size();
    if (s.total_scripts > 0) {
        s.avg_utterances_per_script = static_cast<double>(s.total_utterances) / static_cast<double>(s.total_scripts);
        s.avg_generated = static_cast<double>(s.total_generated_responses) / static_cast<double>(s.total_scripts);
    }
    if (s.scripts_with_functions > 0) {
        s.avg_calls_per_script_with_functions =
            static_cast<double>(s.total_function_calls) / static_cast<double>(s.scripts_with_functions);
    }
    return s;
}

Json to_json(const TranscriptStats& s) {
    return {{"total_scripts", s.total_scripts},
            {"total_scenes", s.total_scenes},
            {"total_utterances", s.total_utterances},
            {"avg_utterances_per_script", s.avg_utterances_per_script},
            {"total_generated_responses", s.total_generated_responses},
            {"avg_generated", s.avg_generated},
            {"total_function_calls", s.total_function_calls},
            {"scripts_with_functions", s.scripts_with_functions},
            {"avg_calls_per_script_with_functions", s.avg_calls_per_script_with_functions}};
}

std::string format_stats_table(const TranscriptStats& s) {
    std::ostringstream out;
    auto row = [&](const std::string& label, const std::string& value) {
        out << std::left << std::setw(36) << label << value << "\n";
    };
    auto two = [](double v) {
        std::ostringstream ss;
        ss << std::fixed << std::setprecision(2) << v;
        return ss.str();
    };
    row("Total scripts", std::to_string(s.total_scripts));
    row("Total scenes", std::to_string(s.total_scenes));
    row("Total utterances", std::to_string(s.total_utterances));
    row("Average utterances per script", two(s.avg_utterances_per_script));
    row("Total generated responses", std::to_string(s.total_generated_responses));
    row("Average generated responses", two(s.avg_generated));
    row("Total function calls", std::to_string(s.total_function_calls));
    row("Average function calls per script", two(s.avg_calls_per_script_with_functions));
    return out.str();
}

TurnStates states_around_turn(const engine::Transcript& transcript, int turn) {
    const Json& h = transcript.header;
    if (!h.is_object() || !h.contains("initial_scene") || !h.contains("initial_players")) {
        throw Error("transcript header lacks the initial states");
    }
    TurnStates s;
    s.scene_before = state::scene_from_json(h["initial_scene"]).value();
    s.players_before = state::players_from_json(h["initial_players"]).value();
    for (const auto& e : transcript.events) {
        if (e.turn < turn) apply_logged(e, s.scene_before, s.players_before);
    }
    s.scene_after = s.scene_before;
    s.players_after = s.players_before;
    for (const auto& e : transcript.events) {
        if (e.turn == turn) apply_logged(e, s.scene_after, s.players_after);
    }
    return s;
}

std::vector<llm::ModelTurn> replay_script(const engine::Transcript& transcript, int turn) {
    std::vector<llm::ModelTurn> out;
    for (const auto& e : transcript.events) {
        if (e.turn != turn) continue;
        if (e.kind == EventKind::FunctionCallMsg && e.call) {
            functions::FunctionCall c = *e.call;
            c.call_id.clear();
            out.emplace_back(std::move(c));
        } else if (e.kind == EventKind::GmMessage) {
            out.emplace_back(llm::TextTurn{e.content, false});
        }
    }
    out.emplace_back(llm::StopTurn{});
    return out;
}

UnitTestCase derive_case_from_transcript(const engine::Transcript& transcript, int turn,
                                         llm::LlmProvider* paraphraser) {
    const auto states = states_around_turn(transcript, turn);
    if (state::diff_states(states.scene_before, states.players_before, states.scene_after, states.players_after)
            .empty()) {
        throw Error("turn " + std::to_string(turn) + " changed no state");
    }
    UnitTestCase c;
    c.id = transcript.header.value("scene_id", std::string("transcript")) + "-turn-" + std::to_string(turn);
    c.input_scene = states.scene_before;
    c.input_players = states.players_before;
    c.expected_scene = states.scene_after;
    c.expected_players = states.players_after;
    c.seed = transcript.header.value("seed", std::uint64_t{0});
    for (const auto& e : transcript.events) {
        if (!is_dialogue(e.kind)) continue;
        if (e.turn < turn || (e.turn == turn && e.kind == EventKind::PlayerMessage)) c.input_dialogue.push_back(e);
    }
    if (c.input_dialogue.empty() || c.input_dialogue.back().kind != EventKind::PlayerMessage) {
        throw Error("turn " + std::to_string(turn) + " has no player message");
    }
    if (paraphraser) {
        for (auto& e : c.input_dialogue) {
            if (e.kind != EventKind::PlayerMessage && e.kind != EventKind::GmMessage) continue;
            llm::PromptPackage request;
            request.purpose = llm::Purpose::Paraphrase;
            request.system_instruction = engine::instructions::paraphrase();
            request.messages.push_back(e);
            request.token_estimate =
                llm::estimate_tokens(request.system_instruction) + llm::estimate_tokens(request.messages.front());
            request.context = {{"text", e.content}, {"speaker", e.speaker}};
            const auto reply = paraphraser->complete(request);
            if (const auto* text = std::get_if<llm::TextTurn>(&reply); text && !text->content.empty()) {
                e.content = text->content;
            }
        }
        c.paraphrased = true;
        c.note = "paraphrased; inspect before use";
    }
    return c;
}

bool requests_roll(const std::string& text) {
    std::string lower;
    for (unsigned char ch : text) lower += static_cast<char>(std::tolower(ch));
    static const std::regex roll(R"(\broll\b)");
    static const std::regex die(R"(\b(dice|die|d6)\b)");
    return std::regex_search(lower, roll) && std::regex_search(lower, die);
}

bool has_roll_deadlock(const std::vector<ChatEvent>& events) {
    const ChatEvent* previous = nullptr;
    for (const auto& e : events) {
        if (e.kind == EventKind::SystemMsg || e.kind == EventKind::SummaryMsg) continue;
        if (previous && previous->kind == EventKind::GmMessage && e.kind == EventKind::GmMessage &&
            requests_roll(previous->content) && requests_roll(e.content)) {
            return true;
        }
        previous = &e;
    }
    return false;
}

}  // namespace labyrinth::eval
