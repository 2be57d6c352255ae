// SPDX-License-Identifier: Apache-2.0
#include "labyrinth/engine/session.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

namespace labyrinth::engine {

std::string_view status_name(Status status) {
    switch (status) {
        case Status::Success: return "success";
        case Status::Failure: return "failure";
        case Status::Running: break;
    }
    return "running";
}

std::optional<Status> parse_status(std::string_view name) {
    if (name == "running") return Status::Running;
    if (name == "success") return Status::Success;
    if (name == "failure") return Status::Failure;
    return std::nullopt;
}

Json to_json(const EngineConfig& c) {
    return {{"prompt", prompt::to_json(c.prompt)},
            {"max_calls_per_turn", c.max_calls_per_turn},
            {"max_turns", c.max_turns},
            {"clock_policy", c.clock_policy == ClockPolicy::JudgeConfirmed ? "judge_confirmed" : "every_failed_test"},
            {"clock_limit", c.clock_limit},
            {"system_instruction", c.system_instruction}};
}

Checked<EngineConfig> engine_config_from_json(const Json& doc) {
    if (!doc.is_object()) return ValidationErrors{{"", "engine config must be an object"}};
    EngineConfig c;
    ValidationErrors errors;
    auto positive_int = [&](const std::string& key, const Json& v, int& out) {
        if (!v.is_number_integer() || v.get<long long>() < 1) {
            errors.push_back({key, "must be a positive integer"});
        } else {
            out = v.get<int>();
        }
    };
    for (const auto& [key, value] : doc.items()) {
        if (key == "prompt") {
            auto p = prompt::prompt_config_from_json(value);
            if (p) {
                c.prompt = p.value();
            } else {
                for (auto e : p.errors()) errors.push_back({"prompt." + e.path, e.message});
            }
        } else if (key == "max_calls_per_turn") {
            positive_int(key, value, c.max_calls_per_turn);
        } else if (key == "max_turns") {
            positive_int(key, value, c.max_turns);
        } else if (key == "clock_limit") {
            positive_int(key, value, c.clock_limit);
        } else if (key == "clock_policy") {
            if (value == "judge_confirmed") {
                c.clock_policy = ClockPolicy::JudgeConfirmed;
            } else if (value == "every_failed_test") {
                c.clock_policy = ClockPolicy::EveryFailedTest;
            } else {
                errors.push_back({key, "expected judge_confirmed or every_failed_test"});
            }
        } else if (key == "system_instruction") {
            value.is_string() ? void(c.system_instruction = value.get<std::string>())
                              : errors.push_back({key, "must be a string"});
        } else {
            errors.push_back({key, "unknown field"});
        }
    }
    if (!errors.empty()) return errors;
    return c;
}

SessionTerminated::SessionTerminated(Status status)
    : Error("session has already ended with " + std::string(status_name(status))) {}

Session::Session(std::string scene_id, state::SceneState scene, std::vector<state::PlayerState> players,
                 GmSettingProfile profile, EngineConfig config, std::uint64_t seed)
    : scene_id_(std::move(scene_id)),
      scene_(std::move(scene)),
      players_(std::move(players)),
      initial_scene_(scene_),
      initial_players_(players_),
      profile_(profile),
      config_(std::move(config)),
      seed_(seed),
      rng_(seed) {
    ValidationErrors errors = state::validate(scene_);
    for (std::size_t i = 0; i < players_.size(); ++i) {
        auto more = state::validate(players_[i], "players[" + std::to_string(i) + "]");
        errors.insert(errors.end(), more.begin(), more.end());
        for (std::size_t j = 0; j < i; ++j) {
            if (players_[j].name == players_[i].name) {
                errors.push_back({"players[" + std::to_string(i) + "].name", "duplicate player " + players_[i].name});
            }
        }
    }
    if (!errors.empty()) throw ValidationFailure(errors);
    if (auto e = config_.prompt.validate(); !e.empty()) throw ValidationFailure(e);
    clock_.limit = config_.clock_limit;
    append(llm::system_message("scene begins", {{"scene_id", scene_id_}}), false);
}

std::vector<std::string> Session::player_names() const {
    std::vector<std::string> out;
    for (const auto& p : players_) out.push_back(p.name);
    return out;
}

const ChatEvent& Session::append(ChatEvent event, bool to_history) {
    event.counter = next_counter_++;
    event.turn = current_turn_;
    transcript_.push_back(event);
    if (to_history) history_.push_back(std::move(event));
    return transcript_.back();
}

void Session::set_states(state::SceneState scene, std::vector<state::PlayerState> players) {
    scene_ = std::move(scene);
    players_ = std::move(players);
}

void Session::apply(const state::StateDiff& diff) { state::apply_diff(diff, scene_, players_); }

void Session::finish(Status status, std::string reason) {
    if (status_ != Status::Running) return;
    status_ = status;
    end_reason_ = std::move(reason);
}

namespace {

Json header(const Session& s) {
    Json players = Json::array();
    for (const auto& p : s.initial_players()) players.push_back(state::to_json(p));
    return {{"record", "header"},
            {"scene_id", s.scene_id()},
            {"profile", profile_name(s.profile().id)},
            {"seed", s.seed()},
            {"config", to_json(s.config())},
            {"initial_scene", state::to_json(s.initial_scene())},
            {"initial_players", players}};
}

Json footer(const Session& s) {
    return {{"record", "footer"},
            {"status", status_name(s.status())},
            {"clock", state::to_json(s.clock())},
            {"turns", s.turns_completed()},
            {"end_reason", s.end_reason()}};
}

}  // namespace

void write_jsonl(const Session& session, std::ostream& out) {
    out << header(session).dump() << "\n";
    for (const auto& e : session.transcript()) {
        Json j = llm::to_json(e);
        j["record"] = "event";
        out << j.dump() << "\n";
    }
    out << footer(session).dump() << "\n";
}

std::string to_jsonl(const Session& session) {
    std::ostringstream ss;
    write_jsonl(session, ss);
    return ss.str();
}

Transcript parse_transcript(std::string_view jsonl) {
    Transcript t;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < jsonl.size()) {
        auto end = jsonl.find('\n', start);
        if (end == std::string_view::npos) end = jsonl.size();
        const auto line = jsonl.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        Json j = Json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw Error("transcript line " + std::to_string(line_no) + " is not a JSON object");
        }
        const std::string record = j.value("record", std::string("event"));
        if (record == "header") {
            t.header = std::move(j);
        } else if (record == "footer") {
            t.footer = std::move(j);
        } else {
            t.events.push_back(llm::event_from_json(j));
        }
    }
    return t;
}

Transcript read_transcript(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open transcript " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_transcript(ss.str());
}

}  // namespace labyrinth::engine
