// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "labyrinth/functions/random.hpp"
#include "labyrinth/llm/chat.hpp"
#include "labyrinth/profile.hpp"
#include "labyrinth/prompt/builder.hpp"
#include "labyrinth/state/game_state.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace labyrinth::engine {

using llm::ChatEvent;
using llm::Json;

enum class Status { Running, Success, Failure };
std::string_view status_name(Status status);
std::optional<Status> parse_status(std::string_view name);

// When a failed test costs an hour: only when the judge confirms the failure
// mattered, or after every failed test.
enum class ClockPolicy { JudgeConfirmed, EveryFailedTest };

struct EngineConfig {
    prompt::PromptConfig prompt;
    int max_calls_per_turn = 10;
    int max_turns = 20;
    ClockPolicy clock_policy = ClockPolicy::JudgeConfirmed;
    int clock_limit = 13;
    // Empty means the built-in instruction.
    std::string system_instruction;

    bool operator==(const EngineConfig&) const = default;
};

Json to_json(const EngineConfig& config);
Checked<EngineConfig> engine_config_from_json(const Json& doc);

class SessionTerminated : public Error {
public:
    explicit SessionTerminated(Status status);
};

// One scene being played. The transcript is append-only; the history is the
// working list the prompt builder draws from, which summaries may compact.
class Session {
public:
    Session(std::string scene_id, state::SceneState scene, std::vector<state::PlayerState> players,
            GmSettingProfile profile, EngineConfig config, std::uint64_t seed);

    const std::string& scene_id() const { return scene_id_; }
    const state::SceneState& scene() const { return scene_; }
    const std::vector<state::PlayerState>& players() const { return players_; }
    const state::SceneState& initial_scene() const { return initial_scene_; }
    const std::vector<state::PlayerState>& initial_players() const { return initial_players_; }
    const state::GameClock& clock() const { return clock_; }
    Status status() const { return status_; }
    const std::string& end_reason() const { return end_reason_; }
    const GmSettingProfile& profile() const { return profile_; }
    const EngineConfig& config() const { return config_; }
    std::uint64_t seed() const { return seed_; }
    int turns_completed() const { return turns_completed_; }
    const std::vector<ChatEvent>& transcript() const { return transcript_; }
    const std::vector<ChatEvent>& history() const { return history_; }
    std::vector<std::string> player_names() const;

    // Assigns the next counter and the current turn, then records the event.
    const ChatEvent& append(ChatEvent event, bool to_history = true);
    void replace_history(std::vector<ChatEvent> history) { history_ = std::move(history); }
    std::uint64_t next_counter() const { return next_counter_; }

    void set_states(state::SceneState scene, std::vector<state::PlayerState> players);
    void apply(const state::StateDiff& diff);
    state::GameClock& clock_mut() { return clock_; }
    void finish(Status status, std::string reason);
    // Records why play stopped while the status stays Running.
    void set_end_reason(std::string reason) { end_reason_ = std::move(reason); }
    void begin_turn() { current_turn_ = turns_completed_ + 1; }
    void end_turn() { ++turns_completed_; }
    int current_turn() const { return current_turn_; }
    functions::RandomSource& rng() { return rng_; }

    int failed_tests_last_turn = 0;

private:
    std::string scene_id_;
    state::SceneState scene_;
    std::vector<state::PlayerState> players_;
    state::SceneState initial_scene_;
    std::vector<state::PlayerState> initial_players_;
    state::GameClock clock_;
    Status status_ = Status::Running;
    std::string end_reason_;
    GmSettingProfile profile_;
    EngineConfig config_;
    std::uint64_t seed_;
    functions::SeededRandom rng_;
    int turns_completed_ = 0;
    int current_turn_ = 0;
    std::uint64_t next_counter_ = 1;
    std::vector<ChatEvent> transcript_;
    std::vector<ChatEvent> history_;
};

// Line-delimited transcript: a header record (scene id, profile, seed,
// config, initial states), one record per event, and a footer (status, clock,
// end reason).
struct Transcript {
    Json header;
    std::vector<ChatEvent> events;
    Json footer;
};

std::string to_jsonl(const Session& session);
void write_jsonl(const Session& session, std::ostream& out);
Transcript parse_transcript(std::string_view jsonl);
Transcript read_transcript(const std::string& path);

}  // namespace labyrinth::engine
