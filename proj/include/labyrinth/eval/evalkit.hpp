// SPDX-License-Identifier: Apache-2.0
//
// State-update unit tests, suite scoring, transcript statistics, and test
// cases cut from recorded play.
#pragma once

#include "labyrinth/engine/game_master.hpp"

#include <boost/rational.hpp>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace labyrinth::eval {

using llm::ChatEvent;
using llm::Json;

struct UnitTestCase {
    std::string id;
    state::SceneState input_scene;
    std::vector<state::PlayerState> input_players;
    // Earlier events followed by the player messages the game master answers.
    std::vector<ChatEvent> input_dialogue;
    state::SceneState expected_scene;
    std::vector<state::PlayerState> expected_players;
    std::uint64_t seed = 0;
    // Set when the dialogue was reworded and awaits manual inspection.
    bool paraphrased = false;
    std::string note;

    bool operator==(const UnitTestCase&) const = default;
};

// Rejects cases with an empty dialogue, a dialogue that does not end in a
// player message, or expected states equal to the inputs.
Checked<UnitTestCase> case_from_json(const Json& doc);
Json to_json(const UnitTestCase& c);
UnitTestCase load_case(const std::string& path);
// {"cases": ["relative/path.json", ...]} resolved against the manifest's directory.
std::vector<UnitTestCase> load_suite(const std::string& manifest_path);

struct CaseOutcome {
    std::string id;
    bool pass = false;
    bool errored = false;
    std::string error;
    // Expected states against the states the game master produced.
    state::StateDiff diff;

    bool operator==(const CaseOutcome&) const = default;
};

Json to_json(const CaseOutcome& outcome);

struct HarnessSetup {
    const retrieval::RuleStore& rules;
    llm::Embedder* embedder = nullptr;
    engine::EngineConfig config;
};

// Loads the input states, replays the dialogue as context, runs one game
// master turn and compares the result with the expected states.
CaseOutcome run_unit_test(const UnitTestCase& c, const GmSettingProfile& profile, llm::LlmProvider& provider,
                          const HarnessSetup& setup);

using Score = boost::rational<long long>;

struct SuiteReport {
    int trial = 1;
    // Sorted by case id.
    std::vector<CaseOutcome> per_case;
    // Passes over the cases that ran; errored cases are left out.
    Score score{0};
    std::size_t passed = 0;
    std::size_t scored = 0;
    std::size_t errored = 0;

    bool operator==(const SuiteReport&) const = default;
};

Json to_json(const SuiteReport& report);
SuiteReport make_report(int trial, std::vector<CaseOutcome> outcomes);

// A fresh provider for one case in one trial.
using ProviderFactory = std::function<std::unique_ptr<llm::LlmProvider>(const UnitTestCase& c, int trial)>;

std::vector<SuiteReport> score_suite(const std::vector<UnitTestCase>& cases, const GmSettingProfile& profile,
                                     const ProviderFactory& factory, int trials, const HarnessSetup& setup);

// Rows are trials plus an average, columns are profiles, scores to three decimals.
std::string format_score_table(const std::vector<std::pair<ProfileId, std::vector<SuiteReport>>>& results);

// Per-case provider scripts: {"case id": {"gm": [...], "npc_gen": [...], ...}}.
ProviderFactory scripted_factory(Json scripts);

struct TranscriptStats {
    std::size_t total_scripts = 0;
    std::size_t total_scenes = 0;
    std::size_t total_utterances = 0;
    double avg_utterances_per_script = 0;
    std::size_t total_generated_responses = 0;
    double avg_generated = 0;
    std::size_t total_function_calls = 0;
    std::size_t scripts_with_functions = 0;
    double avg_calls_per_script_with_functions = 0;
};

// Utterances are player and game-master messages; generated responses are
// game-master messages with content; the call average only counts scripts
// that contain a call.
TranscriptStats transcript_stats(const std::vector<engine::Transcript>& transcripts);
Json to_json(const TranscriptStats& stats);
std::string format_stats_table(const TranscriptStats& stats);

// States before and after `turn` (1-based), rebuilt from the header and the
// logged diffs.
struct TurnStates {
    state::SceneState scene_before;
    std::vector<state::PlayerState> players_before;
    state::SceneState scene_after;
    std::vector<state::PlayerState> players_after;
};
TurnStates states_around_turn(const engine::Transcript& transcript, int turn);

// The model turns that reproduce the game master's side of `turn`.
std::vector<llm::ModelTurn> replay_script(const engine::Transcript& transcript, int turn);

// A case from one turn whose states changed. With a paraphraser, player and
// game-master lines are reworded and the case is flagged.
UnitTestCase derive_case_from_transcript(const engine::Transcript& transcript, int turn,
                                         llm::LlmProvider* paraphraser = nullptr);

// Two game-master messages in a row that both ask for a dice roll.
bool requests_roll(const std::string& text);
bool has_roll_deadlock(const std::vector<ChatEvent>& events);

}  // namespace labyrinth::eval
