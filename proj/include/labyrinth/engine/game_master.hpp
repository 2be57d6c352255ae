// SPDX-License-Identifier: Apache-2.0
//
// The turn loop: players speak, the model narrates and calls functions one at
// a time until it stops, then a judge decides whether the scene is over.
#pragma once

#include "labyrinth/engine/session.hpp"
#include "labyrinth/llm/provider.hpp"
#include "labyrinth/retrieval/rules.hpp"

#include <deque>
#include <functional>
#include <span>

namespace labyrinth::engine {

enum class Outcome { Continue, Success, Failure };
std::string_view outcome_name(Outcome outcome);

enum class ClockTrigger { FailedTest, SceneFailure, ExplicitGmIncrement };
std::string_view trigger_name(ClockTrigger trigger);

struct PlayerInput {
    std::string player;
    std::string text;
};

// Called with every event as soon as it is recorded.
using EventSink = std::function<void(const ChatEvent&)>;

class GameMaster {
public:
    // `embedder` serves rule and history retrieval and defaults to the
    // provider. The rule store must have been embedded with the same model.
    GameMaster(llm::LlmProvider& provider, const retrieval::RuleStore& rules, llm::Embedder* embedder = nullptr);

    // One game-master turn for the given player messages. Returns the events
    // recorded during the turn. Throws SessionTerminated when the session has
    // ended and ValidationFailure for unknown players. A provider error ends
    // the turn early, keeping every change already logged, and is rethrown.
    std::vector<ChatEvent> gm_turn(Session& session, const std::vector<PlayerInput>& messages,
                                   const EventSink& sink = {});

    // Asks the judge whether the scene is over. A clock at its limit is a
    // failure whatever the judge says; provider trouble means Continue.
    Outcome check_outcome(Session& session, const EventSink& sink = {});

    const state::GameClock& advance_clock(Session& session, ClockTrigger trigger, const EventSink& sink = {});

    // Generates NPC details through the provider.
    functions::NpcGenerator npc_generator();

    // The prompt the next model request in this turn would receive.
    llm::PromptPackage gm_prompt(const Session& session, std::size_t pinned_from,
                                 const std::optional<ChatEvent>& ephemeral_summary = std::nullopt) const;

private:
    void regenerate_states(Session& session, std::size_t pinned_from, const EventSink& sink);
    std::vector<std::string> rule_texts(const Session& session, std::size_t pinned_from) const;
    void summarize_if_due(Session& session);

    llm::LlmProvider& provider_;
    const retrieval::RuleStore& rules_;
    llm::Embedder* embedder_;
};

class PlayerAgent {
public:
    virtual ~PlayerAgent() = default;
    // The next message of `player`, or nullopt when it has nothing more to say.
    virtual std::optional<std::string> next_message(const Session& session, const std::string& player, int turn) = 0;
};

// Replays fixed lines in order.
class ScriptedAgent final : public PlayerAgent {
public:
    explicit ScriptedAgent(std::vector<std::string> lines) : lines_(lines.begin(), lines.end()) {}
    std::optional<std::string> next_message(const Session&, const std::string&, int) override;

private:
    std::deque<std::string> lines_;
};

// Asks a provider to speak for the character.
class ProviderAgent final : public PlayerAgent {
public:
    explicit ProviderAgent(llm::LlmProvider& provider) : provider_(provider) {}
    std::optional<std::string> next_message(const Session& session, const std::string& player, int turn) override;

private:
    llm::LlmProvider& provider_;
};

// Plays rounds until the judge ends the scene, max_turns is reached, every
// agent falls silent or an agent fails. One agent serves every player, or
// there is one agent per player in roster order. The reason play stopped is
// stored on the session and returned.
std::string run_scene(GameMaster& gm, Session& session, std::span<PlayerAgent* const> agents,
                      const EventSink& sink = {});

}  // namespace labyrinth::engine
