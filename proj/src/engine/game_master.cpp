// SPDX-License-Identifier: Apache-2.0
#include "labyrinth/engine/game_master.hpp"

#include "labyrinth/engine/instructions.hpp"
#include "labyrinth/engine/reply.hpp"
#include "labyrinth/prompt/builder.hpp"

#include <algorithm>

namespace labyrinth::engine {

using llm::EventKind;
using llm::Purpose;
using functions::FunctionCall;

std::string_view outcome_name(Outcome outcome) {
    switch (outcome) {
        case Outcome::Success: return "success";
        case Outcome::Failure: return "failure";
        case Outcome::Continue: break;
    }
    return "continue";
}

std::string_view trigger_name(ClockTrigger trigger) {
    switch (trigger) {
        case ClockTrigger::FailedTest: return "failed_test";
        case ClockTrigger::SceneFailure: return "scene_failure";
        case ClockTrigger::ExplicitGmIncrement: return "gm_increment";
    }
    return "failed_test";
}

namespace {

Json states_json(const state::SceneState& scene, std::span<const state::PlayerState> players) {
    Json list = Json::array();
    for (const auto& p : players) list.push_back(state::to_json(p));
    return {{"scene", state::to_json(scene)}, {"players", list}};
}

// Purposes other than the GM turn see the history without tools, in simple mode.
prompt::PromptConfig auxiliary_config(const prompt::PromptConfig& base) {
    prompt::PromptConfig c = base;
    c.concat_mode = prompt::ConcatMode::Simple;
    c.summarization = prompt::SummarizationMode::Off;
    return c;
}

struct Emitter {
    Session& session;
    const EventSink& sink;
    std::vector<ChatEvent>& out;

    void operator()(ChatEvent event, bool to_history = true) {
        const ChatEvent& stored = session.append(std::move(event), to_history);
        out.push_back(stored);
        if (sink) sink(stored);
    }
};

}  // namespace

GameMaster::GameMaster(llm::LlmProvider& provider, const retrieval::RuleStore& rules, llm::Embedder* embedder)
    : provider_(provider), rules_(rules), embedder_(embedder ? embedder : &provider) {}

std::vector<std::string> GameMaster::rule_texts(const Session& session, std::size_t pinned_from) const {
    const auto& cfg = session.config().prompt;
    if (rules_.size() == 0) return {};
    if (cfg.rule_injection == prompt::RuleInjection::Full) return rules_.sentences();

    std::vector<std::string> queries;
    const auto& history = session.history();
    if (cfg.rule_query_window == 0) {
        for (std::size_t i = pinned_from; i < history.size(); ++i) {
            if (history[i].kind == EventKind::PlayerMessage) queries.push_back(history[i].content);
        }
    } else {
        for (std::size_t i = history.size(); i-- > 0 && queries.size() < cfg.rule_query_window;) {
            if (history[i].kind == EventKind::PlayerMessage) queries.push_back(history[i].content);
        }
        std::reverse(queries.begin(), queries.end());
    }
    if (queries.empty()) queries = session.scene().scene_summary;
    if (queries.empty()) queries.push_back(session.scene().scene);
    return rules_.texts(retrieval::top_k_rules(rules_, queries, cfg.rule_k, *embedder_));
}

llm::PromptPackage GameMaster::gm_prompt(const Session& session, std::size_t pinned_from,
                                         const std::optional<ChatEvent>& ephemeral_summary) const {
    const auto& profile = session.profile();
    const auto& cfg = session.config();

    prompt::BuildInputs in;
    in.purpose = Purpose::Gm;
    in.system_instruction = cfg.system_instruction.empty() ? instructions::game_master() : cfg.system_instruction;
    in.rules = rule_texts(session, pinned_from);
    if (profile.states_in_prompt == StateExposure::EveryTurn || session.turns_completed() == 0) {
        in.state_block = state::render_state_block(session.scene(), session.players());
    }
    in.tools = functions::active_registry(profile);
    in.history = session.history();
    in.pinned_from = pinned_from;
    in.ephemeral_summary = ephemeral_summary;
    auto package = prompt::build_prompt(in, cfg.prompt, embedder_);
    package.context = {{"turn", session.current_turn()},
                       {"scene_id", session.scene_id()},
                       {"players", session.player_names()}};
    return package;
}

std::vector<ChatEvent> GameMaster::gm_turn(Session& session, const std::vector<PlayerInput>& messages,
                                           const EventSink& sink) {
    if (session.status() != Status::Running) throw SessionTerminated(session.status());
    ValidationErrors errors;
    if (messages.empty()) errors.push_back({"messages", "at least one player message is required"});
    const auto names = session.player_names();
    for (std::size_t i = 0; i < messages.size(); ++i) {
        if (std::find(names.begin(), names.end(), messages[i].player) == names.end()) {
            errors.push_back({"messages[" + std::to_string(i) + "].player", "unknown player " + messages[i].player});
        }
    }
    if (!errors.empty()) throw ValidationFailure(errors);

    std::vector<ChatEvent> out;
    Emitter emit{session, sink, out};
    session.begin_turn();
    session.failed_tests_last_turn = 0;
    const std::size_t pinned_from = session.history().size();
    for (const auto& m : messages) emit(llm::player_message(m.player, m.text));

    const auto& profile = session.profile();
    const int cap = session.config().max_calls_per_turn;
    const bool mutates = profile.state_update_mode == StateUpdateMode::ByFunctions;

    std::optional<ChatEvent> ephemeral;
    if (session.config().prompt.summarization == prompt::SummarizationMode::Always && pinned_from > 0) {
        ephemeral = prompt::summarize_events(std::span(session.history()).first(pinned_from), provider_);
    }

    functions::DispatchContext ctx{session.rng(), functions::sample_without_replacement, npc_generator()};
    int calls = 0;
    int texts = 0;
    bool narrated = false;
    try {
        while (true) {
            auto request = gm_prompt(session, pinned_from, ephemeral);
            const llm::ModelTurn reply = provider_.complete(request);
            if (const auto* call = std::get_if<FunctionCall>(&reply)) {
                if (calls >= cap) {
                    emit(llm::system_message("function call limit of " + std::to_string(cap) +
                                                 " reached; the turn ends here",
                                             {{"guard", "max_calls_per_turn"}}));
                    break;
                }
                ++calls;
                FunctionCall c = *call;
                c.call_id = "call_" + std::to_string(session.next_counter());
                emit(llm::function_call_message(c));
                if (!functions::is_active(profile, c.name)) {
                    const bool known = functions::find_function(c.name) != nullptr;
                    emit(llm::function_result_message(
                        c, known ? "Function " + c.name + " is not available in this game." : "Unknown function " + c.name + ".",
                        true, {{"diff", state::to_json(state::StateDiff{})}}));
                    continue;
                }
                auto result = functions::dispatch(c, session.scene(), session.players(), ctx);
                if (result.ok && mutates) session.apply(result.diff);
                if (result.test && !result.test->success) ++session.failed_tests_last_turn;
                Json detail = {{"diff", state::to_json(mutates ? result.diff : state::StateDiff{})}};
                if (result.test) detail["test"] = functions::to_json(*result.test);
                emit(llm::function_result_message(c, result.message, !result.ok, std::move(detail)));
                continue;
            }
            if (const auto* text = std::get_if<llm::TextTurn>(&reply)) {
                if (text->content.empty()) break;
                emit(llm::gm_message(text->content));
                narrated = true;
                ++texts;
                if (text->final) break;
                if (texts >= cap) {
                    emit(llm::system_message("narration limit of " + std::to_string(cap) +
                                                 " messages reached; the turn ends here",
                                             {{"guard", "max_calls_per_turn"}}));
                    break;
                }
                continue;
            }
            break;
        }
        if (narrated && profile.state_update_mode == StateUpdateMode::ByGeneration) {
            regenerate_states(session, pinned_from, sink);
        }
    } catch (const llm::ProviderError& e) {
        emit(llm::system_message(std::string("provider error: ") + e.what(), {{"warning", "provider_error"}}),
             false);
        session.end_turn();
        throw;
    }

    session.end_turn();
    if (session.config().clock_policy == ClockPolicy::EveryFailedTest) {
        for (int i = 0; i < session.failed_tests_last_turn; ++i) {
            advance_clock(session, ClockTrigger::FailedTest, [&](const ChatEvent& e) {
                out.push_back(e);
                if (sink) sink(e);
            });
        }
    }
    summarize_if_due(session);
    return out;
}

void GameMaster::summarize_if_due(Session& session) {
    auto update = prompt::maybe_summarize(session.history(), session.config().prompt, provider_, session.next_counter());
    if (!update) return;
    const ChatEvent& stored = session.append(update->summary, false);
    update->history.back() = stored;
    session.replace_history(std::move(update->history));
}

void GameMaster::regenerate_states(Session& session, std::size_t pinned_from, const EventSink& sink) {
    prompt::BuildInputs in;
    in.purpose = Purpose::StateRegen;
    in.system_instruction = instructions::state_regen();
    in.state_block = state::render_state_block(session.scene(), session.players());
    in.history = session.history();
    in.pinned_from = pinned_from;
    llm::PromptPackage request = prompt::build_prompt(in, auxiliary_config(session.config().prompt));
    request.context = {{"states", states_json(session.scene(), session.players())}};

    auto warn = [&](const std::string& why) {
        const ChatEvent& e = session.append(
            llm::system_message("state regeneration rejected: " + why, {{"warning", "state_regen"}}), false);
        if (sink) sink(e);
    };
    const auto text = reply_text(provider_.complete(request));
    if (!text) return warn("no states returned");
    const auto doc = extract_json(*text);
    if (!doc || !doc->is_object() || !doc->contains("scene") || !doc->contains("players")) {
        return warn("reply is not a {scene, players} object");
    }
    auto scene = state::scene_from_json(doc->at("scene"));
    auto players = state::players_from_json(doc->at("players"), "players");
    if (!scene || !players) {
        ValidationErrors all = scene.errors();
        all.insert(all.end(), players.errors().begin(), players.errors().end());
        return warn(describe(all));
    }
    state::StateDiff diff;
    try {
        diff = state::diff_states(session.scene(), session.players(), scene.value(), players.value());
    } catch (const state::RosterMismatch& e) {
        return warn(e.what());
    }
    session.set_states(scene.value(), players.value());
    const ChatEvent& e = session.append(
        llm::system_message("states regenerated", {{"state_regen", true}, {"diff", state::to_json(diff)}}), false);
    if (sink) sink(e);
}

const state::GameClock& GameMaster::advance_clock(Session& session, ClockTrigger trigger, const EventSink& sink) {
    if (session.status() != Status::Running) throw SessionTerminated(session.status());
    auto& clock = session.clock_mut();
    clock.advance();
    const std::string text = "clock advanced to " + std::to_string(clock.hours_elapsed) + "/" +
                             std::to_string(clock.limit) + " (" + std::string(trigger_name(trigger)) + ")";
    const ChatEvent& e = session.append(
        llm::system_message(text, {{"clock", state::to_json(clock)}, {"trigger", trigger_name(trigger)}}), false);
    if (sink) sink(e);
    return clock;
}

Outcome GameMaster::check_outcome(Session& session, const EventSink& sink) {
    switch (session.status()) {
        case Status::Success: return Outcome::Success;
        case Status::Failure: return Outcome::Failure;
        case Status::Running: break;
    }
    if (session.clock().at_limit()) {
        session.finish(Status::Failure, "clock");
        return Outcome::Failure;
    }
    auto warn = [&](const std::string& why) {
        const ChatEvent& e =
            session.append(llm::system_message("outcome check: " + why, {{"warning", "judge"}}), false);
        if (sink) sink(e);
        return Outcome::Continue;
    };

    const auto& scene = session.scene();
    prompt::BuildInputs in;
    in.purpose = Purpose::Judge;
    in.system_instruction = instructions::judge();
    in.state_block = "[SUCCESS CONDITION]\n" + scene.success_condition + "\n[FAILURE CONDITION]\n" +
                     scene.failure_condition + "\n[CLOCK]\n" + std::to_string(session.clock().hours_elapsed) + "/" +
                     std::to_string(session.clock().limit);
    in.history = session.history();
    in.pinned_from = session.history().size();

    std::optional<std::string> text;
    try {
        llm::PromptPackage request = prompt::build_prompt(in, auxiliary_config(session.config().prompt));
        request.context = {{"turns_completed", session.turns_completed()},
                           {"failed_tests", session.failed_tests_last_turn},
                           {"success_condition", scene.success_condition},
                           {"failure_condition", scene.failure_condition},
                           {"clock", state::to_json(session.clock())}};
        text = reply_text(provider_.complete(request));
    } catch (const llm::ProviderError& e) {
        return warn(std::string("provider error: ") + e.what());
    } catch (const prompt::BudgetTooSmall& e) {
        return warn(e.what());
    }
    if (!text) return warn("judge gave no verdict");

    std::string verdict;
    bool advance = false;
    if (auto doc = extract_json(*text); doc && doc->is_object() && doc->contains("outcome") &&
                                        doc->at("outcome").is_string()) {
        verdict = first_word(doc->at("outcome").get<std::string>());
        const auto it = doc->find("advance_clock");
        advance = it != doc->end() && it->is_boolean() && it->get<bool>();
    } else {
        verdict = first_word(*text);
    }
    if (verdict == "yes") verdict = "success";
    if (verdict != "success" && verdict != "failure" && verdict != "continue" && verdict != "no") {
        return warn("ambiguous verdict: " + text->substr(0, 200));
    }

    if (advance && session.config().clock_policy == ClockPolicy::JudgeConfirmed) {
        advance_clock(session, ClockTrigger::FailedTest, sink);
    }
    if (verdict == "success") {
        session.finish(Status::Success, "judge");
        return Outcome::Success;
    }
    if (verdict == "failure") {
        advance_clock(session, ClockTrigger::SceneFailure, sink);
        session.finish(Status::Failure, "judge");
        return Outcome::Failure;
    }
    if (session.clock().at_limit()) {
        session.finish(Status::Failure, "clock");
        return Outcome::Failure;
    }
    return Outcome::Continue;
}

functions::NpcGenerator GameMaster::npc_generator() {
    return [this](std::string_view name, std::string_view context,
                  const state::SceneState& scene) -> std::optional<state::NpcSpec> {
        llm::PromptPackage request;
        request.purpose = Purpose::NpcGen;
        request.system_instruction = instructions::npc_gen();
        request.state_block = state::render_scene_block(scene);
        request.messages.push_back(
            llm::system_message("Name: " + std::string(name) + "\nContext: " + std::string(context)));
        request.token_estimate = llm::estimate_tokens(llm::render_system_text(request)) +
                                 llm::estimate_tokens(request.messages.front());
        request.context = {{"name", name}, {"context", context}};
        try {
            const auto text = reply_text(provider_.complete(request));
            if (!text) return std::nullopt;
            const auto doc = extract_json(*text);
            if (!doc) return std::nullopt;
            auto npc = state::npc_from_json(*doc, "npc");
            if (!npc) return std::nullopt;
            return npc.value();
        } catch (const llm::ProviderError&) {
            return std::nullopt;
        }
    };
}

std::optional<std::string> ScriptedAgent::next_message(const Session&, const std::string&, int) {
    if (lines_.empty()) return std::nullopt;
    std::string line = std::move(lines_.front());
    lines_.pop_front();
    return line;
}

std::optional<std::string> ProviderAgent::next_message(const Session& session, const std::string& player, int turn) {
    const auto& players = session.players();
    const auto* me = state::find_player(std::span<const state::PlayerState>(players), player);
    if (!me) throw Error("unknown player " + player);
    prompt::BuildInputs in;
    in.purpose = Purpose::PlayerAgent;
    in.system_instruction = instructions::player_agent();
    in.state_block = state::render_player_block(*me);
    in.history = session.history();
    in.pinned_from = session.history().size();
    llm::PromptPackage request = prompt::build_prompt(in, auxiliary_config(session.config().prompt));
    request.context = {{"player", player}, {"turn", turn}};
    auto text = reply_text(provider_.complete(request));
    if (!text) return std::nullopt;
    const auto first = text->find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return std::nullopt;
    const auto last = text->find_last_not_of(" \t\r\n");
    return text->substr(first, last - first + 1);
}

std::string run_scene(GameMaster& gm, Session& session, std::span<PlayerAgent* const> agents, const EventSink& sink) {
    const auto names = session.player_names();
    if (agents.empty() || (agents.size() != 1 && agents.size() != names.size())) {
        throw ValidationFailure({{"agents", "need one agent, or one per player (" + std::to_string(names.size()) + ")"}});
    }
    std::string reason;
    while (session.status() == Status::Running) {
        if (session.turns_completed() >= session.config().max_turns) {
            reason = "max_turns";
            break;
        }
        const int turn = session.turns_completed() + 1;
        std::vector<PlayerInput> inputs;
        try {
            for (std::size_t i = 0; i < names.size(); ++i) {
                PlayerAgent* agent = agents.size() == 1 ? agents[0] : agents[i];
                if (auto line = agent->next_message(session, names[i], turn)) inputs.push_back({names[i], *line});
            }
        } catch (const std::exception& e) {
            const ChatEvent& ev = session.append(
                llm::system_message(std::string("player agent failed: ") + e.what(), {{"warning", "agent_failure"}}),
                false);
            if (sink) sink(ev);
            reason = "agent_failure";
            break;
        }
        if (inputs.empty()) {
            reason = "agents_exhausted";
            break;
        }
        gm.gm_turn(session, inputs, sink);
        gm.check_outcome(session, sink);
    }
    if (session.status() != Status::Running) {
        reason = session.end_reason();
    } else {
        session.set_end_reason(reason);
    }
    return reason;
}

}  // namespace labyrinth::engine
