// SPDX-License-Identifier: Apache-2.0
#include "labyrinth/llm/scripted.hpp"
#include "labyrinth/prompt/builder.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>

namespace labyrinth::prompt {
namespace {

using llm::EventKind;

// "GM" costs one token and "abcd" one more.
std::vector<ChatEvent> numbered_gm_messages(std::size_t n) {
    std::vector<ChatEvent> out;
    for (std::size_t i = 1; i <= n; ++i) {
        auto e = llm::gm_message("m" + std::string(i < 10 ? "00" : "0") + std::to_string(i));
        e.counter = i;
        e.turn = static_cast<int>(i);
        out.push_back(e);
    }
    return out;
}

std::vector<std::uint64_t> counters(const llm::PromptPackage& p) {
    std::vector<std::uint64_t> out;
    for (const auto& e : p.messages) out.push_back(e.counter);
    return out;
}

BuildInputs inputs_for(const std::vector<ChatEvent>& history) {
    BuildInputs in;
    in.system_instruction = "abcdefgh";  // two tokens
    in.history = history;
    in.pinned_from = history.size();
    return in;
}

TEST(BuildPrompt, DropsLeastRecentFirst) {
    const auto history = numbered_gm_messages(10);
    PromptConfig config;
    config.context_budget = 2 + 6 * 2;
    const auto p = build_prompt(inputs_for(history), config);
    EXPECT_EQ(counters(p), (std::vector<std::uint64_t>{5, 6, 7, 8, 9, 10}));
    EXPECT_EQ(p.token_estimate, 14u);
}

TEST(BuildPrompt, MaxMessagesCap) {
    const auto history = numbered_gm_messages(10);
    PromptConfig config;
    config.max_messages = 3;
    EXPECT_EQ(counters(build_prompt(inputs_for(history), config)), (std::vector<std::uint64_t>{8, 9, 10}));
}

TEST(BuildPrompt, MandatoryPartsMustFit) {
    const auto history = numbered_gm_messages(2);
    BuildInputs in = inputs_for(history);
    in.rules = {"rule one is long enough"};
    in.state_block = "[SCENE STATE]";
    PromptConfig config;
    config.context_budget = 5;
    EXPECT_THROW(build_prompt(in, config), BudgetTooSmall);
    config.context_budget = 2 + 6 + 4;
    const auto p = build_prompt(in, config);
    EXPECT_TRUE(p.messages.empty());
    EXPECT_EQ(p.rules, in.rules);
    EXPECT_EQ(p.state_block, in.state_block);
}

TEST(BuildPrompt, PinnedEventsAlwaysIncluded) {
    auto history = numbered_gm_messages(6);
    BuildInputs in = inputs_for(history);
    in.pinned_from = 4;
    PromptConfig config;
    config.context_budget = 2 + 3 * 2;
    EXPECT_EQ(counters(build_prompt(in, config)), (std::vector<std::uint64_t>{4, 5, 6}));
    config.max_messages = 2;
    config.context_budget = 100;
    EXPECT_EQ(counters(build_prompt(in, config)), (std::vector<std::uint64_t>{3, 4, 5, 6}));
}

TEST(BuildPrompt, RetrievalKeepsMostSimilarInOrder) {
    const auto history = numbered_gm_messages(10);
    llm::ScriptedProvider embedder;
    for (const auto& e : history) embedder.add_embedding(event_text(e), {0.0, 1.0, 0.0});
    embedder.add_embedding(event_text(history[6]), {1.0, 0.1, 0.0});
    embedder.add_embedding(event_text(history[1]), {1.0, 0.2, 0.0});
    embedder.add_embedding("where is the key", {1.0, 0.0, 0.0});
    BuildInputs in = inputs_for(history);
    in.queries = {"where is the key"};
    PromptConfig config;
    config.concat_mode = ConcatMode::Retrieval;
    config.retrieval_k = 2;
    EXPECT_EQ(counters(build_prompt(in, config, &embedder)), (std::vector<std::uint64_t>{2, 7}));
    EXPECT_THROW(build_prompt(in, config), Error);
}

TEST(BuildPrompt, CallResultPairsStayTogether) {
    functions::FunctionCall call{"add_object", {{"name", "Lamp"}, {"description", "Bright"}}, "call_2"};
    std::vector<ChatEvent> history = {llm::player_message("Jake", "I look."), llm::function_call_message(call),
                                      llm::function_result_message(call, "Added Lamp.", false),
                                      llm::gm_message("A lamp.")};
    for (std::size_t i = 0; i < history.size(); ++i) history[i].counter = i + 1;
    const auto units = atomic_units(history);
    ASSERT_EQ(units.size(), 3u);
    EXPECT_EQ(units[1], std::make_pair(std::size_t{1}, std::size_t{2}));

    BuildInputs in = inputs_for(history);
    PromptConfig config;
    // Room for the GM message and the result but not for the call too.
    config.context_budget = 2 + llm::estimate_tokens(history[3]) + llm::estimate_tokens(history[2]);
    EXPECT_EQ(counters(build_prompt(in, config)), (std::vector<std::uint64_t>{4}));
    config.max_messages = 2;
    config.context_budget = 1000;
    EXPECT_EQ(counters(build_prompt(in, config)), (std::vector<std::uint64_t>{4}));
    config.max_messages = 3;
    EXPECT_EQ(counters(build_prompt(in, config)), (std::vector<std::uint64_t>{2, 3, 4}));
}

TEST(BuildPrompt, SummariesOutliveOldMessages) {
    auto history = numbered_gm_messages(6);
    auto s1 = llm::summary_message("abcd", 1, 2);  // "system" + "abcd" = 3 tokens
    s1.counter = 7;
    auto s2 = llm::summary_message("efgh", 3, 3);
    s2.counter = 8;
    history.insert(history.begin() + 2, s1);
    history.insert(history.begin() + 4, s2);
    PromptConfig config;
    config.context_budget = 2 + 3 + 3 + 2 * 2;
    EXPECT_EQ(counters(build_prompt(inputs_for(history), config)), (std::vector<std::uint64_t>{7, 8, 5, 6}));
    config.context_budget = 2 + 3;
    EXPECT_EQ(counters(build_prompt(inputs_for(history), config)), (std::vector<std::uint64_t>{8}));
}

TEST(BuildPrompt, AlwaysModeUsesOnlySummaryAndCurrentTurn) {
    auto history = numbered_gm_messages(5);
    BuildInputs in = inputs_for(history);
    in.pinned_from = 4;
    auto summary = llm::summary_message("the story so far", 1, 4);
    in.ephemeral_summary = summary;
    PromptConfig config;
    config.summarization = SummarizationMode::Always;
    config.max_messages = 1;
    const auto p = build_prompt(in, config);
    ASSERT_EQ(p.messages.size(), 2u);
    EXPECT_EQ(p.messages[0].kind, EventKind::SummaryMsg);
    EXPECT_EQ(p.messages[1].counter, 5u);
}

TEST(PromptConfig, JsonRoundTripAndErrors) {
    PromptConfig c;
    c.concat_mode = ConcatMode::Retrieval;
    c.max_messages = 12;
    c.summarization = SummarizationMode::Periodic;
    c.summary_period = 2;
    c.rule_injection = RuleInjection::Full;
    EXPECT_EQ(prompt_config_from_json(to_json(c)).value(), c);
    EXPECT_EQ(prompt_config_from_json(Json::object()).value(), PromptConfig{});
    const auto bad = prompt_config_from_json({{"summary_period", 0}, {"concat_mode", "fancy"}, {"mystery", 1}});
    ASSERT_FALSE(bad.ok());
    EXPECT_EQ(bad.errors().size(), 2u);
    EXPECT_FALSE(prompt_config_from_json({{"summary_period", 0}}).ok());
}

std::vector<ChatEvent> two_turns() {
    std::vector<ChatEvent> h = {llm::player_message("Jake", "I open the door."), llm::gm_message("It creaks."),
                                llm::player_message("Jake", "I step inside."), llm::gm_message("It is dark.")};
    for (std::size_t i = 0; i < h.size(); ++i) {
        h[i].counter = i + 1;
        h[i].turn = static_cast<int>(i / 2 + 1);
    }
    return h;
}

TEST(MaybeSummarize, FiresAfterPeriod) {
    auto history = two_turns();
    llm::ScriptedProvider provider({llm::TextTurn{"SUMMARY-1"}});
    PromptConfig config;
    config.summarization = SummarizationMode::Periodic;
    config.summary_period = 2;
    EXPECT_FALSE(maybe_summarize(std::span(history).first(2), config, provider, 3));
    const auto update = maybe_summarize(history, config, provider, 5);
    ASSERT_TRUE(update);
    EXPECT_EQ(update->summary.content, "SUMMARY-1");
    EXPECT_EQ(update->summary.covers, std::make_pair(std::uint64_t{1}, std::uint64_t{4}));
    EXPECT_EQ(update->summary.counter, 5u);
    ASSERT_EQ(update->history.size(), 5u);
    EXPECT_EQ(update->history.back().kind, EventKind::SummaryMsg);
    EXPECT_EQ(provider.prompts_for(llm::Purpose::Summarize).size(), 1u);
}

TEST(MaybeSummarize, ReplacesRawMessages) {
    auto history = two_turns();
    auto older = llm::summary_message("before", 0, 0);
    history.insert(history.begin(), older);
    llm::ScriptedProvider provider({llm::TextTurn{"SUMMARY-2"}});
    PromptConfig config;
    config.summarization = SummarizationMode::Periodic;
    config.summary_period = 2;
    config.keep_raw_after_summary = false;
    const auto update = maybe_summarize(history, config, provider, 9);
    ASSERT_TRUE(update);
    ASSERT_EQ(update->history.size(), 2u);
    EXPECT_EQ(update->history[0].content, "before");
    EXPECT_EQ(update->history[1].content, "SUMMARY-2");
    // The previous summary is passed along as context.
    EXPECT_EQ(provider.prompts()[0].messages.front().content, "before");
}

TEST(MaybeSummarize, SuccessiveRangesAreContiguous) {
    auto history = two_turns();
    llm::ScriptedProvider provider({llm::TextTurn{"S1"}, llm::TextTurn{"S2"}});
    PromptConfig config;
    config.summarization = SummarizationMode::Periodic;
    config.summary_period = 1;
    auto first = maybe_summarize(std::span(history).first(2), config, provider, 10);
    ASSERT_TRUE(first);
    auto h = first->history;
    h.push_back(history[2]);
    h.push_back(history[3]);
    auto second = maybe_summarize(h, config, provider, 11);
    ASSERT_TRUE(second);
    EXPECT_EQ(first->summary.covers->second + 1, second->summary.covers->first);
}

TEST(MaybeSummarize, OffAlwaysAndFailures) {
    auto history = two_turns();
    llm::ScriptedProvider provider({llm::TextTurn{"S"}});
    PromptConfig config;
    EXPECT_FALSE(maybe_summarize(history, config, provider, 5));
    config.summarization = SummarizationMode::Always;
    EXPECT_FALSE(maybe_summarize(history, config, provider, 5));
    config.summarization = SummarizationMode::Periodic;
    config.summary_period = 1;
    provider.inject_failure(llm::Purpose::Summarize);
    EXPECT_FALSE(maybe_summarize(history, config, provider, 5));
    llm::ScriptedProvider silent;
    EXPECT_FALSE(maybe_summarize(history, config, silent, 5));
    EXPECT_EQ(provider.prompts().size(), 1u);
    EXPECT_FALSE(summarize_events({}, provider));
}

// Fuzzed invariants.

std::size_t recount(const llm::PromptPackage& p) {
    std::size_t n = llm::estimate_tokens(p.system_instruction);
    for (const auto& r : p.rules) n += llm::estimate_tokens(r);
    if (p.state_block) n += llm::estimate_tokens(*p.state_block);
    for (const auto& t : p.tool_specs) n += llm::estimate_tokens(t);
    for (const auto& e : p.messages) n += llm::estimate_tokens(e);
    return n;
}

TEST(BuildPromptProperties, BudgetContiguityAndPairs) {
    testing::Generator gen(77);
    llm::ScriptedProvider embedder;
    int built = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto history = gen.history(1 + gen.below(12));
        BuildInputs in;
        in.system_instruction = gen.long_text();
        if (gen.coin()) in.rules = {gen.long_text(), gen.long_text()};
        if (gen.coin()) in.state_block = gen.long_text();
        if (gen.coin()) in.tools = {functions::all_functions()[gen.below(14)]};
        in.history = history;
        std::size_t last_player = 0;
        for (std::size_t i = 0; i < history.size(); ++i) {
            if (history[i].kind == EventKind::PlayerMessage && (i == 0 || history[i - 1].kind != EventKind::PlayerMessage)) {
                last_player = i;
            }
        }
        in.pinned_from = gen.coin() ? last_player : history.size();
        PromptConfig config;
        config.concat_mode = gen.coin() ? ConcatMode::Simple : ConcatMode::Retrieval;
        config.retrieval_k = 1 + gen.below(10);
        if (gen.coin()) config.max_messages = 1 + gen.below(15);
        config.context_budget = 10 + gen.below(400);
        llm::PromptPackage p;
        try {
            p = build_prompt(in, config, &embedder);
        } catch (const BudgetTooSmall&) {
            continue;
        }
        ++built;
        ASSERT_LE(p.token_estimate, config.context_budget);
        ASSERT_EQ(p.token_estimate, recount(p));

        // Pinned events come last, in order.
        const std::size_t pinned = history.size() - in.pinned_from;
        ASSERT_GE(p.messages.size(), pinned);
        for (std::size_t i = 0; i < pinned; ++i) {
            EXPECT_EQ(p.messages[p.messages.size() - pinned + i], history[in.pinned_from + i]);
        }

        // Chronological order, and no half of a call/result pair.
        std::vector<std::uint64_t> kept;
        for (const auto& e : p.messages) kept.push_back(e.counter);
        EXPECT_TRUE(std::is_sorted(kept.begin(), kept.end()));
        auto has = [&](std::uint64_t c) { return std::binary_search(kept.begin(), kept.end(), c); };
        for (std::size_t i = 0; i < history.size(); ++i) {
            if (history[i].kind == EventKind::FunctionCallMsg) {
                EXPECT_EQ(has(history[i].counter), has(history[i + 1].counter)) << "trial " << trial;
            }
        }

        if (config.concat_mode == ConcatMode::Simple) {
            // Kept non-summary history is a contiguous suffix of the non-summary history.
            std::vector<std::uint64_t> raw;
            for (std::size_t i = 0; i < in.pinned_from; ++i) {
                if (history[i].kind != EventKind::SummaryMsg) raw.push_back(history[i].counter);
            }
            std::vector<std::uint64_t> raw_kept;
            for (auto c : kept) {
                if (std::find(raw.begin(), raw.end(), c) != raw.end()) raw_kept.push_back(c);
            }
            ASSERT_LE(raw_kept.size(), raw.size());
            EXPECT_TRUE(std::equal(raw_kept.begin(), raw_kept.end(), raw.end() - raw_kept.size())) << "trial " << trial;
            if (config.max_messages) EXPECT_LE(raw_kept.size(), *config.max_messages);
        } else {
            std::size_t history_kept = p.messages.size() - pinned;
            EXPECT_LE(history_kept, config.retrieval_k);
        }
    }
    EXPECT_GT(built, 600);
}

}  // namespace
}  // namespace labyrinth::prompt
