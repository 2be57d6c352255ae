// SPDX-License-Identifier: Apache-2.0
#include "labyrinth/prompt/builder.hpp"

#include "labyrinth/retrieval/rules.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace labyrinth::prompt {

namespace {

using llm::EventKind;

constexpr std::string_view kSummaryInstruction =
    "You keep the chronicle of a tabletop game session. Summarize the events below in a few sentences. "
    "Keep character names, items, decisions, test outcomes and anything left unresolved.";

template <typename E>
std::optional<E> parse_enum(const Json& v, std::initializer_list<std::pair<std::string_view, E>> names) {
    if (!v.is_string()) return std::nullopt;
    for (const auto& [n, e] : names) {
        if (v.get<std::string>() == n) return e;
    }
    return std::nullopt;
}

struct Unit {
    std::size_t first;
    std::size_t last;
    std::size_t cost = 0;
    bool summary = false;
    std::size_t count() const { return last - first + 1; }
};

std::vector<Unit> make_units(std::span<const ChatEvent> events) {
    std::vector<Unit> out;
    for (auto [first, last] : atomic_units(events)) {
        Unit u{first, last};
        for (std::size_t i = first; i <= last; ++i) u.cost += llm::estimate_tokens(events[i]);
        u.summary = first == last && events[first].kind == EventKind::SummaryMsg;
        out.push_back(u);
    }
    return out;
}

}  // namespace

ValidationErrors PromptConfig::validate() const {
    ValidationErrors errors;
    if (retrieval_k < 1) errors.push_back({"retrieval_k", "must be at least 1"});
    if (max_messages && *max_messages < 1) errors.push_back({"max_messages", "must be at least 1 when set"});
    if (summary_period < 1) errors.push_back({"summary_period", "must be at least 1"});
    if (rule_k < 1) errors.push_back({"rule_k", "must be at least 1"});
    if (context_budget < 1) errors.push_back({"context_budget", "must be positive"});
    return errors;
}

Json to_json(const PromptConfig& c) {
    return {
        {"concat_mode", c.concat_mode == ConcatMode::Simple ? "simple" : "retrieval"},
        {"retrieval_k", c.retrieval_k},
        {"max_messages", c.max_messages ? Json(*c.max_messages) : Json()},
        {"summarization", c.summarization == SummarizationMode::Off        ? "off"
                          : c.summarization == SummarizationMode::Periodic ? "periodic"
                                                                           : "always"},
        {"summary_period", c.summary_period},
        {"keep_raw_after_summary", c.keep_raw_after_summary},
        {"rule_injection", c.rule_injection == RuleInjection::Full ? "full" : "top_k"},
        {"rule_k", c.rule_k},
        {"rule_query_window", c.rule_query_window},
        {"context_budget", c.context_budget},
    };
}

Checked<PromptConfig> prompt_config_from_json(const Json& doc) {
    if (!doc.is_object()) return ValidationErrors{{"", "prompt config must be an object"}};
    PromptConfig c;
    ValidationErrors errors;
    auto positive = [&](const char* key, auto& out) {
        if (!doc.contains(key)) return;
        const Json& v = doc[key];
        if (!v.is_number_integer() || v.get<long long>() < 0) {
            errors.push_back({key, "must be a non-negative integer"});
            return;
        }
        out = v.get<std::remove_reference_t<decltype(out)>>();
    };
    for (const auto& [key, value] : doc.items()) {
        if (key == "concat_mode") {
            auto m = parse_enum<ConcatMode>(value, {{"simple", ConcatMode::Simple}, {"retrieval", ConcatMode::Retrieval}});
            m ? void(c.concat_mode = *m) : errors.push_back({key, "expected simple or retrieval"});
        } else if (key == "summarization") {
            auto m = parse_enum<SummarizationMode>(value, {{"off", SummarizationMode::Off},
                                                           {"periodic", SummarizationMode::Periodic},
                                                           {"always", SummarizationMode::Always}});
            m ? void(c.summarization = *m) : errors.push_back({key, "expected off, periodic or always"});
        } else if (key == "rule_injection") {
            auto m = parse_enum<RuleInjection>(value, {{"full", RuleInjection::Full}, {"top_k", RuleInjection::TopK}});
            m ? void(c.rule_injection = *m) : errors.push_back({key, "expected full or top_k"});
        } else if (key == "keep_raw_after_summary") {
            value.is_boolean() ? void(c.keep_raw_after_summary = value.get<bool>())
                               : errors.push_back({key, "must be a boolean"});
        } else if (key == "max_messages") {
            if (value.is_null()) {
                c.max_messages.reset();
            } else if (value.is_number_integer() && value.get<long long>() >= 0) {
                c.max_messages = value.get<std::size_t>();
            } else {
                errors.push_back({key, "must be null or a non-negative integer"});
            }
        } else if (key == "retrieval_k") {
            positive("retrieval_k", c.retrieval_k);
        } else if (key == "summary_period") {
            positive("summary_period", c.summary_period);
        } else if (key == "rule_k") {
            positive("rule_k", c.rule_k);
        } else if (key == "rule_query_window") {
            positive("rule_query_window", c.rule_query_window);
        } else if (key == "context_budget") {
            positive("context_budget", c.context_budget);
        } else {
            errors.push_back({key, "unknown field"});
        }
    }
    if (errors.empty()) errors = c.validate();
    if (!errors.empty()) return errors;
    return c;
}

BudgetTooSmall::BudgetTooSmall(std::size_t mandatory, std::size_t budget)
    : Error("context budget of " + std::to_string(budget) + " tokens cannot hold the " + std::to_string(mandatory) +
            " tokens of instruction, rules, states, tools and current turn") {}

std::string event_text(const ChatEvent& event) {
    std::string out = event.speaker + ": " + event.content;
    if (event.call) out += " " + event.call->name + " " + event.call->arguments.dump();
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> atomic_units(std::span<const ChatEvent> events) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::size_t i = 0;
    while (i < events.size()) {
        std::size_t last = i;
        // Extend until every call inside the unit has its result inside too.
        for (std::size_t j = i; j <= last && j < events.size(); ++j) {
            const ChatEvent& e = events[j];
            if (e.kind != EventKind::FunctionCallMsg || !e.call) continue;
            for (std::size_t r = j + 1; r < events.size(); ++r) {
                if (events[r].kind == EventKind::FunctionResultMsg && events[r].call_id == e.call->call_id) {
                    last = std::max(last, r);
                    break;
                }
            }
        }
        out.emplace_back(i, last);
        i = last + 1;
    }
    return out;
}

llm::PromptPackage build_prompt(const BuildInputs& in, const PromptConfig& config, llm::Embedder* embedder) {
    llm::PromptPackage pkg;
    pkg.purpose = in.purpose;
    pkg.system_instruction = in.system_instruction;
    pkg.rules = in.rules;
    pkg.state_block = in.state_block;
    pkg.tool_specs = in.tools;

    const std::size_t pinned_from = std::min(in.pinned_from, in.history.size());
    const auto older = in.history.first(pinned_from);
    const auto pinned = in.history.subspan(pinned_from);

    std::size_t mandatory = llm::estimate_tokens(in.system_instruction);
    for (const auto& r : in.rules) mandatory += llm::estimate_tokens(r);
    if (in.state_block) mandatory += llm::estimate_tokens(*in.state_block);
    for (const auto& t : in.tools) mandatory += llm::estimate_tokens(t);
    for (const auto& e : pinned) mandatory += llm::estimate_tokens(e);
    if (mandatory > config.context_budget) throw BudgetTooSmall(mandatory, config.context_budget);
    std::size_t left = config.context_budget - mandatory;
    std::size_t used = 0;

    std::vector<ChatEvent> kept;
    if (config.summarization == SummarizationMode::Always) {
        if (in.ephemeral_summary && llm::estimate_tokens(*in.ephemeral_summary) <= left) {
            used += llm::estimate_tokens(*in.ephemeral_summary);
            kept.push_back(*in.ephemeral_summary);
        }
    } else {
        const std::vector<Unit> units = make_units(older);
        const std::size_t cap = config.max_messages.value_or(std::numeric_limits<std::size_t>::max());
        std::vector<bool> keep(units.size(), false);

        std::vector<std::string> queries = in.queries;
        if (queries.empty()) {
            for (const auto& e : pinned) {
                if (e.kind == EventKind::PlayerMessage) queries.push_back(e.content);
            }
        }
        if (queries.empty()) {
            auto last = std::find_if(older.rbegin(), older.rend(),
                                     [](const ChatEvent& e) { return e.kind == EventKind::PlayerMessage; });
            if (last != older.rend()) queries.push_back(last->content);
        }
        if (config.concat_mode == ConcatMode::Retrieval && !queries.empty() && !units.empty()) {
            if (!embedder) throw Error("retrieval concatenation needs an embedder");
            std::vector<std::string> texts;
            for (const auto& u : units) {
                std::string t;
                for (std::size_t i = u.first; i <= u.last; ++i) t += (t.empty() ? "" : "\n") + event_text(older[i]);
                texts.push_back(std::move(t));
            }
            const auto scores = retrieval::max_pooled_scores(embedder->embed(texts), embedder->embed(queries));
            const std::size_t limit = std::min(config.retrieval_k, cap);
            std::size_t count = 0;
            for (const auto& s : retrieval::top_k(scores, units.size()).ranked) {
                const Unit& u = units[s.id];
                if (count + u.count() > limit || u.cost > left) continue;
                keep[s.id] = true;
                count += u.count();
                left -= u.cost;
                used += u.cost;
            }
        } else {
            // Summaries outrank raw messages; when even they overflow, the oldest go first.
            std::size_t summary_cost = 0;
            for (std::size_t i = 0; i < units.size(); ++i) {
                if (!units[i].summary) continue;
                keep[i] = true;
                summary_cost += units[i].cost;
            }
            for (std::size_t i = 0; i < units.size() && summary_cost > left; ++i) {
                if (!units[i].summary) continue;
                keep[i] = false;
                summary_cost -= units[i].cost;
            }
            left -= summary_cost;
            used += summary_cost;
            std::size_t count = 0;
            for (std::size_t i = units.size(); i-- > 0;) {
                const Unit& u = units[i];
                if (u.summary) continue;
                if (u.cost > left || count + u.count() > cap) break;
                keep[i] = true;
                count += u.count();
                left -= u.cost;
                used += u.cost;
            }
        }
        for (std::size_t i = 0; i < units.size(); ++i) {
            if (!keep[i]) continue;
            for (std::size_t j = units[i].first; j <= units[i].last; ++j) kept.push_back(older[j]);
        }
    }
    pkg.messages = std::move(kept);
    pkg.messages.insert(pkg.messages.end(), pinned.begin(), pinned.end());
    pkg.token_estimate = mandatory + used;
    return pkg;
}

std::optional<ChatEvent> summarize_events(std::span<const ChatEvent> events, llm::LlmProvider& provider) {
    if (events.empty()) return std::nullopt;
    llm::PromptPackage p;
    p.purpose = llm::Purpose::Summarize;
    p.system_instruction = std::string(kSummaryInstruction);
    p.messages.assign(events.begin(), events.end());
    for (const auto& e : p.messages) p.token_estimate += llm::estimate_tokens(e);
    llm::ModelTurn reply;
    try {
        reply = provider.complete(p);
    } catch (const llm::ProviderError&) {
        return std::nullopt;
    }
    const auto* text = std::get_if<llm::TextTurn>(&reply);
    if (!text || text->content.empty()) return std::nullopt;
    return llm::summary_message(text->content, events.front().counter, events.back().counter);
}

std::optional<SummaryUpdate> maybe_summarize(std::span<const ChatEvent> history, const PromptConfig& config,
                                             llm::LlmProvider& provider, std::uint64_t counter) {
    if (config.summarization != SummarizationMode::Periodic) return std::nullopt;
    std::size_t start = 0;
    for (std::size_t i = history.size(); i-- > 0;) {
        if (history[i].kind == EventKind::SummaryMsg) {
            start = i + 1;
            break;
        }
    }
    const auto pending = history.subspan(start);
    std::set<int> turns;
    for (const auto& e : pending) {
        if (e.kind == EventKind::PlayerMessage) turns.insert(e.turn);
    }
    if (turns.size() < static_cast<std::size_t>(config.summary_period)) return std::nullopt;

    std::vector<ChatEvent> input;
    if (start > 0) input.push_back(history[start - 1]);
    input.insert(input.end(), pending.begin(), pending.end());
    auto summary = summarize_events(input, provider);
    if (!summary) return std::nullopt;
    summary->covers = std::make_pair(pending.front().counter, pending.back().counter);
    summary->counter = counter;
    summary->turn = pending.back().turn;

    SummaryUpdate update;
    update.summary = *summary;
    const auto retained = config.keep_raw_after_summary ? history : history.first(start);
    update.history.assign(retained.begin(), retained.end());
    update.history.push_back(*summary);
    return update;
}

}  // namespace labyrinth::prompt
