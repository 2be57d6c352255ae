// SPDX-License-Identifier: Apache-2.0
//
// Fixtures and random generators shared by the unit and acceptance suites.
#pragma once

#include "labyrinth/functions/random.hpp"
#include "labyrinth/llm/chat.hpp"
#include "labyrinth/state/game_state.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace labyrinth::testing {

using state::NpcSpec;
using state::PlayerState;
using state::SceneState;

inline std::string data_dir() { return LABYRINTH_DATA_DIR; }

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Replays a fixed list of faces / indices; throws when exhausted.
class FixedRandom final : public functions::RandomSource {
public:
    explicit FixedRandom(std::vector<int> faces, std::vector<std::size_t> indices = {})
        : faces_(std::move(faces)), indices_(std::move(indices)) {}

    int roll_d6() override {
        if (next_face_ >= faces_.size()) throw std::runtime_error("FixedRandom: out of faces");
        return faces_[next_face_++];
    }
    std::size_t uniform_index(std::size_t n) override {
        if (next_index_ >= indices_.size()) throw std::runtime_error("FixedRandom: out of indices");
        return indices_[next_index_++] % n;
    }
    std::size_t faces_used() const { return next_face_; }

private:
    std::vector<int> faces_;
    std::vector<std::size_t> indices_;
    std::size_t next_face_ = 0;
    std::size_t next_index_ = 0;
};

inline SceneState goblin_market() {
    SceneState s;
    s.chapter = "The Outer Ring";
    s.scene = "Goblin Market";
    s.scene_summary = {"A crowded bazaar sprawls under a crooked sky.",
                       "Every stall keeper wants something in trade."};
    s.npcs["Grizzlebeak"] = {"Goblin", "A haggling stall keeper with a squeaky voice.",
                             "Sell a cursed lantern to anyone.", "Persuasive", "Greedy"};
    s.npcs["Mossy Tom"] = {"Dwarf", "A grumpy gardener pruning hedges.", "Keep visitors off his roses.",
                           "Stubborn", "Short-sighted"};
    s.success_condition = "The party trades for the map of the inner walls.";
    s.failure_condition = "The party is chased out of the market.";
    s.game_flow = {"The party arrives at the market gate.", "A stall keeper offers a suspicious deal.",
                   "The party must bargain or sneak to get the map."};
    s.environment["Creaky cart"] = "A cart piled with rotten turnips.";
    s.environment["Lantern stall"] = "A booth hung with lanterns that whisper.";
    s.random_tables["Sounds"] = {"A goat bleats.", "Bells jingle.", "Someone shouts 'Bargain!'",
                                 "A kettle whistles.", "Thunder rumbles far away."};
    s.random_tables["Market oddities"] = {"Sleeping gas canister", "Talking teapot"};
    s.consequences = "The map leads the party toward the Hedge Maze.";
    return s;
}

inline PlayerState jake() {
    PlayerState p;
    p.name = "Jake";
    p.kin = "Human";
    p.goal = "Find his lost little brother.";
    p.traits["Brave"] = "Faces danger without flinching.";
    p.flaws["Clumsy"] = "Trips over his own feet.";
    p.inventory["Super Strength potion"] = "A fizzing red potion that grants great strength.";
    return p;
}

inline PlayerState lukas() {
    PlayerState p;
    p.name = "Sir Lukas";
    p.kin = "Knight";
    p.goal = "Prove his worth as a knight.";
    p.traits["Chivalrous"] = "Always helps those in need.";
    p.flaws["Proud"] = "Refuses to back down.";
    p.inventory["Enchanted Quill"] = "Writes whatever is spoken aloud.";
    p.additional_notes = {"Swore an oath to protect the party."};
    return p;
}

inline std::vector<PlayerState> party() { return {jake(), lukas()}; }

// Random text drawn from an alphabet that includes separators the flat
// renderer has to escape.
class Generator {
public:
    explicit Generator(std::uint64_t seed) : rng_(seed) {}

    std::mt19937_64& rng() { return rng_; }

    std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
    bool coin() { return below(2) == 1; }

    std::string word(bool allow_specials = true) {
        static const std::string plain = "abcdefghijklmnopqrstuvwxyz ABCDEFG0123456789'";
        static const std::string specials = ":\n\\-.,";
        std::string out;
        const std::size_t len = 1 + below(12);
        for (std::size_t i = 0; i < len; ++i) {
            if (allow_specials && below(10) == 0) {
                out += specials[below(specials.size())];
            } else {
                out += plain[below(plain.size())];
            }
        }
        return out;
    }

    std::vector<std::string> sentences(std::size_t max, bool allow_specials = true) {
        std::vector<std::string> out(below(max + 1));
        for (auto& s : out) s = word(allow_specials);
        return out;
    }

    std::map<std::string, std::string> text_map(std::size_t max, bool allow_specials = true) {
        std::map<std::string, std::string> out;
        const std::size_t n = below(max + 1);
        for (std::size_t i = 0; i < n; ++i) out[word(allow_specials)] = word(allow_specials);
        return out;
    }

    NpcSpec npc(bool allow_specials = true) {
        return {word(allow_specials), word(allow_specials), word(allow_specials), word(allow_specials),
                word(allow_specials)};
    }

    SceneState scene(bool allow_specials = true) {
        SceneState s;
        s.chapter = word(allow_specials);
        s.scene = word(allow_specials);
        s.scene_summary = sentences(3, allow_specials);
        for (std::size_t i = below(4); i > 0; --i) s.npcs[word(allow_specials)] = npc(allow_specials);
        s.success_condition = word(allow_specials);
        s.failure_condition = word(allow_specials);
        s.game_flow = sentences(4, allow_specials);
        s.environment = text_map(4, allow_specials);
        for (std::size_t i = below(3); i > 0; --i) {
            auto entries = sentences(5, allow_specials);
            if (entries.empty()) entries.push_back(word(allow_specials));
            s.random_tables[word(allow_specials)] = entries;
        }
        s.consequences = word(allow_specials);
        s.is_action_scene = coin();
        return s;
    }

    PlayerState player(const std::string& name, bool allow_specials = true) {
        PlayerState p;
        p.name = name;
        p.kin = word(allow_specials);
        p.goal = word(allow_specials);
        p.traits = text_map(3, allow_specials);
        p.flaws = text_map(3, allow_specials);
        p.inventory = text_map(4, allow_specials);
        p.additional_notes = sentences(2, allow_specials);
        return p;
    }

    // Turns of player messages, call/result pairs and GM narration, with an
    // occasional summary. Counters are consecutive from 1.
    std::vector<llm::ChatEvent> history(std::size_t turns) {
        std::vector<llm::ChatEvent> out;
        auto push = [&](llm::ChatEvent e, int turn) {
            e.counter = out.size() + 1;
            e.turn = turn;
            out.push_back(std::move(e));
        };
        for (std::size_t t = 1; t <= turns; ++t) {
            const int turn = static_cast<int>(t);
            for (std::size_t p = 1 + below(2); p > 0; --p) {
                push(llm::player_message(coin() ? "Jake" : "Sir Lukas", long_text()), turn);
            }
            for (std::size_t c = below(4); c > 0; --c) {
                functions::FunctionCall call{"add_object", {{"name", word(false)}, {"description", word(false)}},
                                             "call_" + std::to_string(out.size() + 1)};
                push(llm::function_call_message(call), turn);
                push(llm::function_result_message(call, long_text(), coin()), turn);
            }
            push(llm::gm_message(long_text()), turn);
            if (below(5) == 0) {
                const auto first = out.front().counter;
                push(llm::summary_message(long_text(), first, out.back().counter), turn);
            }
        }
        return out;
    }

    std::string long_text() {
        std::string s;
        for (std::size_t i = 1 + below(6); i > 0; --i) s += (s.empty() ? "" : " ") + word(false);
        return s;
    }

private:
    std::mt19937_64 rng_;
};

}  // namespace labyrinth::testing
