// SPDX-License-Identifier: Apache-2.0
#include "labyrinth/functions/dice.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace labyrinth::functions {

std::size_t SeededRandom::uniform_index(std::size_t n) {
    if (n == 0) throw Error("uniform_index needs a positive range");
    const std::uint64_t range = n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                (std::numeric_limits<std::uint64_t>::max() % range + 1) % range;
    std::uint64_t draw = engine_();
    while (draw > limit) draw = engine_();
    return static_cast<std::size_t>(draw % range);
}

std::vector<std::size_t> sample_without_replacement(std::size_t population, std::size_t count,
                                                    RandomSource& rng) {
    count = std::min(count, population);
    std::vector<std::size_t> pool(population);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t j = i + rng.uniform_index(population - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    return pool;
}

DifficultyOutOfRange::DifficultyOutOfRange(int difficulty)
    : Error("difficulty " + std::to_string(difficulty) + " is outside 1..6") {}

Modifier modifier_for(bool trait_applies, bool flaw_applies) {
    if (trait_applies == flaw_applies) return Modifier::None;
    return trait_applies ? Modifier::Advantage : Modifier::Disadvantage;
}

TestResult roll_test(int difficulty, Modifier modifier, RandomSource& rng) {
    if (difficulty < kMinDifficulty || difficulty > kMaxDifficulty) throw DifficultyOutOfRange(difficulty);
    TestResult r;
    r.difficulty = difficulty;
    r.modifier = modifier;
    r.rolls.push_back(rng.roll_d6());
    if (modifier != Modifier::None) r.rolls.push_back(rng.roll_d6());
    switch (modifier) {
        case Modifier::None: r.kept = r.rolls.front(); break;
        case Modifier::Advantage: r.kept = std::max(r.rolls[0], r.rolls[1]); break;
        case Modifier::Disadvantage: r.kept = std::min(r.rolls[0], r.rolls[1]); break;
    }
    r.success = r.kept >= difficulty;
    return r;
}

Probability test_success_probability(int difficulty, Modifier modifier) {
    if (difficulty < kMinDifficulty || difficulty > kMaxDifficulty) throw DifficultyOutOfRange(difficulty);
    const Probability single(7 - difficulty, 6);
    const Probability miss(difficulty - 1, 6);
    switch (modifier) {
        case Modifier::None: return single;
        case Modifier::Advantage: return Probability(1) - miss * miss;
        case Modifier::Disadvantage: return single * single;
    }
    return single;
}

std::string_view modifier_name(Modifier modifier) {
    switch (modifier) {
        case Modifier::None: return "none";
        case Modifier::Advantage: return "advantage";
        case Modifier::Disadvantage: return "disadvantage";
    }
    return "none";
}

std::optional<Modifier> parse_modifier(std::string_view name) {
    if (name == "none") return Modifier::None;
    if (name == "advantage") return Modifier::Advantage;
    if (name == "disadvantage") return Modifier::Disadvantage;
    return std::nullopt;
}

nlohmann::json to_json(const TestResult& r) {
    return {{"rolls", r.rolls},
            {"kept", r.kept},
            {"difficulty", r.difficulty},
            {"modifier", modifier_name(r.modifier)},
            {"success", r.success}};
}

TestResult test_result_from_json(const nlohmann::json& doc) {
    TestResult r;
    r.rolls = doc.at("rolls").get<std::vector<int>>();
    r.kept = doc.at("kept").get<int>();
    r.difficulty = doc.at("difficulty").get<int>();
    r.modifier = parse_modifier(doc.at("modifier").get<std::string>()).value_or(Modifier::None);
    r.success = doc.at("success").get<bool>();
    return r;
}

}  // namespace labyrinth::functions
