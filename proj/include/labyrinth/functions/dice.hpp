// SPDX-License-Identifier: Apache-2.0
//
// d6 tests: roll one die (or two, keeping the higher/lower for an applicable
// trait/flaw) and succeed when the kept face meets the difficulty.
#pragma once

#include "labyrinth/error.hpp"
#include "labyrinth/functions/random.hpp"

#include <boost/rational.hpp>
#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace labyrinth::functions {

enum class Modifier { None, Advantage, Disadvantage };

using Probability = boost::rational<long long>;

struct TestResult {
    std::vector<int> rolls;
    int kept = 0;
    int difficulty = 0;
    Modifier modifier = Modifier::None;
    bool success = false;

    bool operator==(const TestResult&) const = default;
};

class DifficultyOutOfRange : public Error {
public:
    explicit DifficultyOutOfRange(int difficulty);
};

inline constexpr int kMinDifficulty = 1;
inline constexpr int kMaxDifficulty = 6;

// A relevant trait gives advantage, a relevant flaw disadvantage; both cancel.
Modifier modifier_for(bool trait_applies, bool flaw_applies);

TestResult roll_test(int difficulty, Modifier modifier, RandomSource& rng);

// Closed-form chance that roll_test succeeds.
Probability test_success_probability(int difficulty, Modifier modifier);

std::string_view modifier_name(Modifier modifier);
std::optional<Modifier> parse_modifier(std::string_view name);

nlohmann::json to_json(const TestResult& result);
TestResult test_result_from_json(const nlohmann::json& doc);

}  // namespace labyrinth::functions
