// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace labyrinth::functions {

// Source of dice faces and uniform indices. One roll_d6() call is one die.
class RandomSource {
public:
    virtual ~RandomSource() = default;
    virtual int roll_d6() = 0;
    // Uniform in [0, n). n must be positive.
    virtual std::size_t uniform_index(std::size_t n) = 0;
};

// mt19937_64 with rejection sampling, so a seed yields the same sequence on
// every standard library.
class SeededRandom final : public RandomSource {
public:
    explicit SeededRandom(std::uint64_t seed) : engine_(seed) {}

    int roll_d6() override { return 1 + static_cast<int>(uniform_index(6)); }
    std::size_t uniform_index(std::size_t n) override;

private:
    std::mt19937_64 engine_;
};

// Draws `count` distinct indices from [0, population) by partial Fisher-Yates.
// The result keeps draw order. count is clipped to population.
std::vector<std::size_t> sample_without_replacement(std::size_t population, std::size_t count,
                                                    RandomSource& rng);

}  // namespace labyrinth::functions
