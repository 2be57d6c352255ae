// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace labyrinth {

// The six game-master configurations compared in the experiments.
enum class ProfileId { FgAll, FgDice, FgStates, FgDefault, FgGen, Dg };

enum class ToolSet { All, DiceOnly, StatesOnly, None };
enum class StateExposure { EveryTurn, FirstTurnOnly };
enum class StateUpdateMode { ByFunctions, Frozen, ByGeneration };

struct GmSettingProfile {
    ProfileId id = ProfileId::FgAll;
    ToolSet tools = ToolSet::All;
    StateExposure states_in_prompt = StateExposure::EveryTurn;
    StateUpdateMode state_update_mode = StateUpdateMode::ByFunctions;

    static GmSettingProfile make(ProfileId id);

    bool operator==(const GmSettingProfile&) const = default;
};

inline constexpr std::array<ProfileId, 6> kAllProfiles = {ProfileId::FgAll,     ProfileId::FgDice,
                                                          ProfileId::FgStates,  ProfileId::FgDefault,
                                                          ProfileId::FgGen,     ProfileId::Dg};

// "fg-all", "fg-dice", ... ; parsing is case-insensitive and accepts '_' for '-'.
std::string_view profile_name(ProfileId id);
std::optional<ProfileId> parse_profile(std::string_view name);

}  // namespace labyrinth
