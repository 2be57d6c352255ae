// SPDX-License-Identifier: Apache-2.0
#include "labyrinth/profile.hpp"

#include <algorithm>
#include <cctype>

namespace labyrinth {

GmSettingProfile GmSettingProfile::make(ProfileId id) {
    switch (id) {
        case ProfileId::FgAll:
            return {id, ToolSet::All, StateExposure::EveryTurn, StateUpdateMode::ByFunctions};
        case ProfileId::FgDice:
            return {id, ToolSet::DiceOnly, StateExposure::EveryTurn, StateUpdateMode::ByFunctions};
        case ProfileId::FgStates:
            return {id, ToolSet::StatesOnly, StateExposure::EveryTurn, StateUpdateMode::ByFunctions};
        case ProfileId::FgDefault:
            return {id, ToolSet::None, StateExposure::EveryTurn, StateUpdateMode::Frozen};
        case ProfileId::FgGen:
            return {id, ToolSet::None, StateExposure::EveryTurn, StateUpdateMode::ByGeneration};
        case ProfileId::Dg:
            return {id, ToolSet::None, StateExposure::FirstTurnOnly, StateUpdateMode::Frozen};
    }
    return {};
}

std::string_view profile_name(ProfileId id) {
    switch (id) {
        case ProfileId::FgAll: return "fg-all";
        case ProfileId::FgDice: return "fg-dice";
        case ProfileId::FgStates: return "fg-states";
        case ProfileId::FgDefault: return "fg-default";
        case ProfileId::FgGen: return "fg-gen";
        case ProfileId::Dg: return "dg";
    }
    return "unknown";
}

std::optional<ProfileId> parse_profile(std::string_view name) {
    std::string norm(name);
    std::transform(norm.begin(), norm.end(), norm.begin(), [](unsigned char c) {
        return c == '_' ? '-' : static_cast<char>(std::tolower(c));
    });
    for (ProfileId id : kAllProfiles) {
        if (profile_name(id) == norm) return id;
    }
    return std::nullopt;
}

}  // namespace labyrinth
