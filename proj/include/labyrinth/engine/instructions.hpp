// SPDX-License-Identifier: Apache-2.0
//
// Built-in system instructions for every request the engine makes.
#pragma once

#include <string>

namespace labyrinth::engine::instructions {

const std::string& game_master();
const std::string& judge();
const std::string& state_regen();
const std::string& npc_gen();
const std::string& player_agent();
const std::string& classify_table();
const std::string& count_entries();
const std::string& generate_scene();
const std::string& repair_scene();
const std::string& paraphrase();

}  // namespace labyrinth::engine::instructions
