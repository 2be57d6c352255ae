// SPDX-License-Identifier: Apache-2.0
//
// Reading structured answers out of free-form model text.
#pragma once

#include "labyrinth/llm/chat.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace labyrinth::engine {

// The text of a TextTurn; nullopt for calls and stops.
std::optional<std::string> reply_text(const llm::ModelTurn& turn);

// Parses the first JSON value in `text`, ignoring code fences and prose around
// a single top-level object or array.
std::optional<llm::Json> extract_json(std::string_view text);

// Lowercased first word made of letters, '-' or '_'.
std::string first_word(std::string_view text);

}  // namespace labyrinth::engine
