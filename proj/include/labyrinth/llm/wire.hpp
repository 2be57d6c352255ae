// SPDX-License-Identifier: Apache-2.0
//
// OpenAI-compatible chat-completions encoding.
#pragma once

#include "labyrinth/llm/provider.hpp"

namespace labyrinth::llm::wire {

// {"type": "function", "function": {name, description, parameters}}.
Json tool(const functions::FunctionSpec& spec);
Json messages(const PromptPackage& prompt);
Json chat_request(const PromptPackage& prompt, const std::string& model);

// Decodes a chat-completions response. Tool calls must name a registered
// function and carry a JSON-object argument string; anything else raises
// ProviderError with the raw body attached.
ModelTurn parse_chat_response(const std::string& body);

Json embedding_request(const std::vector<std::string>& texts, const std::string& model);
std::vector<Vector> parse_embedding_response(const std::string& body, std::size_t expected);

}  // namespace labyrinth::llm::wire
