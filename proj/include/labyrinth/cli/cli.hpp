// SPDX-License-Identifier: Apache-2.0
//
// The `labyrinth` command line: play, simulate, init-scene,
// create-character, unit-test, stats and serve.
#pragma once

#include "labyrinth/engine/session.hpp"
#include "labyrinth/llm/provider.hpp"

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace labyrinth::cli {

using llm::Json;

// One document holding the profile, prompt and engine settings and the
// provider: {"profile", "prompt", "engine", "provider": {"kind": ...}}.
// Provider kinds are "canned", "scripted" ({"script": path} or {"turns": ...})
// and "openai" (base_url, model, embedding_model, max_retries,
// timeout_seconds; secrets come from the environment).
struct RunConfig {
    ProfileId profile = ProfileId::FgAll;
    engine::EngineConfig engine;
    Json provider = Json::object();
};

Checked<RunConfig> run_config_from_json(const Json& doc);
RunConfig load_run_config(const std::string& path);

// Offline refuses providers that reach the network. Without a configured
// kind, offline runs use the canned provider and online runs use openai.
std::unique_ptr<llm::LlmProvider> make_provider(const Json& spec, bool offline);

// Runs one command line. Returns the process exit code: 0 on success, 1 on
// failure, 2 on usage errors. Failures print a JSON error document on `err`.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace labyrinth::cli
