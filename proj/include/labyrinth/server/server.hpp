// SPDX-License-Identifier: Apache-2.0
//
// HTTP session API for interactive play.
//
//   POST   /sessions               {scene, profile?, prompt_config?, seed?, players}
//   POST   /sessions/{id}/message  {player, text}  -> text/event-stream
//   GET    /sessions/{id}/state
//   GET    /sessions/{id}/transcript               -> line-delimited events
//   DELETE /sessions/{id}
//   GET    /scenes
//   GET    /catalog
//
// A message stream carries one `chat_event` per recorded event, then a
// `turn_complete` event with the outcome, clock and status. Errors are
// {"error": code, "message": text, "errors"?: [{path, message}]} with 404 for
// unknown sessions, 409 for sessions that can take no more turns and 422 for
// invalid requests.
#pragma once

#include "labyrinth/engine/game_master.hpp"
#include "labyrinth/engine/scene_init.hpp"

#include <functional>
#include <memory>
#include <string>

namespace labyrinth::server {

using llm::Json;

// A fresh provider for every new session.
using SessionProviderFactory = std::function<std::unique_ptr<llm::LlmProvider>(const std::string& scene_id,
                                                                               std::uint64_t seed)>;

struct ServerOptions {
    // Holds scenes/, catalog/characters.json and rules/rule_summary.txt.
    std::string data_dir;
    SessionProviderFactory provider_factory;
    engine::EngineConfig engine;
    ProfileId default_profile = ProfileId::FgAll;
    // Sessions can be created while this many are live.
    std::size_t max_sessions = 256;
};

class SessionServer {
public:
    explicit SessionServer(ServerOptions options);
    ~SessionServer();
    SessionServer(const SessionServer&) = delete;
    SessionServer& operator=(const SessionServer&) = delete;

    // Serves on a background thread and returns the bound port; 0 picks a free one.
    int start(const std::string& host, int port = 0);
    // Serves on the calling thread until stop().
    void listen(const std::string& host, int port);
    void stop();

    std::size_t session_count() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// SessionHandle, state and turn-complete documents.
Json session_handle_json(const std::string& id, const std::string& created_at, ProfileId profile,
                         const std::string& scene_id);
Json session_state_json(const engine::Session& session);

}  // namespace labyrinth::server
