// SPDX-License-Identifier: Apache-2.0
#include "labyrinth/server/server.hpp"

#include "labyrinth/llm/hashed_embedder.hpp"

#include <httplib.h>

#include <chrono>
#include <condition_variable>
#include <ctime>
#include <iomanip>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace labyrinth::server {

namespace {

// Hands the session to waiting writers in arrival order.
class TicketLock {
public:
    void lock() {
        std::unique_lock lock(mutex_);
        const auto ticket = next_++;
        cv_.wait(lock, [&] { return serving_ == ticket; });
    }
    void unlock() {
        {
            std::lock_guard lock(mutex_);
            ++serving_;
        }
        cv_.notify_all();
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    std::uint64_t next_ = 0;
    std::uint64_t serving_ = 0;
};

std::string dump(const Json& doc) { return doc.dump(-1, ' ', false, Json::error_handler_t::replace); }

void send_json(httplib::Response& res, int status, const Json& doc) {
    res.status = status;
    res.set_content(dump(doc), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message,
                const ValidationErrors& errors = {}) {
    Json doc = {{"error", code}, {"message", message}};
    if (!errors.empty()) {
        doc["errors"] = Json::array();
        for (const auto& e : errors) doc["errors"].push_back({{"path", e.path}, {"message", e.message}});
    }
    send_json(res, status, doc);
}

void send_invalid(httplib::Response& res, const ValidationErrors& errors) {
    send_error(res, 422, "validation", describe(errors), errors);
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

void prefix_into(ValidationErrors& out, const ValidationErrors& in, const std::string& prefix) {
    for (const auto& e : in) out.push_back({e.path.empty() ? prefix : prefix + "." + e.path, e.message});
}

bool has_key(const Json& doc, const char* key) { return doc.is_object() && doc.contains(key); }

}  // namespace

Json session_handle_json(const std::string& id, const std::string& created_at, ProfileId profile,
                         const std::string& scene_id) {
    return {{"session_id", id}, {"created_at", created_at}, {"profile", profile_name(profile)}, {"scene_id", scene_id}};
}

Json session_state_json(const engine::Session& session) {
    Json players = Json::array();
    for (const auto& p : session.players()) players.push_back(state::to_json(p));
    return {{"scene_id", session.scene_id()},
            {"profile", profile_name(session.profile().id)},
            {"scene", state::to_json(session.scene())},
            {"players", players},
            {"clock", state::to_json(session.clock())},
            {"status", engine::status_name(session.status())},
            {"turns_completed", session.turns_completed()},
            {"end_reason", session.end_reason()}};
}

struct LiveSession {
    LiveSession(std::unique_ptr<llm::LlmProvider> p, const retrieval::RuleStore& rules, llm::Embedder& embedder,
                engine::Session s)
        : provider(std::move(p)), gm(*provider, rules, &embedder), session(std::move(s)) {}

    std::unique_ptr<llm::LlmProvider> provider;
    engine::GameMaster gm;
    engine::Session session;
    // Writers queue here; readers and the running turn share `data`.
    TicketLock writers;
    std::mutex data;
};

struct SessionServer::Impl {
    explicit Impl(ServerOptions o)
        : options(std::move(o)),
          scenes(engine::load_scene_pack(options.data_dir + "/scenes")),
          catalog(engine::load_catalog(options.data_dir + "/catalog/characters.json")),
          rules(retrieval::RuleStore::load(options.data_dir + "/rules/rule_summary.txt", embedder)),
          id_rng(std::random_device{}()) {
        if (!options.provider_factory) throw Error("server needs a provider factory");
        routes();
    }

    ServerOptions options;
    llm::HashedEmbedder embedder;
    std::vector<engine::PackedScene> scenes;
    engine::Catalog catalog;
    retrieval::RuleStore rules;

    mutable std::mutex registry_mutex;
    std::map<std::string, std::shared_ptr<LiveSession>> sessions;
    std::mt19937_64 id_rng;

    httplib::Server http;
    std::thread worker;

    std::string new_id() {
        std::ostringstream out;
        out << std::hex << std::setfill('0') << std::setw(16) << id_rng() << std::setw(16) << id_rng();
        return out.str();
    }

    std::shared_ptr<LiveSession> find(const std::string& id) const {
        std::lock_guard lock(registry_mutex);
        const auto it = sessions.find(id);
        return it == sessions.end() ? nullptr : it->second;
    }

    std::shared_ptr<LiveSession> find_or_404(const httplib::Request& req, httplib::Response& res) const {
        auto live = find(req.path_params.at("id"));
        if (!live) send_error(res, 404, "not_found", "unknown session " + req.path_params.at("id"));
        return live;
    }

    static std::optional<Json> body_json(const httplib::Request& req, httplib::Response& res) {
        Json doc = Json::parse(req.body, nullptr, false);
        if (doc.is_discarded() || !doc.is_object()) {
            send_invalid(res, {{"", "request body must be a JSON object"}});
            return std::nullopt;
        }
        return doc;
    }

    void routes() {
        http.Post("/sessions", [this](const auto& req, auto& res) { create(req, res); });
        http.Post("/sessions/:id/message", [this](const auto& req, auto& res) { message(req, res); });
        http.Get("/sessions/:id/state", [this](const auto& req, auto& res) {
            if (auto live = find_or_404(req, res)) {
                std::lock_guard lock(live->data);
                send_json(res, 200, session_state_json(live->session));
            }
        });
        http.Get("/sessions/:id/transcript", [this](const auto& req, auto& res) {
            if (auto live = find_or_404(req, res)) {
                std::lock_guard lock(live->data);
                res.set_content(engine::to_jsonl(live->session), "application/x-ndjson");
            }
        });
        http.Delete("/sessions/:id", [this](const auto& req, auto& res) {
            std::lock_guard lock(registry_mutex);
            if (sessions.erase(req.path_params.at("id")) == 0) {
                return send_error(res, 404, "not_found", "unknown session " + req.path_params.at("id"));
            }
            res.status = 204;
        });
        http.Get("/scenes", [this](const auto&, auto& res) {
            Json list = Json::array();
            for (const auto& s : scenes) list.push_back({{"id", s.id}, {"scene", state::to_json(s.scene)}});
            send_json(res, 200, {{"scenes", list}});
        });
        http.Get("/catalog", [this](const auto&, auto& res) { send_json(res, 200, engine::to_json(catalog)); });
        http.set_exception_handler([](const auto&, auto& res, std::exception_ptr ep) {
            std::string what = "unexpected failure";
            try {
                std::rethrow_exception(ep);
            } catch (const std::exception& e) {
                what = e.what();
            } catch (...) {
            }
            send_error(res, 500, "internal", what);
        });
    }

    void create(const httplib::Request& req, httplib::Response& res) {
        const auto body = body_json(req, res);
        if (!body) return;
        ValidationErrors errors;

        std::string scene_id;
        state::SceneState scene;
        if (!body->contains("scene")) {
            errors.push_back({"scene", "missing field"});
        } else if ((*body)["scene"].is_string()) {
            scene_id = (*body)["scene"].get<std::string>();
            const auto it = std::find_if(scenes.begin(), scenes.end(), [&](const auto& s) { return s.id == scene_id; });
            if (it == scenes.end()) {
                errors.push_back({"scene", "unknown scene " + scene_id});
            } else {
                scene = it->scene;
            }
        } else {
            auto parsed = state::scene_from_json((*body)["scene"]);
            if (parsed) {
                scene = parsed.value();
                scene_id = body->value("scene_id", std::string("custom"));
            } else {
                prefix_into(errors, parsed.errors(), "scene");
            }
        }

        ProfileId profile = options.default_profile;
        if (body->contains("profile")) {
            const auto parsed = (*body)["profile"].is_string()
                                    ? parse_profile((*body)["profile"].get<std::string>())
                                    : std::nullopt;
            if (parsed) {
                profile = *parsed;
            } else {
                errors.push_back({"profile", "unknown profile"});
            }
        }

        engine::EngineConfig config = options.engine;
        if (body->contains("prompt_config")) {
            auto parsed = prompt::prompt_config_from_json((*body)["prompt_config"]);
            if (parsed) {
                config.prompt = parsed.value();
            } else {
                prefix_into(errors, parsed.errors(), "prompt_config");
            }
        }

        std::uint64_t seed = 0;
        if (body->contains("seed")) {
            if ((*body)["seed"].is_number_unsigned()) {
                seed = (*body)["seed"].get<std::uint64_t>();
            } else {
                errors.push_back({"seed", "must be a non-negative integer"});
            }
        }

        std::vector<state::PlayerState> players;
        if (!body->contains("players") || !(*body)["players"].is_array() || (*body)["players"].empty()) {
            errors.push_back({"players", "must be a non-empty list"});
        } else {
            for (std::size_t i = 0; i < (*body)["players"].size(); ++i) {
                const Json& p = (*body)["players"][i];
                const std::string path = "players[" + std::to_string(i) + "]";
                if (has_key(p, "traits") || has_key(p, "flaws") || has_key(p, "inventory")) {
                    auto parsed = state::player_from_json(p);
                    parsed ? players.push_back(parsed.value()) : prefix_into(errors, parsed.errors(), path);
                    continue;
                }
                if (!p.is_object()) {
                    errors.push_back({path, "expected an object"});
                    continue;
                }
                engine::CharacterChoices choices;
                bool complete = true;
                const std::initializer_list<std::pair<const char*, std::string*>> fields = {
                    {"name", &choices.name}, {"kin", &choices.kin}, {"goal", &choices.goal},
                    {"trait", &choices.trait}, {"flaw", &choices.flaw}};
                for (const auto& [key, field] : fields) {
                    if (p.contains(key) && p[key].is_string()) {
                        *field = p[key].get<std::string>();
                    } else {
                        errors.push_back({path + "." + key, "missing text"});
                        complete = false;
                    }
                }
                if (!complete) continue;
                auto made = engine::create_character(choices, catalog);
                made ? players.push_back(made.value()) : prefix_into(errors, made.errors(), path);
            }
        }
        if (!errors.empty()) return send_invalid(res, errors);

        std::shared_ptr<LiveSession> live;
        try {
            engine::Session session(scene_id, scene, players, GmSettingProfile::make(profile), config, seed);
            live = std::make_shared<LiveSession>(options.provider_factory(scene_id, seed), rules, embedder,
                                                 std::move(session));
        } catch (const ValidationFailure& e) {
            return send_invalid(res, e.errors());
        }

        std::string id;
        {
            std::lock_guard lock(registry_mutex);
            if (sessions.size() >= options.max_sessions) {
                return send_error(res, 503, "capacity", "too many live sessions");
            }
            do {
                id = new_id();
            } while (sessions.count(id));
            sessions.emplace(id, live);
        }
        send_json(res, 201, session_handle_json(id, utc_now(), profile, scene_id));
    }

    void message(const httplib::Request& req, httplib::Response& res) {
        auto live = find_or_404(req, res);
        if (!live) return;
        const auto body = body_json(req, res);
        if (!body) return;
        ValidationErrors errors;
        const std::string player = body->value("player", std::string());
        const std::string text = body->value("text", std::string());
        std::vector<std::string> names;
        {
            std::lock_guard lock(live->data);
            names = live->session.player_names();
        }
        if (player.empty()) {
            errors.push_back({"player", "missing text"});
        } else if (std::find(names.begin(), names.end(), player) == names.end()) {
            errors.push_back({"player", "unknown player " + player});
        }
        if (text.empty()) errors.push_back({"text", "missing text"});
        if (!errors.empty()) return send_invalid(res, errors);

        live->writers.lock();
        std::string refusal;
        {
            std::lock_guard lock(live->data);
            const auto& s = live->session;
            if (s.status() != engine::Status::Running) {
                refusal = "session ended with " + std::string(engine::status_name(s.status()));
            } else if (s.turns_completed() >= s.config().max_turns) {
                refusal = "session reached its turn limit";
            }
        }
        if (!refusal.empty()) {
            live->writers.unlock();
            return send_error(res, 409, "session_ended", refusal);
        }

        // The writer slot is held until the stream has been produced.
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider(
            "text/event-stream",
            [live, player, text](std::size_t, httplib::DataSink& sink) {
                std::lock_guard lock(live->data);
                auto emit = [&](const std::string& name, const Json& doc) {
                    const std::string chunk = "event: " + name + "\ndata: " + dump(doc) + "\n\n";
                    sink.write(chunk.data(), chunk.size());
                };
                const engine::EventSink events = [&](const llm::ChatEvent& e) { emit("chat_event", llm::to_json(e)); };
                std::string outcome = "continue";
                try {
                    live->gm.gm_turn(live->session, {{player, text}}, events);
                    outcome = engine::outcome_name(live->gm.check_outcome(live->session, events));
                } catch (const llm::ProviderError& e) {
                    emit("error", {{"error", "provider"}, {"message", e.what()}});
                } catch (const std::exception& e) {
                    emit("error", {{"error", "internal"}, {"message", e.what()}});
                }
                const auto& s = live->session;
                emit("turn_complete", {{"turn", s.turns_completed()},
                                       {"outcome", outcome},
                                       {"clock", state::to_json(s.clock())},
                                       {"status", engine::status_name(s.status())},
                                       {"end_reason", s.end_reason()}});
                sink.done();
                return true;
            },
            [live](bool) { live->writers.unlock(); });
    }
};

SessionServer::SessionServer(ServerOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

SessionServer::~SessionServer() { stop(); }

int SessionServer::start(const std::string& host, int port) {
    int bound = port;
    if (port == 0) {
        bound = impl_->http.bind_to_any_port(host);
    } else if (!impl_->http.bind_to_port(host, port)) {
        bound = -1;
    }
    if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
    impl_->worker = std::thread([this] { impl_->http.listen_after_bind(); });
    impl_->http.wait_until_ready();
    return bound;
}

void SessionServer::listen(const std::string& host, int port) {
    if (!impl_->http.listen(host, port)) throw Error("cannot listen on " + host + ":" + std::to_string(port));
}

void SessionServer::stop() {
    if (!impl_) return;
    impl_->http.stop();
    if (impl_->worker.joinable()) impl_->worker.join();
}

std::size_t SessionServer::session_count() const {
    std::lock_guard lock(impl_->registry_mutex);
    return impl_->sessions.size();
}

}  // namespace labyrinth::server
