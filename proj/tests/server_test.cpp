// SPDX-License-Identifier: Apache-2.0
#include "labyrinth/server/server.hpp"
#include "labyrinth/llm/canned.hpp"
#include "labyrinth/llm/scripted.hpp"

#include "test_support.hpp"

#include <httplib.h>

#include <gtest/gtest.h>

#include <atomic>
#include <thread>

namespace labyrinth::server {
namespace {

using llm::Purpose;

struct SseEvent {
    std::string name;
    Json data;
};

std::vector<SseEvent> parse_sse(const std::string& body) {
    std::vector<SseEvent> out;
    std::istringstream in(body);
    std::string line;
    SseEvent current;
    while (std::getline(in, line)) {
        if (line.rfind("event: ", 0) == 0) {
            current.name = line.substr(7);
        } else if (line.rfind("data: ", 0) == 0) {
            current.data = Json::parse(line.substr(6));
        } else if (line.empty() && !current.name.empty()) {
            out.push_back(std::move(current));
            current = {};
        }
    }
    return out;
}

// Every game-master turn adds one item named after the turn's counter, then narrates.
std::unique_ptr<llm::LlmProvider> item_adder(const std::string&, std::uint64_t) {
    auto p = std::make_unique<llm::ScriptedProvider>();
    std::vector<llm::ModelTurn> gm;
    for (int i = 0; i < 50; ++i) {
        gm.push_back(functions::FunctionCall{
            "add_item", {{"player", "Jake"}, {"name", "Token " + std::to_string(i)}, {"description", "Shiny."}}, ""});
        gm.push_back(llm::TextTurn{"Jake pockets a token.", false});
        gm.push_back(llm::StopTurn{});
    }
    p->set_script(Purpose::Gm, gm);
    p->set_script(Purpose::Judge, std::vector<llm::ModelTurn>(50, llm::TextTurn{"continue", true}));
    return p;
}

std::unique_ptr<llm::LlmProvider> doomed(const std::string&, std::uint64_t) {
    auto p = std::make_unique<llm::ScriptedProvider>();
    p->set_script(Purpose::Gm, {llm::TextTurn{"The guards seize you.", true}});
    p->set_script(Purpose::Judge, {llm::TextTurn{R"({"outcome": "failure"})", true}});
    return p;
}

class ServerTest : public ::testing::Test {
protected:
    void launch(SessionProviderFactory factory) {
        ServerOptions options;
        options.data_dir = testing::data_dir();
        options.provider_factory = std::move(factory);
        server_ = std::make_unique<SessionServer>(options);
        port_ = server_->start("127.0.0.1");
        client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
        client_->set_read_timeout(30);
    }
    void TearDown() override {
        if (server_) server_->stop();
    }

    Json party_json() {
        return Json::array({state::to_json(testing::jake()), state::to_json(testing::lukas())});
    }

    std::string create(const std::string& profile = "fg-all") {
        Json body = {{"scene", "goblin-market"}, {"profile", profile}, {"seed", 3}, {"players", party_json()}};
        auto res = client_->Post("/sessions", body.dump(), "application/json");
        EXPECT_TRUE(res);
        EXPECT_EQ(res->status, 201) << res->body;
        return Json::parse(res->body).at("session_id").get<std::string>();
    }

    httplib::Result say(const std::string& id, const std::string& player, const std::string& text) {
        return client_->Post("/sessions/" + id + "/message", Json{{"player", player}, {"text", text}}.dump(),
                             "application/json");
    }

    Json get(const std::string& path, int expected = 200) {
        auto res = client_->Get(path);
        EXPECT_TRUE(res);
        EXPECT_EQ(res->status, expected) << path << " " << res->body;
        return Json::parse(res->body);
    }

    std::unique_ptr<SessionServer> server_;
    int port_ = 0;
    std::unique_ptr<httplib::Client> client_;
};

void expect_keys(const Json& doc, std::initializer_list<std::pair<const char*, Json::value_t>> keys) {
    ASSERT_TRUE(doc.is_object()) << doc.dump();
    for (const auto& [key, type] : keys) {
        ASSERT_TRUE(doc.contains(key)) << key << " missing from " << doc.dump();
        const auto actual = doc.at(key).type();
        const bool numeric = (type == Json::value_t::number_integer || type == Json::value_t::number_unsigned) &&
                             doc.at(key).is_number_integer();
        EXPECT_TRUE(actual == type || numeric) << key << " has the wrong type in " << doc.dump();
    }
}

void expect_error_shape(const httplib::Result& res, int status) {
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, status) << res->body;
    const Json doc = Json::parse(res->body);
    expect_keys(doc, {{"error", Json::value_t::string}, {"message", Json::value_t::string}});
    if (status == 422) {
        ASSERT_TRUE(doc.contains("errors"));
        for (const auto& e : doc["errors"]) {
            expect_keys(e, {{"path", Json::value_t::string}, {"message", Json::value_t::string}});
        }
    }
}

TEST_F(ServerTest, CreateMessageStateShowsTheAppliedDiff) {
    launch(item_adder);
    const std::string id = create();
    auto res = say(id, "Jake", "I search the cart.");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_NE(res->get_header_value("Content-Type").find("text/event-stream"), std::string::npos);
    const auto events = parse_sse(res->body);
    ASSERT_GE(events.size(), 5u);
    EXPECT_EQ(events[0].name, "chat_event");
    EXPECT_EQ(events[0].data["kind"], "player_message");
    EXPECT_EQ(events[1].data["kind"], "function_call");
    EXPECT_EQ(events[2].data["kind"], "function_result");
    EXPECT_EQ(events[3].data["kind"], "gm_message");
    const auto& done = events.back();
    EXPECT_EQ(done.name, "turn_complete");
    expect_keys(done.data, {{"turn", Json::value_t::number_integer},
                            {"outcome", Json::value_t::string},
                            {"clock", Json::value_t::object},
                            {"status", Json::value_t::string},
                            {"end_reason", Json::value_t::string}});
    EXPECT_EQ(done.data["turn"], 1);
    EXPECT_EQ(done.data["status"], "running");

    const Json state = get("/sessions/" + id + "/state");
    expect_keys(state, {{"scene_id", Json::value_t::string},
                        {"profile", Json::value_t::string},
                        {"scene", Json::value_t::object},
                        {"players", Json::value_t::array},
                        {"clock", Json::value_t::object},
                        {"status", Json::value_t::string},
                        {"turns_completed", Json::value_t::number_integer}});
    EXPECT_TRUE(state::scene_from_json(state["scene"]).ok());
    EXPECT_EQ(state["players"][0]["inventory"]["Token 0"], "Shiny.");
    EXPECT_EQ(state["turns_completed"], 1);
}

TEST_F(ServerTest, HandleAndTranscriptFollowTheirShapes) {
    launch(item_adder);
    Json body = {{"scene", "hedge-maze"}, {"profile", "fg-states"}, {"players", party_json()}};
    auto res = client_->Post("/sessions", body.dump(), "application/json");
    ASSERT_TRUE(res);
    ASSERT_EQ(res->status, 201);
    const Json handle = Json::parse(res->body);
    expect_keys(handle, {{"session_id", Json::value_t::string},
                         {"created_at", Json::value_t::string},
                         {"profile", Json::value_t::string},
                         {"scene_id", Json::value_t::string}});
    EXPECT_EQ(handle["profile"], "fg-states");
    EXPECT_EQ(handle["scene_id"], "hedge-maze");
    const std::string id = handle["session_id"];
    say(id, "Sir Lukas", "I knock on the left door.");

    auto transcript = client_->Get("/sessions/" + id + "/transcript");
    ASSERT_TRUE(transcript);
    EXPECT_EQ(transcript->status, 200);
    const auto parsed = engine::parse_transcript(transcript->body);
    EXPECT_EQ(parsed.header["scene_id"], "hedge-maze");
    EXPECT_EQ(parsed.footer["turns"], 1);
    EXPECT_GE(parsed.events.size(), 4u);
}

TEST_F(ServerTest, AuthoringDataIsServed) {
    launch(item_adder);
    const Json scenes = get("/scenes");
    ASSERT_TRUE(scenes["scenes"].is_array());
    ASSERT_EQ(scenes["scenes"].size(), 3u);
    for (const auto& s : scenes["scenes"]) {
        expect_keys(s, {{"id", Json::value_t::string}, {"scene", Json::value_t::object}});
        EXPECT_TRUE(state::scene_from_json(s["scene"]).ok());
    }
    const Json catalog = get("/catalog");
    EXPECT_TRUE(engine::catalog_from_json(catalog).ok());
    EXPECT_TRUE(catalog["kins"].contains("Goblin"));
}

TEST_F(ServerTest, CharacterChoicesBuildPlayers) {
    launch(item_adder);
    Json body = {{"scene", "oubliette"},
                 {"players", Json::array({{{"name", "Ada"}, {"kin", "Fairy"}, {"goal", "Go home."},
                                           {"trait", "Clever"}, {"flaw", "Curious"}}})}};
    auto res = client_->Post("/sessions", body.dump(), "application/json");
    ASSERT_TRUE(res);
    ASSERT_EQ(res->status, 201) << res->body;
    const Json state = get("/sessions/" + Json::parse(res->body)["session_id"].get<std::string>() + "/state");
    EXPECT_EQ(state["players"][0]["kin"], "Fairy");
    EXPECT_TRUE(state["players"][0]["traits"].contains("Clever"));
}

TEST_F(ServerTest, UnknownSessionIs404) {
    launch(item_adder);
    expect_error_shape(client_->Get("/sessions/nope/state"), 404);
    expect_error_shape(client_->Get("/sessions/nope/transcript"), 404);
    expect_error_shape(say("nope", "Jake", "Hello?"), 404);
    const auto id = create();
    ASSERT_TRUE(client_->Delete("/sessions/" + id));
    expect_error_shape(client_->Get("/sessions/" + id + "/state"), 404);
}

TEST_F(ServerTest, MessageToEndedSessionIs409) {
    launch(doomed);
    const auto id = create();
    const auto events = parse_sse(say(id, "Jake", "I insult the guards.")->body);
    ASSERT_FALSE(events.empty());
    EXPECT_EQ(events.back().data["outcome"], "failure");
    EXPECT_EQ(events.back().data["status"], "failure");
    EXPECT_EQ(get("/sessions/" + id + "/state")["status"], "failure");
    expect_error_shape(say(id, "Jake", "Sorry!"), 409);
}

TEST_F(ServerTest, InvalidRequestsAre422WithFieldPaths) {
    launch(item_adder);
    auto paths = [](const httplib::Result& res) {
        std::set<std::string> out;
        const Json doc = Json::parse(res->body);
        for (const auto& e : doc["errors"]) out.insert(e["path"].get<std::string>());
        return out;
    };
    auto bad = client_->Post("/sessions", R"({"scene": "nowhere", "profile": "fg-tea", "players": []})",
                             "application/json");
    expect_error_shape(bad, 422);
    EXPECT_EQ(paths(bad), (std::set<std::string>{"scene", "profile", "players"}));

    Json broken_player = state::to_json(testing::jake());
    broken_player.erase("goal");
    auto player = client_->Post("/sessions", Json{{"scene", "goblin-market"}, {"players", {broken_player}}}.dump(),
                                "application/json");
    expect_error_shape(player, 422);
    EXPECT_TRUE(paths(player).count("players[0].goal"));

    auto dupes = client_->Post(
        "/sessions",
        Json{{"scene", "goblin-market"}, {"players", {state::to_json(testing::jake()), state::to_json(testing::jake())}}}
            .dump(),
        "application/json");
    expect_error_shape(dupes, 422);

    expect_error_shape(client_->Post("/sessions", "not json", "application/json"), 422);
    const auto id = create();
    auto stranger = say(id, "Nobody", "Hi");
    expect_error_shape(stranger, 422);
    EXPECT_EQ(paths(stranger), (std::set<std::string>{"player"}));
    expect_error_shape(say(id, "Jake", ""), 422);
    EXPECT_EQ(get("/sessions/" + id + "/state")["turns_completed"], 0);
}

TEST_F(ServerTest, InterleavedSessionsDoNotShareState) {
    launch(item_adder);
    const auto a = create();
    const auto b = create("fg-states");
    for (int i = 0; i < 3; ++i) {
        say(a, "Jake", "Turn in a.");
        if (i < 1) say(b, "Jake", "Turn in b.");
    }
    const Json sa = get("/sessions/" + a + "/state");
    const Json sb = get("/sessions/" + b + "/state");
    EXPECT_EQ(sa["turns_completed"], 3);
    EXPECT_EQ(sb["turns_completed"], 1);
    EXPECT_EQ(sa["players"][0]["inventory"].size(), 4u);
    EXPECT_EQ(sb["players"][0]["inventory"].size(), 2u);
    EXPECT_FALSE(sb["players"][0]["inventory"].contains("Token 1"));
    EXPECT_EQ(sa["profile"], "fg-all");
    EXPECT_EQ(sb["profile"], "fg-states");
}

TEST_F(ServerTest, ConcurrentMessagesToOneSessionRunOneAtATime) {
    launch(item_adder);
    const auto id = create();
    const auto other = create();
    std::vector<std::thread> threads;
    std::atomic<int> ok{0};
    for (int i = 0; i < 6; ++i) {
        threads.emplace_back([&, i] {
            httplib::Client c("127.0.0.1", port_);
            c.set_read_timeout(30);
            const auto& target = i % 3 == 2 ? other : id;
            auto res = c.Post("/sessions/" + target + "/message",
                              Json{{"player", "Jake"}, {"text", "Go " + std::to_string(i)}}.dump(), "application/json");
            if (res && res->status == 200 && parse_sse(res->body).back().name == "turn_complete") ++ok;
        });
    }
    for (auto& t : threads) t.join();
    EXPECT_EQ(ok.load(), 6);

    const auto t = engine::parse_transcript(client_->Get("/sessions/" + id + "/transcript")->body);
    EXPECT_EQ(t.footer["turns"], 4);
    // Each turn's events are contiguous and turns appear in order.
    int last = 0;
    for (const auto& e : t.events) {
        EXPECT_GE(e.turn, last);
        last = e.turn;
    }
    const Json state = get("/sessions/" + id + "/state");
    EXPECT_EQ(state["players"][0]["inventory"].size(), 5u);
    EXPECT_EQ(get("/sessions/" + other + "/state")["turns_completed"], 2);
}

TEST_F(ServerTest, CannedProviderPlaysOffline) {
    launch([](const std::string&, std::uint64_t) { return std::make_unique<llm::CannedGmProvider>(2); });
    const auto id = create("fg-dice");
    say(id, "Jake", "I haggle.");
    const auto events = parse_sse(say(id, "Sir Lukas", "I guard the stall.")->body);
    EXPECT_EQ(events.back().data["status"], "success");
    expect_error_shape(say(id, "Jake", "One more?"), 409);
}

}  // namespace
}  // namespace labyrinth::server
