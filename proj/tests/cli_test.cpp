// SPDX-License-Identifier: Apache-2.0
#include "labyrinth/cli/cli.hpp"
#include "labyrinth/engine/scene_init.hpp"
#include "labyrinth/eval/evalkit.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

namespace labyrinth::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result cli(std::vector<std::string> args, const std::string& input = "") {
    args.insert(args.begin(), "labyrinth");
    args.insert(args.begin() + 1, {"--data-dir", testing::data_dir()});
    std::istringstream in(input);
    std::ostringstream out, err;
    const int code = run(args, in, out, err);
    return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("labyrinth-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

void expect_error_document(const Result& r) {
    EXPECT_NE(r.code, 0);
    const Json doc = Json::parse(r.err, nullptr, false);
    ASSERT_FALSE(doc.is_discarded()) << r.err;
    EXPECT_TRUE(doc.contains("error"));
    EXPECT_TRUE(doc.contains("message"));
}

TEST_F(CliTest, UnitTestReportIsDeterministicAcrossTrials) {
    const auto r = cli({"--offline", "--profile", "fg-states", "unit-test", "--trials", "3", "--scripts",
                        testing::data_dir() + "/unit_tests/scripts/adversarial.json", "--report", path("r.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("0.433"), std::string::npos) << r.out;
    const Json report = Json::parse(testing::read_file(path("r.json")));
    const auto& trials = report.at("fg-states");
    ASSERT_EQ(trials.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(trials[i]["score"], "13/30");
        Json a = trials[i], b = trials[0];
        a.erase("trial");
        b.erase("trial");
        EXPECT_EQ(a.dump(), b.dump());
    }
    const auto again = cli({"--offline", "--profile", "fg-states", "unit-test", "--trials", "3", "--scripts",
                            testing::data_dir() + "/unit_tests/scripts/adversarial.json"});
    EXPECT_EQ(again.out, r.out);
}

TEST_F(CliTest, OfflineUnitTestDefaultsToTheCorrectScripts) {
    const auto r = cli({"--offline", "--profile", "fg-all,fg-gen", "unit-test"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("fg-gen"), std::string::npos);
    EXPECT_NE(r.out.find("1.000"), std::string::npos);
    EXPECT_EQ(r.out.find("0."), std::string::npos) << r.out;
}

TEST_F(CliTest, SimulateIsByteIdenticalAcrossRuns) {
    const auto a = cli({"--offline", "--seed", "9", "--profile", "fg-all", "simulate", "--out", path("a")});
    const auto b = cli({"--offline", "--seed", "9", "--profile", "fg-all", "simulate", "--out", path("b")});
    ASSERT_EQ(a.code, 0) << a.err;
    ASSERT_EQ(b.code, 0) << b.err;
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(path("a"))) {
        ++files;
        const auto other = fs::path(path("b")) / e.path().filename();
        EXPECT_EQ(testing::read_file(e.path().string()), testing::read_file(other.string())) << e.path();
        const auto t = engine::read_transcript(e.path().string());
        EXPECT_EQ(t.header["seed"], 9);
        EXPECT_FALSE(t.footer.empty());
    }
    EXPECT_EQ(files, engine::load_scene_pack(testing::data_dir() + "/scenes").size());
}

TEST_F(CliTest, InitSceneRemovesInitializationTables) {
    const auto r = cli({"--offline", "init-scene", "--raw", testing::data_dir() + "/raw_scenes/goblin-market.json",
                        "--script", testing::data_dir() + "/raw_scenes/goblin-market.script.json", "--out",
                        path("scene.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    auto scene = state::scene_from_json(Json::parse(testing::read_file(path("scene.json"))));
    ASSERT_TRUE(scene.ok());
    EXPECT_TRUE(state::validate(scene.value()).empty());
    EXPECT_FALSE(scene.value().random_tables.count("Market oddities"));
    EXPECT_FALSE(scene.value().random_tables.count("Stall keepers"));
    EXPECT_TRUE(scene.value().random_tables.count("Sounds"));
    const Json report = Json::parse(r.out);
    for (const auto& t : report["tables"]) {
        if (t["usage"] == "objects") {
            for (const auto& d : t["drawn"]) EXPECT_TRUE(scene.value().environment.count(d.get<std::string>()));
        }
    }
}

TEST_F(CliTest, InitSceneOfflineNeedsAScript) {
    expect_error_document(cli({"--offline", "init-scene", "--raw", testing::data_dir() + "/raw_scenes/goblin-market.json"}));
}

TEST_F(CliTest, StatsOverBundledTranscripts) {
    const auto r = cli({"stats", testing::data_dir() + "/transcripts", "--json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const Json s = Json::parse(r.out);
    std::vector<engine::Transcript> ts;
    for (const auto& e : fs::directory_iterator(testing::data_dir() + "/transcripts")) {
        ts.push_back(engine::read_transcript(e.path().string()));
    }
    EXPECT_EQ(s, eval::to_json(eval::transcript_stats(ts)));
    EXPECT_EQ(s["total_scripts"], ts.size());
    const auto table = cli({"stats", testing::data_dir() + "/transcripts"});
    EXPECT_NE(table.out.find("Average utterances per script"), std::string::npos);
}

TEST_F(CliTest, CreateCharacterUsesTheCatalog) {
    const auto r = cli({"create-character", "--name", "Ada", "--kin", "Goblin", "--goal", "Steal a crown.", "--trait",
                        "Clever", "--flaw", "Curious"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto p = state::player_from_json(Json::parse(r.out));
    ASSERT_TRUE(p.ok());
    EXPECT_TRUE(p.value().traits.count("Clever"));
    EXPECT_TRUE(p.value().inventory.count("Lockpicks"));

    const auto bad = cli({"create-character", "--name", "Ada", "--kin", "Elf", "--goal", "x", "--trait", "Clever",
                          "--flaw", "Curious"});
    expect_error_document(bad);
    EXPECT_EQ(Json::parse(bad.err)["errors"][0]["path"], "kin");
    EXPECT_EQ(cli({"create-character", "--list"}).code, 0);
}

TEST_F(CliTest, PlayReadsPlayerLinesUntilQuit) {
    const auto r = cli({"--offline", "--profile", "fg-states", "play", "--scene", "oubliette", "--out", path("t.jsonl")},
                       "Nib: I look for a way out.\n/state\nJake: I climb.\n/quit\n");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("GM:"), std::string::npos);
    EXPECT_NE(r.out.find("\"turns_completed\": 1"), std::string::npos);
    const auto t = engine::read_transcript(path("t.jsonl"));
    EXPECT_EQ(t.footer["turns"], 2);
    std::vector<std::string> speakers;
    for (const auto& e : t.events) {
        if (e.kind == llm::EventKind::PlayerMessage) speakers.push_back(e.speaker);
    }
    EXPECT_EQ(speakers, (std::vector<std::string>{"Nib", "Jake"}));
}

TEST_F(CliTest, FailuresPrintMachineReadableErrors) {
    expect_error_document(cli({}));
    expect_error_document(cli({"stats", path("missing")}));
    expect_error_document(cli({"--profile", "fg-nope", "--offline", "unit-test"}));
    const auto usage = cli({"unit-test", "--trials", "0"});
    EXPECT_EQ(usage.code, 2);
    expect_error_document(usage);
}

TEST_F(CliTest, OfflineForbidsTheNetworkProvider) {
    const auto r = cli({"--offline", "--config", testing::data_dir() + "/configs/openai.json", "simulate", "--out",
                        path("x")});
    expect_error_document(r);
    EXPECT_FALSE(fs::exists(path("x")));
    EXPECT_THROW(make_provider({{"kind", "openai"}}, true), ValidationFailure);
    EXPECT_NE(make_provider({}, true), nullptr);
}

TEST(RunConfigTest, ParsesAndRejectsFields) {
    const auto ok = run_config_from_json(Json::parse(testing::read_file(testing::data_dir() + "/configs/offline.json")));
    ASSERT_TRUE(ok.ok());
    EXPECT_EQ(ok.value().profile, ProfileId::FgAll);
    EXPECT_EQ(ok.value().provider["kind"], "canned");
    EXPECT_EQ(ok.value().engine.prompt.rule_k, 5u);

    const auto bad = run_config_from_json({{"profile", "fg-xyz"}, {"colour", "red"}, {"provider", {{"kind", "psychic"}}}});
    ASSERT_FALSE(bad.ok());
    std::set<std::string> paths;
    for (const auto& e : bad.errors()) paths.insert(e.path);
    EXPECT_EQ(paths, (std::set<std::string>{"profile", "colour", "provider.kind"}));
}

}  // namespace
}  // namespace labyrinth::cli
