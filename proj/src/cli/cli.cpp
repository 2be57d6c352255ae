// SPDX-License-Identifier: Apache-2.0
#include "labyrinth/cli/cli.hpp"

#include "labyrinth/engine/game_master.hpp"
#include "labyrinth/engine/scene_init.hpp"
#include "labyrinth/eval/evalkit.hpp"
#include "labyrinth/llm/canned.hpp"
#include "labyrinth/llm/hashed_embedder.hpp"
#include "labyrinth/llm/openai.hpp"
#include "labyrinth/llm/scripted.hpp"
#include "labyrinth/server/server.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#ifndef LABYRINTH_DATA_DIR
#define LABYRINTH_DATA_DIR "data"
#endif

namespace labyrinth::cli {

namespace fs = std::filesystem;

namespace {

Json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    Json doc = Json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw Error(path + " is not valid JSON");
    return doc;
}

void write_file(const std::string& path, const std::string& text) {
    const auto parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << text;
    if (!out) throw Error("failed writing " + path);
}

std::string pretty(const Json& doc) { return doc.dump(2, ' ', false, Json::error_handler_t::replace) + "\n"; }

Json error_json(const std::string& code, const std::string& message, const ValidationErrors& errors = {}) {
    Json doc = {{"error", code}, {"message", message}};
    if (!errors.empty()) {
        doc["errors"] = Json::array();
        for (const auto& e : errors) doc["errors"].push_back({{"path", e.path}, {"message", e.message}});
    }
    return doc;
}

std::vector<ProfileId> parse_profiles(const std::string& list) {
    std::vector<ProfileId> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto id = parse_profile(item);
        if (!id) throw ValidationFailure("profile", "unknown profile " + item);
        out.push_back(*id);
    }
    if (out.empty()) throw ValidationFailure("profile", "no profile given");
    return out;
}

struct Globals {
    std::string config_path;
    std::uint64_t seed = 1;
    std::string profile;
    bool offline = false;
    std::string data_dir = LABYRINTH_DATA_DIR;

    RunConfig config() const {
        RunConfig c = config_path.empty() ? RunConfig{} : load_run_config(config_path);
        if (!profile.empty()) c.profile = parse_profiles(profile).front();
        return c;
    }
    std::vector<ProfileId> profiles() const {
        return profile.empty() ? std::vector<ProfileId>{config().profile} : parse_profiles(profile);
    }
    std::string data(const std::string& rel) const { return (fs::path(data_dir) / rel).string(); }
};

state::SceneState scene_arg(const Globals& g, const std::string& arg, std::string& id) {
    if (fs::exists(arg) && fs::is_regular_file(arg)) {
        auto parsed = state::scene_from_json(read_json(arg));
        if (!parsed) throw ValidationFailure(parsed.errors());
        id = fs::path(arg).stem().string();
        return parsed.value();
    }
    for (auto& s : engine::load_scene_pack(g.data("scenes"))) {
        if (s.id == arg) {
            id = s.id;
            return s.scene;
        }
    }
    throw ValidationFailure("scene", "no scene file or pack scene named " + arg);
}

std::vector<std::string> transcript_files(const std::vector<std::string>& inputs) {
    std::vector<std::string> files;
    for (const auto& p : inputs) {
        if (fs::is_directory(p)) {
            for (const auto& e : fs::directory_iterator(p)) {
                if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path().string());
            }
        } else if (fs::is_regular_file(p)) {
            files.push_back(p);
        } else {
            throw Error("no transcript file or directory " + p);
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

void print_event(std::ostream& out, const llm::ChatEvent& e) {
    using llm::EventKind;
    switch (e.kind) {
        case EventKind::PlayerMessage:
            out << e.speaker << ": " << e.content << "\n";
            break;
        case EventKind::GmMessage:
            if (!e.content.empty()) out << "GM: " << e.content << "\n";
            break;
        case EventKind::FunctionCallMsg:
            if (e.call) out << "  [call] " << e.call->name << " " << e.call->arguments.dump() << "\n";
            break;
        case EventKind::FunctionResultMsg:
            out << "  [" << (e.error ? "failed" : "result") << "] " << e.content << "\n";
            break;
        case EventKind::SummaryMsg:
            out << "  [summary] " << e.content << "\n";
            break;
        case EventKind::SystemMsg:
            out << "  [system] " << e.content << "\n";
            break;
    }
}

struct Commands {
    Commands(std::istream& i, std::ostream& o) : in(i), out(o) {}

    Globals g;
    std::istream& in;
    std::ostream& out;

    // play

    std::string play_scene = "goblin-market";
    std::string play_party;
    std::string play_out;

    void play() {
        const RunConfig rc = g.config();
        std::string scene_id;
        auto scene = scene_arg(g, play_scene, scene_id);
        const auto party = engine::load_party(play_party.empty() ? g.data("party.json") : play_party);
        auto provider = make_provider(rc.provider, g.offline);
        llm::HashedEmbedder embedder;
        const auto rules = retrieval::RuleStore::load(g.data("rules/rule_summary.txt"), embedder);
        engine::GameMaster gm(*provider, rules, &embedder);
        engine::Session session(scene_id, scene, party, GmSettingProfile::make(rc.profile), rc.engine, g.seed);
        const auto names = session.player_names();

        out << session.scene().chapter << ": " << session.scene().scene << "\n";
        for (const auto& line : session.scene().scene_summary) out << line << "\n";
        out << "Players: ";
        for (std::size_t i = 0; i < names.size(); ++i) out << (i ? ", " : "") << names[i];
        out << "\nType \"Name: message\", /state or /quit.\n";

        const engine::EventSink sink = [&](const llm::ChatEvent& e) {
            if (e.kind != llm::EventKind::PlayerMessage) print_event(out, e);
        };
        std::string line;
        while (session.status() == engine::Status::Running &&
               session.turns_completed() < session.config().max_turns && out << "> " && std::getline(in, line)) {
            if (line == "/quit") break;
            if (line == "/state") {
                out << pretty(server::session_state_json(session));
                continue;
            }
            if (line.empty()) continue;
            std::string player = names.front();
            std::string text = line;
            if (const auto colon = line.find(':'); colon != std::string::npos) {
                const auto who = line.substr(0, colon);
                if (std::find(names.begin(), names.end(), who) != names.end()) {
                    player = who;
                    text = line.substr(colon + 1);
                    text.erase(0, text.find_first_not_of(' '));
                }
            }
            gm.gm_turn(session, {{player, text}}, sink);
            gm.check_outcome(session, sink);
            out << "(clock " << session.clock().hours_elapsed << "/" << session.clock().limit << ")\n";
        }
        out << "Scene ended: " << engine::status_name(session.status());
        if (!session.end_reason().empty()) out << " (" << session.end_reason() << ")";
        out << "\n";
        if (!play_out.empty()) write_file(play_out, engine::to_jsonl(session));
    }

    // simulate

    std::string sim_scenes;
    std::string sim_party;
    std::string sim_out;
    int sim_max_turns = 0;

    void simulate() {
        RunConfig rc = g.config();
        if (sim_max_turns > 0) rc.engine.max_turns = sim_max_turns;
        const auto pack = engine::load_scene_pack(sim_scenes.empty() ? g.data("scenes") : sim_scenes);
        const auto party = engine::load_party(sim_party.empty() ? g.data("party.json") : sim_party);
        llm::HashedEmbedder embedder;
        const auto rules = retrieval::RuleStore::load(g.data("rules/rule_summary.txt"), embedder);
        for (const auto& s : pack) {
            auto provider = make_provider(rc.provider, g.offline);
            engine::GameMaster gm(*provider, rules, &embedder);
            engine::Session session(s.id, s.scene, party, GmSettingProfile::make(rc.profile), rc.engine, g.seed);
            engine::ProviderAgent agent(*provider);
            engine::PlayerAgent* agents[] = {&agent};
            const auto reason = engine::run_scene(gm, session, agents);
            const auto path = (fs::path(sim_out) / (s.id + ".jsonl")).string();
            write_file(path, engine::to_jsonl(session));
            out << Json{{"scene", s.id},
                        {"status", engine::status_name(session.status())},
                        {"turns", session.turns_completed()},
                        {"end_reason", reason},
                        {"transcript", path}}
                       .dump()
                << "\n";
        }
    }

    // init-scene

    std::string init_raw;
    std::string init_out;
    std::string init_script;

    void init_scene() {
        const RunConfig rc = g.config();
        auto raw = engine::raw_scene_from_json(read_json(init_raw));
        if (!raw) throw ValidationFailure(raw.errors());
        Json spec = rc.provider;
        if (!init_script.empty()) spec = {{"kind", "scripted"}, {"script", init_script}};
        if (g.offline && spec.value("kind", std::string()) != "scripted") {
            throw ValidationFailure("script", "offline scene initialization needs a scripted provider (--script)");
        }
        auto provider = make_provider(spec, g.offline);
        functions::SeededRandom rng(g.seed);
        const auto result =
            engine::init_scene(raw.value(), retrieval::RuleStore::read_sentences(g.data("rules/rule_summary.txt")),
                               *provider, rng);
        Json tables = Json::array();
        for (const auto& t : result.tables) {
            tables.push_back({{"table", t.table},
                              {"usage", std::string(engine::table_usage_name(t.usage))},
                              {"count", t.count},
                              {"drawn", t.drawn}});
        }
        const Json scene = state::to_json(result.scene);
        if (init_out.empty()) {
            out << pretty(scene);
        } else {
            write_file(init_out, pretty(scene));
            out << pretty({{"scene", init_out}, {"tables", tables}, {"repaired", result.repaired}});
        }
    }

    // create-character

    engine::CharacterChoices choices;
    std::string catalog_path;
    bool list_catalog = false;

    void create_character() {
        const auto catalog = engine::load_catalog(catalog_path.empty() ? g.data("catalog/characters.json") : catalog_path);
        if (list_catalog) {
            out << pretty(engine::to_json(catalog));
            return;
        }
        auto made = engine::create_character(choices, catalog);
        if (!made) throw ValidationFailure(made.errors());
        out << pretty(state::to_json(made.value()));
    }

    // unit-test

    std::string suite_path;
    std::string scripts_path;
    int trials = 1;
    std::string report_path;

    void unit_test() {
        const RunConfig rc = g.config();
        const auto cases = eval::load_suite(suite_path.empty() ? g.data("unit_tests/manifest.json") : suite_path);
        eval::ProviderFactory factory;
        const bool scripted = !scripts_path.empty() || (g.offline && !rc.provider.contains("kind"));
        if (scripted) {
            factory = eval::scripted_factory(
                read_json(scripts_path.empty() ? g.data("unit_tests/scripts/correct.json") : scripts_path));
        } else {
            const Json spec = rc.provider;
            const bool offline = g.offline;
            factory = [spec, offline](const eval::UnitTestCase&, int) { return make_provider(spec, offline); };
        }
        llm::HashedEmbedder embedder;
        const auto rules = retrieval::RuleStore::load(g.data("rules/rule_summary.txt"), embedder);
        const eval::HarnessSetup setup{rules, &embedder, rc.engine};
        std::vector<std::pair<ProfileId, std::vector<eval::SuiteReport>>> results;
        Json report = Json::object();
        for (const auto id : g.profiles()) {
            auto reports = eval::score_suite(cases, GmSettingProfile::make(id), factory, trials, setup);
            Json list = Json::array();
            for (const auto& r : reports) list.push_back(eval::to_json(r));
            report[std::string(profile_name(id))] = list;
            results.emplace_back(id, std::move(reports));
        }
        out << eval::format_score_table(results);
        if (!report_path.empty()) write_file(report_path, pretty(report));
    }

    // stats

    std::vector<std::string> stats_inputs;
    bool stats_json = false;

    void stats() {
        std::vector<engine::Transcript> transcripts;
        for (const auto& f : transcript_files(stats_inputs)) transcripts.push_back(engine::read_transcript(f));
        const auto s = eval::transcript_stats(transcripts);
        out << (stats_json ? pretty(eval::to_json(s)) : eval::format_stats_table(s));
    }

    // serve

    std::string host = "127.0.0.1";
    int port = 8080;

    void serve() {
        const RunConfig rc = g.config();
        server::ServerOptions options;
        options.data_dir = g.data_dir;
        options.engine = rc.engine;
        options.default_profile = rc.profile;
        const Json spec = rc.provider;
        const bool offline = g.offline;
        options.provider_factory = [spec, offline](const std::string&, std::uint64_t) {
            return make_provider(spec, offline);
        };
        server::SessionServer srv(std::move(options));
        out << Json{{"listening", host + ":" + std::to_string(port)}}.dump() << std::endl;
        srv.listen(host, port);
    }
};

}  // namespace

Checked<RunConfig> run_config_from_json(const Json& doc) {
    if (!doc.is_object()) return ValidationErrors{{"", "config must be an object"}};
    RunConfig c;
    ValidationErrors errors;
    for (const auto& [key, value] : doc.items()) {
        if (key == "profile") {
            const auto id = value.is_string() ? parse_profile(value.get<std::string>()) : std::nullopt;
            id ? void(c.profile = *id) : errors.push_back({"profile", "unknown profile"});
        } else if (key == "engine") {
            auto parsed = engine::engine_config_from_json(value);
            if (parsed) {
                c.engine = parsed.value();
            } else {
                for (const auto& e : parsed.errors()) errors.push_back({"engine." + e.path, e.message});
            }
        } else if (key == "prompt" || key == "provider") {
        } else {
            errors.push_back({key, "unknown field"});
        }
    }
    if (doc.contains("prompt")) {
        auto parsed = prompt::prompt_config_from_json(doc["prompt"]);
        if (parsed) {
            c.engine.prompt = parsed.value();
        } else {
            for (const auto& e : parsed.errors()) errors.push_back({"prompt." + e.path, e.message});
        }
    }
    if (doc.contains("provider")) {
        const Json& p = doc["provider"];
        if (!p.is_object()) {
            errors.push_back({"provider", "expected an object"});
        } else {
            const std::string kind = p.value("kind", std::string());
            if (kind != "canned" && kind != "scripted" && kind != "openai") {
                errors.push_back({"provider.kind", "must be canned, scripted or openai"});
            }
            c.provider = p;
        }
    }
    if (!errors.empty()) return errors;
    return c;
}

RunConfig load_run_config(const std::string& path) {
    auto parsed = run_config_from_json(read_json(path));
    if (!parsed) throw ValidationFailure(parsed.errors());
    return parsed.value();
}

std::unique_ptr<llm::LlmProvider> make_provider(const Json& given, bool offline) {
    const Json spec = given.is_object() ? given : Json::object();
    const std::string kind = spec.value("kind", std::string(offline ? "canned" : "openai"));
    if (kind == "canned") return std::make_unique<llm::CannedGmProvider>(spec.value("judge_success_after", 4));
    if (kind == "scripted") {
        auto p = std::make_unique<llm::ScriptedProvider>();
        if (spec.contains("script")) p->load(read_json(spec["script"].get<std::string>()));
        if (spec.contains("turns")) p->load(spec["turns"]);
        return p;
    }
    if (kind == "openai") {
        if (offline) throw ValidationFailure("provider.kind", "offline runs cannot use the openai provider");
        llm::OpenAiConfig base;
        base.base_url = spec.value("base_url", base.base_url);
        base.model = spec.value("model", base.model);
        base.embedding_model = spec.value("embedding_model", base.embedding_model);
        base.max_retries = spec.value("max_retries", base.max_retries);
        base.timeout = std::chrono::seconds(spec.value("timeout_seconds", static_cast<int>(base.timeout.count())));
        return std::make_unique<llm::OpenAiProvider>(llm::OpenAiConfig::from_env(base));
    }
    throw ValidationFailure("provider.kind", "unknown provider kind " + kind);
}

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    Commands cmd(in, out);
    CLI::App app{"Game-master engine for the Labyrinth tabletop adventure game."};
    app.name(args.empty() ? "labyrinth" : args.front());
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--config", cmd.g.config_path, "Run configuration file")->check(CLI::ExistingFile);
    app.add_option("--seed", cmd.g.seed, "Random seed");
    app.add_option("--profile", cmd.g.profile, "GM setting profile (comma-separated for unit-test)");
    app.add_flag("--offline", cmd.g.offline, "Use canned or scripted providers only");
    app.add_option("--data-dir", cmd.g.data_dir, "Directory with scenes, rules, catalog and suites");

    auto* play = app.add_subcommand("play", "Play a scene interactively in the terminal");
    play->add_option("--scene", cmd.play_scene, "Pack scene id or scene file");
    play->add_option("--party", cmd.play_party, "Party file (list of player states)");
    play->add_option("--out", cmd.play_out, "Write the transcript here");
    play->callback([&] { cmd.play(); });

    auto* sim = app.add_subcommand("simulate", "Self-play every scene of a pack and export transcripts");
    sim->add_option("--scenes", cmd.sim_scenes, "Scene pack directory");
    sim->add_option("--party", cmd.sim_party, "Party file");
    sim->add_option("--out", cmd.sim_out, "Transcript directory")->required();
    sim->add_option("--max-turns", cmd.sim_max_turns, "Turn limit per scene");
    sim->callback([&] { cmd.simulate(); });

    auto* init = app.add_subcommand("init-scene", "Turn a raw book scene into a scene state");
    init->add_option("--raw", cmd.init_raw, "Raw scene file")->required()->check(CLI::ExistingFile);
    init->add_option("--out", cmd.init_out, "Scene state output file");
    init->add_option("--script", cmd.init_script, "Scripted provider document")->check(CLI::ExistingFile);
    init->callback([&] { cmd.init_scene(); });

    auto* cc = app.add_subcommand("create-character", "Build a player from the kin catalog");
    cc->add_option("--name", cmd.choices.name);
    cc->add_option("--kin", cmd.choices.kin);
    cc->add_option("--goal", cmd.choices.goal);
    cc->add_option("--trait", cmd.choices.trait);
    cc->add_option("--flaw", cmd.choices.flaw);
    cc->add_option("--catalog", cmd.catalog_path, "Catalog file");
    cc->add_flag("--list", cmd.list_catalog, "Print the catalog instead");
    cc->callback([&] { cmd.create_character(); });

    auto* ut = app.add_subcommand("unit-test", "Score the state-update suite");
    ut->add_option("--suite", cmd.suite_path, "Suite manifest");
    ut->add_option("--scripts", cmd.scripts_path, "Per-case scripted provider documents");
    ut->add_option("--trials", cmd.trials, "Trials per profile")->check(CLI::PositiveNumber);
    ut->add_option("--report", cmd.report_path, "Write the JSON report here");
    ut->callback([&] { cmd.unit_test(); });

    auto* st = app.add_subcommand("stats", "Dataset statistics over transcripts");
    st->add_option("inputs", cmd.stats_inputs, "Transcript files or directories")->required();
    st->add_flag("--json", cmd.stats_json, "Print JSON");
    st->callback([&] { cmd.stats(); });

    auto* sv = app.add_subcommand("serve", "Start the HTTP session API");
    sv->add_option("--host", cmd.host);
    sv->add_option("--port", cmd.port);
    sv->callback([&] { cmd.serve(); });

    std::vector<std::string> argv_store(args.begin(), args.end());
    if (argv_store.empty()) argv_store.push_back("labyrinth");
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << error_json("usage", e.what()).dump() << "\n";
        return 2;
    } catch (const ValidationFailure& e) {
        err << error_json("validation", e.what(), e.errors()).dump() << "\n";
        return 1;
    } catch (const llm::ProviderError& e) {
        err << error_json("provider", e.what()).dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << error_json("error", e.what()).dump() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace labyrinth::cli
