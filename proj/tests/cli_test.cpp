//
// cli_test.cpp
//
// Copyright 2026 The Salesforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include <gtest/gtest.h>

#include "cli_harness.hpp"
#include "salesforge/agent.hpp"
#include "salesforge/evalkit.hpp"
#include "salesforge/serialize.hpp"
#include "test_support.hpp"

namespace salesforge::cli {
namespace {

using testing::fixture;
using testing::run_cli;
using testing::slurp;
using testing::TempDir;

std::string path_str(const std::filesystem::path& p) { return p.string(); }

TEST(Cli, StatsOnFixtureCorpus) {
    const auto r = run_cli({"stats", "--in", path_str(fixture("stats/corpus.jsonl"))});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("Avg chit-chat turns   5.00\n"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("Avg transition turns  3.00\n"), std::string::npos);
    EXPECT_NE(r.out.find("Avg total turns       8.00\n"), std::string::npos);
    EXPECT_NE(r.out.find("  FindMovie 1\n"), std::string::npos);
}

TEST(Cli, StatsQuarantineExitsOne) {
    TempDir dir;
    const auto r = run_cli({"stats", "--in", path_str(fixture("stats/with_missing.jsonl")), "--json",
                            path_str(dir / "stats.json")});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("stats-c"), std::string::npos);
    const Json j = Json::parse(slurp(dir / "stats.json"));
    EXPECT_EQ(corpus_stats_from_json(j).avg_total_turns, 8.0);
}

TEST(Cli, UsageErrorsExitTwo) {
    for (const std::vector<std::string>& args : std::vector<std::vector<std::string>>{{"frobnicate"}, {}}) {
        const auto r = run_cli(args);
        EXPECT_EQ(r.code, 2);
        EXPECT_NE((r.out + r.err).find("eval-dialogue"), std::string::npos) << r.err;
    }
    const auto bad_flag = run_cli({"stats", "--bogus"});
    EXPECT_EQ(bad_flag.code, 2);
    EXPECT_NE(bad_flag.err.find("--bogus"), std::string::npos);
    EXPECT_NE((bad_flag.out + bad_flag.err).find("Usage: salesforge stats"), std::string::npos);
    const auto bad_seed = run_cli({"--seed", "abc", "stats"});
    EXPECT_EQ(bad_seed.code, 2);
    EXPECT_NE(bad_seed.err.find("--seed"), std::string::npos);
}

TEST(Cli, MissingFilesExitTwo) {
    TempDir dir;
    EXPECT_EQ(run_cli({"stats", "--in", path_str(dir / "nope.jsonl")}).code, 2);
    EXPECT_EQ(run_cli({"--config", path_str(dir / "nope.json"), "stats"}).code, 2);
    EXPECT_EQ(run_cli({"stats"}).code, 2);
}

TEST(Cli, HelpExitsZero) { EXPECT_EQ(run_cli({"--help"}).code, 0); }

TEST(Cli, GenerateIsDeterministic) {
    TempDir dir;
    auto generate = [&](const std::string& tag) {
        return run_cli({"generate", "--seeds", path_str(fixture("generate/seeds.jsonl")), "--mock",
                        path_str(fixture("generate/script.jsonl")), "--out", path_str(dir / (tag + ".jsonl")),
                        "--audit-log", path_str(dir / (tag + ".audit.jsonl")), "--records",
                        path_str(dir / (tag + ".records.jsonl"))});
    };
    const auto a = generate("a");
    const auto b = generate("b");
    EXPECT_EQ(a.code, 1) << a.err;
    EXPECT_EQ(a.out, "generated 2 dialogue(s) from 3 seed(s); 1 quarantined\n");
    EXPECT_EQ(b.out, a.out);
    for (const char* suffix : {".jsonl", ".rejects.jsonl", ".audit.jsonl", ".records.jsonl"}) {
        const std::string ca = slurp(dir / (std::string("a") + suffix));
        EXPECT_FALSE(ca.empty()) << suffix;
        EXPECT_EQ(ca, slurp(dir / (std::string("b") + suffix))) << suffix;
    }
    EXPECT_EQ(read_dialogues(dir / "a.jsonl").size(), 2u);
    EXPECT_EQ(read_jsonl(dir / "a.audit.jsonl").size(), 15u);
}

TEST(Cli, SimulateThenEvaluateDialogues) {
    TempDir dir;
    const auto sim = run_cli({"--seed", "3", "--mock", path_str(fixture("arena/script.jsonl")), "simulate",
                              "--personas", path_str(fixture("arena/personas.jsonl")), "--out",
                              path_str(dir / "sim.jsonl"), "--count", "2", "--repeats", "2", "--max-turns", "8",
                              "--strip-directions"});
    ASSERT_EQ(sim.code, 0) << sim.err;
    EXPECT_EQ(sim.out, "simulated 4 of 4 dialogue(s); 3 handed over, 0 truncated, 0 quarantined\n");
    const auto transcripts = agent::read_transcripts(dir / "sim.jsonl");
    ASSERT_EQ(transcripts.size(), 4u);
    const Json manifest = Json::parse(slurp(dir / "sim.manifest.json"));
    EXPECT_EQ(manifest["config"]["seed"], 3);

    const auto ev = run_cli({"--mock", path_str(fixture("arena/judge_script.jsonl")), "eval-dialogue", "--in",
                             path_str(dir / "sim.jsonl"), "--out-dir", path_str(dir / "reports")});
    ASSERT_EQ(ev.code, 0) << ev.err;
    const Json report = Json::parse(slurp(dir / "reports/report.json"));
    const std::vector<std::pair<std::string, Json>> rows = {
        {"Intent Detection", nullptr}, {"# Turns", 5.0},      {"Proceed TOD Rate", 75.0},
        {"Naturalness", 78.75},        {"Coherence", 80.0},   {"Agent Consistency", 82.5},
        {"Agent Aggressiveness", 37.5}, {"Smoothness", 70.0},
    };
    for (const auto& [metric, value] : rows) {
        bool found = false;
        for (const auto& row : report["rows"]) {
            if (row["metric"] != metric) continue;
            found = true;
            EXPECT_EQ(row["value"], value) << metric;
        }
        EXPECT_TRUE(found) << metric;
    }
    EXPECT_EQ(slurp(dir / "reports/report.txt"), ev.out);
    EXPECT_EQ(read_jsonl(dir / "reports/judge.jsonl").size(), 5u);
}

TEST(Cli, EvalTurnWithGoldFromCorpus) {
    TempDir dir;
    std::string script;
    for (const char* thought :
         {"The user did not implicitly mention any potential intent, I should continue the chit-chat.",
          "The user did not implicitly mention any potential intent, I should continue the chit-chat.",
          "The user implicitly mentioned the intent of FindMovie. I should smoothly pivot the conversation to the "
          "topic of FindMovie.",
          "The user did not change the topic of FindMovie. I should continue the topic.",
          "The user has explicitly shown his/her intent of FindMovie."}) {
        backend::MockEntry e{backend::MockEntry::Match::Queue, {}, std::string("Thought: ") + thought + "\nResponse: ok"};
        script += backend::mock_script_line(e) + "\n";
    }
    testing::spit(dir / "agent.jsonl", script);
    const auto r = run_cli({"--mock", path_str(dir / "agent.jsonl"), "eval-turn", "--corpus",
                            path_str(fixture("movie_dialogue.jsonl")), "--gold-out", path_str(dir / "gold.jsonl"), "--out-dir",
                            path_str(dir / "rep")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(evalkit::read_gold(dir / "gold.jsonl"), evalkit::read_gold(fixture("movie_dialogue_gold.jsonl")));
    const Json report = Json::parse(slurp(dir / "rep/report.json"));
    EXPECT_EQ(report["rows"][0]["value"], 100.0);
    EXPECT_EQ(report["rows"][1]["value"], 80.0);
    EXPECT_EQ(report["rows"][2]["value"], 80.0);
}

TEST(Cli, PersonasBuildOnceThenReuse) {
    TempDir dir;
    std::string script;
    for (const char* p : {"You are Ana, a pilot from Lisbon.", "You are Bruno, a baker who cycles."}) {
        script += backend::mock_script_line({backend::MockEntry::Match::Queue, {}, p}) + "\n";
    }
    testing::spit(dir / "p.jsonl", script);
    const auto first = run_cli({"--mock", path_str(dir / "p.jsonl"), "personas", "--out", path_str(dir / "bank.jsonl"),
                                "-n", "2"});
    ASSERT_EQ(first.code, 0) << first.err;
    const auto again = run_cli({"--mock", path_str(dir / "p.jsonl"), "personas", "--out",
                                path_str(dir / "bank.jsonl"), "-n", "2"});
    EXPECT_EQ(again.code, 0) << again.err;
    EXPECT_EQ(slurp(dir / "bank.jsonl").find("Bruno") != std::string::npos, true);
}

TEST(Cli, ChatStopsAfterHandover) {
    TempDir dir;
    std::string script;
    for (const char* reply :
         {"Thought: The user did not implicitly mention any potential intent, I should continue the chit-chat.\n"
          "Response: Hi! How are you?",
          "Thought: The user has explicitly shown his/her intent of FindRestaurants.\nResponse: Let me look."}) {
        script += backend::mock_script_line({backend::MockEntry::Match::Queue, {}, reply}) + "\n";
    }
    testing::spit(dir / "chat.jsonl", script);
    const auto r = run_cli({"--mock", path_str(dir / "chat.jsonl"), "chat"},
                           "hello\n\nfind me a sushi place\nare you still there?\n");
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("\x1b[2mThought: The user did not implicitly"), std::string::npos);
    EXPECT_NE(r.out.find("Agent: Let me look.\n"), std::string::npos);
    EXPECT_TRUE(r.out.ends_with("[handover] proceeding to the task-oriented agent for FindRestaurants\n")) << r.out;

    const auto hidden = run_cli({"--mock", path_str(dir / "chat.jsonl"), "chat", "--hide-thoughts"}, "hello\n");
    EXPECT_EQ(hidden.out.find("Thought:"), std::string::npos);
}

TEST(Config, OverlaysAndValidation) {
    const RunConfig c = run_config_from_json(Json::parse(R"({
        "backend": {"model_name": "m", "concurrency": 2},
        "judge_backend": {"model_name": "judge"},
        "paths": {"corpus": "c.jsonl"},
        "arena": {"personas": 3, "seed": 9},
        "retry_budget": 4
    })"));
    EXPECT_EQ(section_for(c, BackendRole::Agent).model_name, "m");
    EXPECT_EQ(section_for(c, BackendRole::Judge).model_name, "judge");
    EXPECT_EQ(section_for(c, BackendRole::Judge).temperature, 0.0);
    EXPECT_EQ(section_for(c, BackendRole::User).concurrency, 2u);
    EXPECT_EQ(c.paths.corpus, "c.jsonl");
    EXPECT_EQ(c.arena.personas, 3u);
    EXPECT_EQ(c.arena.seed, 9u);
    EXPECT_EQ(c.retry_budget, 4);

    for (const char* bad : {R"([])", R"({"backend": {"concurrency": 0}})", R"({"arena": {"max_turns": 1}})",
                            R"({"retry_budget": "x"})"}) {
        try {
            run_config_from_json(Json::parse(bad));
            ADD_FAILURE() << bad;
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::Config) << bad;
        }
    }
}

TEST(Config, FileDrivesDefaultPaths) {
    TempDir dir;
    testing::spit(dir / "run.json", Json{{"paths", {{"corpus", path_str(fixture("stats/corpus.jsonl"))}}}}.dump());
    const auto r = run_cli({"--config", path_str(dir / "run.json"), "stats"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("Dialogues             2\n"), std::string::npos);
}

}  // namespace
}  // namespace salesforge::cli
