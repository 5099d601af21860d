//
// simarena_test.cpp
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

#include <set>

#include "salesforge/simarena.hpp"
#include "salesforge/text.hpp"
#include "test_support.hpp"

namespace salesforge::simarena {
namespace {

using testing::queue_mock;

const PersonaProfile kMaya{"You are Maya, a nurse who loves gardening.", PreferenceKind::NoPreference, {}};

std::string cot(const Policy& p, const std::string& response) {
    return "Thought: " + agent::render_thought(p) + "\nResponse: " + response;
}

TEST(PersonaBank, IdsAndDistinctPersonas) {
    EXPECT_EQ(persona_id(0), "persona-000");
    EXPECT_EQ(persona_id(42), "persona-042");
    auto mock = queue_mock({"You are Ana, a pilot.", "You are Ana, a pilot.", "You are Bruno, a baker in Lyon who cycles."});
    const auto bank = build_persona_bank(2, *mock, PersonaBankOptions{});
    ASSERT_EQ(bank.size(), 2u);
    EXPECT_EQ(bank[1], (PersonaRecord{"persona-001", "You are Bruno, a baker in Lyon who cycles."}));

    const auto calls = mock->calls();
    ASSERT_EQ(calls.size(), 3u);
    std::set<std::int64_t> seeds;
    for (const auto& c : calls) seeds.insert(c.seed.value());
    EXPECT_EQ(seeds.size(), 3u);
}

TEST(PersonaBank, DistinctnessFailureAfterAttempts) {
    auto mock = queue_mock({"You are Ana.", "You are Ana.", "You are Ana!", "you are ana."});
    try {
        build_persona_bank(2, *mock, PersonaBankOptions{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DistinctnessFailure);
        EXPECT_EQ(e.raw(), "you are ana.");
    }
    auto empty = queue_mock({});
    EXPECT_THROW(build_persona_bank(0, *empty, PersonaBankOptions{}), Error);
}

TEST(PersonaBank, LoadOrBuildReusesTheFile) {
    testing::TempDir dir;
    auto mock = queue_mock({"You are Ana, a pilot.", "You are Bruno, a baker."});
    const auto built = load_or_build_persona_bank(dir / "bank.jsonl", 2, *mock, PersonaBankOptions{});
    EXPECT_EQ(read_persona_bank(dir / "bank.jsonl"), built);
    auto none = queue_mock({});
    EXPECT_EQ(load_or_build_persona_bank(dir / "bank.jsonl", 2, *none, PersonaBankOptions{}), built);
    EXPECT_TRUE(none->calls().empty());
}

TEST(Preferences, SizesMatchKindAndStayTrainable) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 500; ++i) {
        const PreferenceKind kind = draw_preference_kind(rng);
        const PersonaProfile p = assign_preferences("x", kind, rng);
        EXPECT_EQ(p.not_interested.size(), not_interested_count(kind));
        EXPECT_TRUE(std::is_sorted(p.not_interested.begin(), p.not_interested.end()));
        EXPECT_EQ(std::set<Intent>(p.not_interested.begin(), p.not_interested.end()).size(), p.not_interested.size());
        for (Intent it : p.not_interested) EXPECT_TRUE(trainable(it));
    }
}

TEST(Preferences, AllKindsAppear) {
    std::mt19937_64 rng(1);
    std::set<PreferenceKind> seen;
    for (int i = 0; i < 200; ++i) seen.insert(draw_preference_kind(rng));
    EXPECT_EQ(seen.size(), 4u);
}

TEST(Preferences, PinnedDrawsForSeed42) {
    std::mt19937_64 rng(42);
    std::vector<std::string> drawn;
    for (int i = 0; i < 4; ++i) {
        const PreferenceKind kind = draw_preference_kind(rng);
        std::string line(to_string(kind));
        for (Intent it : assign_preferences("x", kind, rng).not_interested) line += " " + std::string(canonical_name(it));
        drawn.push_back(line);
    }
    EXPECT_EQ(drawn, (std::vector<std::string>{"not_interested_4 FindRestaurants LookupMusic SearchHotel FindEvents",
                                               "no_preference", "no_preference",
                                               "not_interested_2 FindRestaurants LookupMusic"}));
}

TEST(StageDirections, Stripped) {
    EXPECT_EQ(strip_stage_directions("*waters the plants* Not much, just pottering about."),
              "Not much, just pottering about.");
    EXPECT_EQ(strip_stage_directions("Sure *smiles* thing\n*nods*\nok"), "Sure thing\nok");
    EXPECT_EQ(strip_stage_directions("2 * 3 is six"), "2 * 3 is six");
}

TEST(UserSim, FlipsRolesAndUsesPersonaPrompt) {
    auto mock = queue_mock({"  *laughs* Fine, thanks.  "});
    const auto history = testing::numbered_dialogue("h", 2).turns;
    UserSimConfig cfg;
    cfg.strip_stage_directions = true;
    EXPECT_EQ(user_step(kMaya, history, *mock, cfg), "Fine, thanks.");
    const auto msgs = mock->calls()[0].messages;
    ASSERT_EQ(msgs.size(), 3u);
    EXPECT_EQ(msgs[0].role, backend::Role::System);
    EXPECT_NE(msgs[0].content.find(kMaya.persona_text), std::string::npos);
    EXPECT_EQ(msgs[1].role, backend::Role::Assistant);
    EXPECT_EQ(msgs[2].role, backend::Role::User);
    EXPECT_EQ(msgs[2].content, "turn 1");
}

TEST(Dialogue, EndsAtHandover) {
    auto user = queue_mock({"Hi.", "I might watch a film.", "Find me a comedy tonight."});
    auto agent_b = queue_mock({cot(Policy::continue_chit_chat(), "Hi!"),
                               cot(Policy::pivot_to_intent(Intent::FindMovie), "Any genre in mind?"),
                               cot(Policy::explicit_intent(Intent::FindMovie), "On it.")});
    const auto t = run_dialogue("d", agent::AgentConfig{}, kMaya, *agent_b, *user, 30, UserSimConfig{});
    EXPECT_EQ(t.dialogue.turns.size(), 6u);
    EXPECT_TRUE(t.handover);
    EXPECT_FALSE(t.truncated);
    EXPECT_EQ(t.dialogue.intent, Intent::FindMovie);
    EXPECT_EQ(t.dialogue.source, DialogueSource::Simulated);
    ASSERT_EQ(t.steps.size(), 3u);
    EXPECT_EQ(t.steps[2].turn_index, 5u);
    EXPECT_EQ(t.dialogue.turns.front().speaker, Speaker::User);
}

TEST(Dialogue, StopsAtMaxTurns) {
    std::vector<std::string> u, a;
    for (int i = 0; i < 10; ++i) {
        u.push_back("small talk " + std::to_string(i));
        a.push_back(cot(Policy::continue_chit_chat(), "reply " + std::to_string(i)));
    }
    auto user = queue_mock(u);
    auto agent_b = queue_mock(a);
    const auto t = run_dialogue("d", agent::AgentConfig{}, kMaya, *agent_b, *user, 7, UserSimConfig{});
    EXPECT_EQ(t.dialogue.turns.size(), 6u);
    EXPECT_FALSE(t.handover);
    EXPECT_FALSE(t.truncated);
    EXPECT_EQ(t.dialogue.turns.back().speaker, Speaker::Agent);

    EXPECT_THROW(run_dialogue("d", agent::AgentConfig{}, kMaya, *agent_b, *user, 1, UserSimConfig{}), Error);
}

TEST(Dialogue, StepFailureTruncates) {
    auto user = queue_mock({"Hi.", "Still here."});
    auto agent_b = queue_mock({cot(Policy::continue_chit_chat(), "Hello!"), "no labels at all"});
    const auto t = run_dialogue("d", agent::AgentConfig{}, kMaya, *agent_b, *user, 30, UserSimConfig{});
    EXPECT_TRUE(t.truncated);
    EXPECT_EQ(t.dialogue.turns.size(), 2u);
    EXPECT_TRUE(t.error.starts_with("ParseFailure: "));
}

ArenaResult fixture_arena(std::uint64_t seed = 3) {
    const auto bank = read_persona_bank(testing::fixture("arena/personas.jsonl"));
    auto mock = backend::load_mock_script(testing::fixture("arena/script.jsonl"));
    ArenaConfig cfg;
    cfg.personas = 2;
    cfg.repeats = 2;
    cfg.max_turns = 8;
    cfg.seed = seed;
    cfg.strip_stage_directions = true;
    ArenaResult r = run_arena(cfg, bank, agent::AgentConfig{}, *mock, *mock, SamplingParams{});
    EXPECT_EQ(mock->remaining(), 0u);
    return r;
}

TEST(Arena, FixtureRunProducesFourTaggedDialogues) {
    const ArenaResult r = fixture_arena();
    ASSERT_EQ(r.transcripts.size(), 4u);
    EXPECT_TRUE(r.rejects.empty());
    const std::vector<std::size_t> lengths{6, 8, 2, 4};
    const std::vector<bool> handover{true, false, true, true};
    for (std::size_t i = 0; i < 4; ++i) {
        const auto& t = r.transcripts[i];
        EXPECT_EQ(t.dialogue.turns.size(), lengths[i]) << t.dialogue.id;
        EXPECT_EQ(t.handover, handover[i]) << t.dialogue.id;
        EXPECT_EQ(t.dialogue.extra["repeat"], i % 2);
        EXPECT_EQ(t.dialogue.extra["persona_id"], persona_id(i / 2));
        EXPECT_EQ(t.dialogue.extra["seed"], dialogue_seed(3, i));
    }
    EXPECT_EQ(r.transcripts[0].dialogue.id, "persona-000-r0");
    EXPECT_EQ(r.transcripts[3].dialogue.id, "persona-001-r1");
    EXPECT_EQ(r.transcripts[0].dialogue.extra["preference"], r.transcripts[1].dialogue.extra["preference"]);
    EXPECT_EQ(r.transcripts[1].dialogue.turns[2].text, "Not much, just pottering about.");
    EXPECT_EQ(r.transcripts[3].steps.back().step.warnings.size(), 1u);

    EXPECT_EQ(r.manifest["counts"]["expected"], 4);
    EXPECT_EQ(r.manifest["counts"]["handover"], 3);
    EXPECT_EQ(r.manifest["config"]["agent_mode"], "cot");
    EXPECT_EQ(r.manifest["seeds"].size(), 4u);
}

TEST(Arena, SameSeedSameOutput) {
    const ArenaResult a = fixture_arena(11);
    const ArenaResult b = fixture_arena(11);
    EXPECT_EQ(a.transcripts, b.transcripts);
    EXPECT_EQ(a.manifest, b.manifest);
    EXPECT_NE(fixture_arena(12).manifest["seeds"], a.manifest["seeds"]);
}

TEST(Arena, SeedsDiffer) {
    std::set<std::uint64_t> seen;
    for (std::size_t i = 0; i < 250; ++i) seen.insert(dialogue_seed(0, i));
    EXPECT_EQ(seen.size(), 250u);
}

TEST(Arena, BankPreconditions) {
    auto mock = queue_mock({});
    ArenaConfig cfg;
    try {
        run_arena(cfg, {}, agent::AgentConfig{}, *mock, *mock, SamplingParams{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::EmptyBank);
    }
    const std::vector<PersonaRecord> one{{"persona-000", "You are Ana."}};
    try {
        run_arena(cfg, one, agent::AgentConfig{}, *mock, *mock, SamplingParams{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::PreconditionViolation);
    }
}

}  // namespace
}  // namespace salesforge::simarena
