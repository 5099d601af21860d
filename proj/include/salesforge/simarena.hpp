//
// simarena.hpp
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "salesforge/agent.hpp"
#include "salesforge/backend.hpp"
#include "salesforge/core.hpp"

namespace salesforge::simarena {

struct PersonaRecord {
    std::string id;
    std::string persona_text;

    bool operator==(const PersonaRecord&) const = default;
};

/// "persona-000", "persona-001", ...
std::string persona_id(std::size_t index);

struct PersonaBankOptions {
    SamplingParams sampling{};
    std::uint64_t seed = 0;
    /// Personas at or above this normalized similarity to an earlier one are
    /// regenerated.
    double max_similarity = 0.9;
    int attempts = 3;
};

/// One generation call per persona. Throws Error(DistinctnessFailure) when a
/// persona stays too close to an earlier one after every attempt.
std::vector<PersonaRecord> build_persona_bank(std::size_t n, backend::ChatBackend& backend,
                                              const PersonaBankOptions& options);

/// JSONL {id, persona_text}.
std::vector<PersonaRecord> read_persona_bank(const std::filesystem::path& path);
void write_persona_bank(const std::filesystem::path& path, std::span<const PersonaRecord> bank);

/// Reads the bank when the file exists, otherwise builds and writes it.
std::vector<PersonaRecord> load_or_build_persona_bank(const std::filesystem::path& path, std::size_t n,
                                                      backend::ChatBackend& backend,
                                                      const PersonaBankOptions& options);

/// Uniform over the four kinds.
PreferenceKind draw_preference_kind(std::mt19937_64& rng);

/// Draws the not-interested set without replacement from the trainable
/// intents; the result is kept in whitelist order.
PersonaProfile assign_preferences(std::string persona_text, PreferenceKind kind, std::mt19937_64& rng);

/// Removes *asterisk* stage directions and tidies the leftover whitespace.
std::string strip_stage_directions(std::string_view text);

struct UserSimConfig {
    SamplingParams sampling{};
    bool strip_stage_directions = false;
};

/// Persona system prompt followed by the history seen from the simulator
/// side: agent turns become user messages and user turns assistant messages.
std::string user_step(const PersonaProfile& profile, std::span<const Turn> history, backend::ChatBackend& backend,
                      const UserSimConfig& config);

/// Alternates simulator and agent, user first, until handover or until no
/// room is left for another user/agent exchange within max_turns. Step
/// failures end the dialogue early with truncated=true and the error kept.
/// Throws Error(PreconditionViolation) when max_turns < 2.
agent::Transcript run_dialogue(std::string id, const agent::AgentConfig& agent_config, const PersonaProfile& profile,
                               backend::ChatBackend& agent_backend, backend::ChatBackend& user_backend,
                               std::size_t max_turns, const UserSimConfig& user_config);

struct ArenaConfig {
    std::size_t personas = 50;
    std::size_t repeats = 5;
    /// Counts both speakers.
    std::size_t max_turns = 30;
    std::uint64_t seed = 0;
    bool strip_stage_directions = false;
    std::size_t concurrency = 1;
};

struct ArenaReject {
    std::string dialogue_id;
    std::string message;
};

struct ArenaResult {
    std::vector<agent::Transcript> transcripts;
    std::vector<ArenaReject> rejects;
    /// {config, seeds, counts}
    Json manifest;
};

/// Seed for dialogue `index` of a run seeded with `seed`.
std::uint64_t dialogue_seed(std::uint64_t seed, std::size_t index);

/// Runs personas x repeats dialogues over the first cfg.personas bank entries.
/// Each persona keeps one profile across its repeats. Dialogues are tagged in
/// extra with persona_id, preference, not_interested, repeat and seed.
ArenaResult run_arena(const ArenaConfig& config, std::span<const PersonaRecord> bank,
                      const agent::AgentConfig& agent_config, backend::ChatBackend& agent_backend,
                      backend::ChatBackend& user_backend, const SamplingParams& user_sampling);

}  // namespace salesforge::simarena
