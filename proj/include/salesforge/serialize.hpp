//
// serialize.hpp
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

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "salesforge/core.hpp"

namespace salesforge {

// JSON codecs for the core records. Every to_json output parses back through
// the matching from_json into an equal value.

Json to_json(const Turn& turn);
Json to_json(const Dialogue& dialogue);
Dialogue dialogue_from_json(const Json& j);

Json to_json(const Policy& policy);
Policy policy_from_json(const Json& j);

Json to_json(const AgentStep& step);
AgentStep agent_step_from_json(const Json& j);

Json to_json(const CorpusStats& stats);
CorpusStats corpus_stats_from_json(const Json& j);

Json to_json(const TurnLevelReport& report);
TurnLevelReport turn_level_report_from_json(const Json& j);

Json to_json(const JudgeScores& scores);
JudgeScores judge_scores_from_json(const Json& j);

Json to_json(const PersonaProfile& profile);
PersonaProfile persona_profile_from_json(const Json& j);

// ---------------------------------------------------------------------------
// JSONL files
// ---------------------------------------------------------------------------

/// Throws Error(Io) if the file cannot be opened and Error(ParseError) naming
/// the 1-based line for malformed records. Blank lines are skipped.
std::vector<Json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, std::span<const Json> records);
std::string dump_jsonl(std::span<const Json> records);

/// Maps a foreign dialogue record layout onto the core one.
struct FieldMapping {
    std::string id = "id";
    std::string turns = "turns";
    std::string speaker = "speaker";
    std::string text = "text";
    std::string intent = "intent";
    std::string boundary_index = "boundary_index";
    /// Optional: resolve the boundary by matching this field against turn text.
    std::string boundary_text;
    /// "objects" ({speaker, text}), "prefixed" ("User: ..." strings) or
    /// "alternating" (plain strings, first speaker given by first_speaker).
    std::string turn_format = "objects";
    std::string first_speaker = "User";
    std::map<std::string, std::string> speaker_values;
    std::optional<DialogueSource> source;
};

FieldMapping field_mapping_from_json(const Json& j);
FieldMapping load_field_mapping(const std::filesystem::path& path);

Dialogue adapt_record(const Json& record, const FieldMapping& mapping);

/// Reads core-format records, or foreign ones through mapping when given.
std::vector<Dialogue> read_dialogues(const std::filesystem::path& path,
                                     const std::optional<FieldMapping>& mapping = std::nullopt);
void write_dialogues(const std::filesystem::path& path, std::span<const Dialogue> dialogues);

}  // namespace salesforge
