//
// genpipe.hpp
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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "salesforge/backend.hpp"
#include "salesforge/core.hpp"

namespace salesforge::genpipe {

enum class Stage { Revision, IntentDetection, Continuation, Boundary };

std::string_view to_string(Stage stage);

/// Audit record for one stage of one dialogue.
struct StageRecord {
    std::string dialogue_id;
    Stage stage = Stage::Revision;
    std::string prompt;
    /// Output of the last attempt.
    std::string raw_output;
    /// Stage payload; present iff the stage succeeded.
    std::optional<Json> parsed;
    int attempts = 0;
    std::string error;
};

Json to_json(const StageRecord& record);

struct PipelineConfig {
    SamplingParams sampling{};
    /// Attempts per stage, counting the first.
    int attempts = 3;
    double boundary_similarity = 0.9;
    std::size_t min_revised_turns = 7;
    std::size_t min_continuation_turns = 5;
    std::size_t concurrency = 1;
};

// Stage output parsers. Each throws Error(StageParseFailure) on a format
// violation and leaves semantic checks to the stage functions.

/// Turn lines ("User: ..."/"Agent: ...") following `header`; unlabeled lines
/// continue the previous turn.
std::vector<Turn> parse_turn_block(std::string_view raw, std::string_view header);
/// The "Topic: <name>" answer, or a bare single-line answer. Throws
/// Error(UnknownIntent) for names outside the whitelist.
Intent parse_topic(std::string_view raw);
/// The "Turn: <utterance>" answer with quotes and any speaker label removed.
std::string parse_boundary_answer(std::string_view raw);

struct BoundaryMatch {
    std::size_t index = 0;
    double similarity = 1.0;
    bool exact = true;
};

/// Exact (whitespace/case-normalized) match first, then the most similar turn
/// at or above `threshold`; an all-digit answer is read as a 0-based index.
/// Throws Error(BoundaryInvalid) when the match is not a User turn or the
/// index is out of range, Error(StageParseFailure) when nothing matches.
BoundaryMatch resolve_boundary(const Dialogue& dialogue, std::string_view answer, double threshold);

Dialogue revise_chitchat(const Dialogue& dialogue, backend::ChatBackend& backend, const PipelineConfig& config,
                         StageRecord* record = nullptr);
Intent detect_intent(const Dialogue& dialogue, backend::ChatBackend& backend, const PipelineConfig& config,
                     StageRecord* record = nullptr);
Dialogue continue_dialogue(const Dialogue& dialogue, Intent intent, backend::ChatBackend& backend,
                           const PipelineConfig& config, StageRecord* record = nullptr);
std::size_t detect_boundary(const Dialogue& dialogue, Intent intent, backend::ChatBackend& backend,
                            const PipelineConfig& config, StageRecord* record = nullptr);

struct Quarantined {
    std::string dialogue_id;
    Stage stage = Stage::Revision;
    ErrorKind error = ErrorKind::StageParseFailure;
    std::string message;
    StageRecord record;
};

Json to_json(const Quarantined& item);

struct PipelineResult {
    std::vector<Dialogue> corpus;
    std::vector<StageRecord> records;
    std::vector<Quarantined> rejects;
};

/// Runs revision -> intent -> continuation -> boundary on every seed. A seed
/// that fails any stage is quarantined; the batch always completes.
/// Throws Error(EmptyInput) for an empty seed list.
PipelineResult run_pipeline(std::span<const Dialogue> seeds, backend::ChatBackend& backend,
                            const PipelineConfig& config);

}  // namespace salesforge::genpipe
