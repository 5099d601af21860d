//
// agent.hpp
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

#include "salesforge/backend.hpp"
#include "salesforge/core.hpp"

namespace salesforge::agent {

struct ParsedOutput {
    std::string thought;
    std::string response;
};

/// Splits "Thought: ... Response: ..." output. The thought runs from the
/// first "Thought:" label to the following "Response:" label; the response
/// runs to the end. Throws Error(ParseFailure) when a label is missing, the
/// labels are out of order, or the response is empty.
ParsedOutput parse_agent_output(std::string_view raw);

/// The canonical sentence for each of the four thought types.
std::string render_thought(const Policy& policy);

/// Maps a thought onto a policy by its anchor phrase (case and whitespace
/// insensitive) and canonicalizes the intent slot. Throws
/// Error(Unclassifiable) or Error(UnknownIntent).
Policy classify_thought(std::string_view thought);

/// "Proceed to task oriented dialog(ue)", any case, hyphen or punctuation.
bool contains_handover_marker(std::string_view text);
bool is_handover(const AgentStep& step);

enum class Mode { Cot, Baseline };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view text);

struct AgentConfig {
    Mode mode = Mode::Cot;
    std::vector<Intent> intents{kTrainableIntents.begin(), kTrainableIntents.end()};
    SamplingParams sampling{};
    /// Re-ask once with a format reminder when the output does not parse.
    bool reask_on_parse_failure = false;
};

struct AgentState {
    std::vector<Turn> history;
    std::optional<Intent> current_topic;
    bool handover = false;
    std::vector<Policy> policy_trace;
    std::vector<std::string> warnings;
};

/// Strategy-order violations the new policy would introduce. Reported, never
/// enforced.
std::vector<std::string> check_policy_legality(const AgentState& state, const Policy& policy);

struct StepResult {
    AgentStep step;
    AgentState state;
};

/// Appends the user turn, queries the model, parses and classifies the
/// output, and appends the agent turn. The input state is left untouched, so
/// a failed step can simply be retried. Parse and classification errors carry
/// the raw output. Throws Error(StepAfterHandover) once the state has handed
/// over.
StepResult agent_step(const AgentState& state, std::string_view user_utterance, backend::ChatBackend& backend,
                      const AgentConfig& config);

// ---------------------------------------------------------------------------
// Transcripts
// ---------------------------------------------------------------------------

struct TranscriptStep {
    std::size_t turn_index = 0;
    AgentStep step;

    bool operator==(const TranscriptStep&) const = default;
};

/// A dialogue annotated with the agent step behind each agent turn.
struct Transcript {
    Dialogue dialogue;
    std::vector<TranscriptStep> steps;
    bool handover = false;
    bool truncated = false;
    std::string error;

    bool operator==(const Transcript&) const = default;
};

/// The core dialogue record plus "handover", "truncated", "error" and
/// "steps": [{turn_index, thought, policy, intent, response}].
Json to_json(const Transcript& transcript);
Transcript transcript_from_json(const Json& j);

std::vector<Transcript> read_transcripts(const std::filesystem::path& path);
void write_transcripts(const std::filesystem::path& path, std::span<const Transcript> transcripts);

}  // namespace salesforge::agent
