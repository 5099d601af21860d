//
// evalkit.hpp
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

#include "salesforge/agent.hpp"
#include "salesforge/backend.hpp"
#include "salesforge/core.hpp"

namespace salesforge::evalkit {

// ---------------------------------------------------------------------------
// Turn level
// ---------------------------------------------------------------------------

struct GoldTurn {
    std::string dialogue_id;
    std::size_t turn_index = 0;
    Policy gold_policy = Policy::continue_chit_chat();

    bool operator==(const GoldTurn&) const = default;
};

Json to_json(const GoldTurn& gold);
GoldTurn gold_turn_from_json(const Json& j);
std::vector<GoldTurn> read_gold(const std::filesystem::path& path);
void write_gold(const std::filesystem::path& path, std::span<const GoldTurn> gold);

/// True when extra["handover"] is set or the last agent turn carries the
/// handover marker.
bool ends_in_handover(const Dialogue& dialogue);

/// Agent turns before the boundary continue the chit-chat, the first agent
/// turn after it pivots, later ones continue the topic, and a closing
/// handover turn (other than the pivot itself) is the explicit intent.
/// Throws Error(MissingBoundary) without a boundary and
/// Error(InvalidDialogue) without an intent.
std::vector<GoldTurn> derive_gold_labels(const Dialogue& dialogue);

/// A model prediction for one agent turn. An absent policy means the output
/// could not be parsed.
struct Prediction {
    std::string dialogue_id;
    std::size_t turn_index = 0;
    std::optional<Policy> policy;
};

std::vector<Prediction> predictions_from_transcripts(std::span<const agent::Transcript> transcripts);

/// Replays each gold turn's prefix through the agent and records its policy.
/// Failed steps become unparsed predictions.
std::vector<Prediction> predict_turns(std::span<const Dialogue> dialogues, std::span<const GoldTurn> gold,
                                      backend::ChatBackend& backend, const agent::AgentConfig& config,
                                      std::size_t concurrency = 1);

bool intent_match(const Policy& gold, const Policy& predicted);

/// Missing predictions count as mismatches and land in the unparsed column.
/// Throws Error(KeyCollision) on duplicate prediction or gold keys and
/// Error(EmptyGold) when gold is empty.
TurnLevelReport turn_level_eval(std::span<const Prediction> predictions, std::span<const GoldTurn> gold);

struct MatchRate {
    /// Correct / gold turns of the kind; nullopt when there are none.
    std::optional<double> recall;
    /// Correct / predictions of the kind; nullopt when there are none.
    std::optional<double> precision;
};

std::array<MatchRate, 4> match_rates(const TurnLevelReport& report);

// ---------------------------------------------------------------------------
// Corpus and dialogue level
// ---------------------------------------------------------------------------

struct StatsReject {
    std::string dialogue_id;
    std::string message;
};

struct CorpusStatsResult {
    CorpusStats stats;
    std::vector<StatsReject> rejects;
};

/// Dialogues without a boundary are set aside in rejects. Throws
/// Error(EmptyCorpus) when nothing is left to average.
CorpusStatsResult corpus_stats(std::span<const Dialogue> corpus);

/// Fraction of transcripts whose final agent step hands over. Throws
/// Error(EmptyInput) for an empty list.
double proceed_tod_rate(std::span<const agent::Transcript> transcripts);
double average_turns(std::span<const agent::Transcript> transcripts);

// ---------------------------------------------------------------------------
// Judge
// ---------------------------------------------------------------------------

struct JudgeConfig {
    SamplingParams sampling{.model_name = {}, .temperature = 0.0, .max_tokens = 1024, .seed = std::nullopt};
    int attempts = 3;
};

/// Accepts exactly the five rubric keys, each {reason, score} with a score in
/// [0, 100]. Throws Error(JudgeParseFailure) or Error(ScoreOutOfRange).
JudgeScores parse_judge_reply(std::string_view raw);

/// Renders the rubric prompt and parses the reply, re-asking on malformed or
/// out-of-range answers. Each reply is appended to `archive` when given. The
/// final error carries the last raw reply.
JudgeScores judge_dialogue(const Dialogue& dialogue, backend::ChatBackend& backend, const JudgeConfig& config,
                           std::vector<Json>* archive = nullptr);

struct JudgeMeans {
    double naturalness = 0.0;
    double coherence = 0.0;
    double smoothness = 0.0;
    double agent_aggressiveness = 0.0;
    double agent_consistency = 0.0;

    bool operator==(const JudgeMeans&) const = default;
};

JudgeMeans mean_scores(std::span<const JudgeScores> scores);

/// Stores extra["quality"] = {naturalness, consistency} from judge scores.
void attach_quality(Dialogue& dialogue, const JudgeScores& scores);

/// Keeps dialogues whose quality scores both exceed threshold, ordered by
/// their mean (descending, ties by id) and truncated to cap when given.
/// Throws Error(MissingScores) for a dialogue without quality scores.
std::vector<Dialogue> quality_filter(std::span<const Dialogue> corpus, double threshold,
                                     std::optional<std::size_t> cap = std::nullopt);

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

struct ReportInputs {
    std::optional<TurnLevelReport> turn;
    std::optional<double> avg_turns;
    std::optional<double> proceed_tod_rate;
    std::optional<JudgeMeans> judge;
    std::size_t dialogues = 0;

    bool operator==(const ReportInputs&) const = default;
};

struct ReportRow {
    std::string metric;
    /// Rounded to 2 decimals; rates are percentages.
    std::optional<double> value;
};

struct Report {
    std::vector<ReportRow> rows;
    Json json;
    std::string text;
};

/// Rows in fixed order: Intent Detection, Policy Selection, Both Match,
/// # Turns, Proceed TOD Rate, Naturalness, Coherence, Agent Consistency,
/// Agent Aggressiveness, Smoothness. The JSON also keeps the inputs, the
/// per-gold-policy prediction distributions and the match rates.
Report aggregate_report(const ReportInputs& inputs);

/// Recovers the inputs stored in a report document.
ReportInputs inputs_from_report(const Json& report);

}  // namespace salesforge::evalkit
