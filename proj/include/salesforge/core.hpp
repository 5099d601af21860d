//
// core.hpp
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

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace salesforge {

/// Records keep their key order so serialized output is stable and foreign
/// fields survive a round trip in place.
using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

enum class ErrorKind {
    // core
    MissingBoundary,
    UnknownIntent,
    InvalidDialogue,
    ParseError,
    // backend
    Transport,
    RateLimited,
    MalformedReply,
    MockExhausted,
    // promptkit
    MissingSlot,
    EmptyDialogue,
    // genpipe
    StageParseFailure,
    BoundaryInvalid,
    EmptyInput,
    // agent
    ParseFailure,
    Unclassifiable,
    StepAfterHandover,
    // simarena
    DistinctnessFailure,
    EmptyBank,
    PreconditionViolation,
    // evalkit
    KeyCollision,
    EmptyGold,
    EmptyCorpus,
    JudgeParseFailure,
    ScoreOutOfRange,
    MissingScores,
    // cli
    Config,
    Io,
    Usage,
};

std::string_view to_string(ErrorKind kind);

/// Every failure in the toolkit is an Error. When the failure comes from
/// model output, raw() holds the offending reply so callers can retry or log.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message, std::string raw = {});

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& raw() const noexcept { return raw_; }
    /// Message without the kind prefix that what() carries.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
    std::string raw_;
};

/// True for the failures a chat backend can raise.
bool is_backend_error(ErrorKind kind);

// ---------------------------------------------------------------------------
// Speakers and turns
// ---------------------------------------------------------------------------

enum class Speaker { User, Agent };

std::string_view to_string(Speaker speaker);
Speaker parse_speaker(std::string_view text);
Speaker other(Speaker speaker);

struct Turn {
    std::size_t index = 0;
    Speaker speaker = Speaker::User;
    std::string text;

    bool operator==(const Turn&) const = default;
};

// ---------------------------------------------------------------------------
// Intents
// ---------------------------------------------------------------------------

enum class Intent {
    FindAttraction,
    FindRestaurants,
    FindMovie,
    LookupMusic,
    SearchHotel,
    FindEvents,
    GetCarsAvailable,
    SearchRoundtripFlights,
    GetRide,
    SearchOnewayFlight,
    FindBus,
};

inline constexpr std::array<Intent, 11> kAllIntents = {
    Intent::FindAttraction,   Intent::FindRestaurants,        Intent::FindMovie,
    Intent::LookupMusic,      Intent::SearchHotel,            Intent::FindEvents,
    Intent::GetCarsAvailable, Intent::SearchRoundtripFlights, Intent::GetRide,
    Intent::SearchOnewayFlight, Intent::FindBus,
};

/// The intents with enough data to train the agent on.
inline constexpr std::array<Intent, 6> kTrainableIntents = {
    Intent::FindAttraction, Intent::FindRestaurants, Intent::FindMovie,
    Intent::LookupMusic,    Intent::SearchHotel,     Intent::FindEvents,
};

std::string_view canonical_name(Intent intent);
bool trainable(Intent intent);

/// Matches after trimming, case folding and dropping spaces/underscores/hyphens.
std::optional<Intent> try_canonicalize_intent(std::string_view text);
/// Throws Error(UnknownIntent) for anything outside the whitelist.
Intent canonicalize_intent(std::string_view text);

// ---------------------------------------------------------------------------
// Policies
// ---------------------------------------------------------------------------

enum class PolicyKind { ContinueChitChat, PivotToIntent, ContinueTopic, ExplicitIntent };

inline constexpr std::array<PolicyKind, 4> kAllPolicyKinds = {
    PolicyKind::ContinueChitChat, PolicyKind::PivotToIntent,
    PolicyKind::ContinueTopic, PolicyKind::ExplicitIntent,
};

std::string_view to_string(PolicyKind kind);
PolicyKind parse_policy_kind(std::string_view text);

/// One of the four agent strategies. Chit-chat carries no intent; the other
/// three carry exactly one, which the factories enforce.
class Policy {
public:
    static Policy continue_chit_chat() { return Policy(PolicyKind::ContinueChitChat, std::nullopt); }
    static Policy pivot_to_intent(Intent intent) { return Policy(PolicyKind::PivotToIntent, intent); }
    static Policy continue_topic(Intent intent) { return Policy(PolicyKind::ContinueTopic, intent); }
    static Policy explicit_intent(Intent intent) { return Policy(PolicyKind::ExplicitIntent, intent); }
    static Policy make(PolicyKind kind, std::optional<Intent> intent);

    PolicyKind kind() const noexcept { return kind_; }
    std::optional<Intent> intent() const noexcept { return intent_; }

    bool operator==(const Policy&) const = default;

private:
    Policy(PolicyKind kind, std::optional<Intent> intent) : kind_(kind), intent_(intent) {}

    PolicyKind kind_;
    std::optional<Intent> intent_;
};

std::string describe(const Policy& policy);

// ---------------------------------------------------------------------------
// Dialogues
// ---------------------------------------------------------------------------

enum class DialogueSource { SalesBot1, SalesBot2, Generated, Simulated };

std::string_view to_string(DialogueSource source);
DialogueSource parse_dialogue_source(std::string_view text);

struct Dialogue {
    std::string id;
    std::vector<Turn> turns;
    std::optional<Intent> intent;
    /// First user turn that explicitly mentions the intent; the transition
    /// segment starts here.
    std::optional<std::size_t> boundary_index;
    DialogueSource source = DialogueSource::Generated;
    /// Fields this library does not own, kept in their original order.
    Json extra = Json::object();

    bool operator==(const Dialogue&) const = default;
};

/// Index-normalizes and trims a turn list, dropping empty turns and merging
/// consecutive same-speaker turns with a newline. When index_map is given it
/// receives, per input turn, its output index (npos for dropped turns).
std::vector<Turn> repair_turns(std::vector<Turn> turns,
                               std::vector<std::size_t>* index_map = nullptr);

/// Builds turns from (speaker, text) pairs and repairs them.
std::vector<Turn> make_turns(std::span<const std::pair<Speaker, std::string>> pairs);

/// Throws Error(InvalidDialogue) when a Dialogue invariant does not hold.
void validate(const Dialogue& dialogue);

struct Segments {
    std::vector<Turn> chitchat;
    std::vector<Turn> transition;
};

/// Splits at boundary_index: chit-chat is strictly before it, transition is
/// the boundary turn onward.
Segments segment_dialogue(const Dialogue& dialogue);

// ---------------------------------------------------------------------------
// Agent records and reports
// ---------------------------------------------------------------------------

struct AgentStep {
    std::string thought_text;
    Policy policy = Policy::continue_chit_chat();
    std::string response_text;
    std::string raw_output;
    /// Set in baseline mode, where the policy is inferred from the reply.
    bool baseline_derived = false;
    std::vector<std::string> warnings;

    bool operator==(const AgentStep&) const = default;
};

struct CorpusStats {
    double avg_chitchat_turns = 0.0;
    double avg_transition_turns = 0.0;
    double avg_total_turns = 0.0;
    std::size_t dialogue_count = 0;
    std::map<Intent, std::size_t> intent_histogram;

    bool operator==(const CorpusStats&) const = default;
};

/// Column index kUnparsedColumn counts gold turns with no usable prediction.
inline constexpr std::size_t kUnparsedColumn = 4;
using ConfusionMatrix = std::array<std::array<std::size_t, 5>, 4>;

struct TurnLevelReport {
    double intent_accuracy = 0.0;
    double policy_accuracy = 0.0;
    double both_accuracy = 0.0;
    std::size_t total = 0;
    std::size_t missing = 0;
    /// confusion[gold kind][predicted kind or kUnparsedColumn]
    ConfusionMatrix confusion{};

    bool operator==(const TurnLevelReport&) const = default;
};

struct JudgeCriterion {
    std::string reason;
    double score = 0.0;

    bool operator==(const JudgeCriterion&) const = default;
};

struct JudgeScores {
    JudgeCriterion naturalness;
    JudgeCriterion coherence;
    JudgeCriterion smoothness;
    JudgeCriterion agent_aggressiveness;
    JudgeCriterion agent_consistency;

    bool operator==(const JudgeScores&) const = default;
};

enum class PreferenceKind { NoPreference, NotInterested2, NotInterested4, NotInterestedAll };

inline constexpr std::array<PreferenceKind, 4> kAllPreferenceKinds = {
    PreferenceKind::NoPreference, PreferenceKind::NotInterested2,
    PreferenceKind::NotInterested4, PreferenceKind::NotInterestedAll,
};

std::string_view to_string(PreferenceKind kind);
PreferenceKind parse_preference_kind(std::string_view text);
std::size_t not_interested_count(PreferenceKind kind);

struct PersonaProfile {
    std::string persona_text;
    PreferenceKind preference_kind = PreferenceKind::NoPreference;
    /// Trainable intents only, kept in whitelist order.
    std::vector<Intent> not_interested;

    bool operator==(const PersonaProfile&) const = default;
};

/// Throws Error(InvalidDialogue) if the set size or members disagree with the kind.
void validate(const PersonaProfile& profile);

/// Generation parameters shared by every module that talks to a model.
struct SamplingParams {
    std::string model_name;
    double temperature = 0.7;
    int max_tokens = 1024;
    std::optional<std::int64_t> seed;
};

}  // namespace salesforge
