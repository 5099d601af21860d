//
// core.cpp
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


#include "salesforge/core.hpp"

#include <algorithm>
#include <cctype>

#include "salesforge/text.hpp"

namespace salesforge {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::MissingBoundary: return "MissingBoundary";
        case ErrorKind::UnknownIntent: return "UnknownIntent";
        case ErrorKind::InvalidDialogue: return "InvalidDialogue";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::Transport: return "Transport";
        case ErrorKind::RateLimited: return "RateLimited";
        case ErrorKind::MalformedReply: return "MalformedReply";
        case ErrorKind::MockExhausted: return "MockExhausted";
        case ErrorKind::MissingSlot: return "MissingSlot";
        case ErrorKind::EmptyDialogue: return "EmptyDialogue";
        case ErrorKind::StageParseFailure: return "StageParseFailure";
        case ErrorKind::BoundaryInvalid: return "BoundaryInvalid";
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::ParseFailure: return "ParseFailure";
        case ErrorKind::Unclassifiable: return "Unclassifiable";
        case ErrorKind::StepAfterHandover: return "StepAfterHandover";
        case ErrorKind::DistinctnessFailure: return "DistinctnessFailure";
        case ErrorKind::EmptyBank: return "EmptyBank";
        case ErrorKind::PreconditionViolation: return "PreconditionViolation";
        case ErrorKind::KeyCollision: return "KeyCollision";
        case ErrorKind::EmptyGold: return "EmptyGold";
        case ErrorKind::EmptyCorpus: return "EmptyCorpus";
        case ErrorKind::JudgeParseFailure: return "JudgeParseFailure";
        case ErrorKind::ScoreOutOfRange: return "ScoreOutOfRange";
        case ErrorKind::MissingScores: return "MissingScores";
        case ErrorKind::Config: return "Config";
        case ErrorKind::Io: return "Io";
        case ErrorKind::Usage: return "Usage";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message, std::string raw)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind),
      detail_(message),
      raw_(std::move(raw)) {}

bool is_backend_error(ErrorKind kind) {
    return kind == ErrorKind::Transport || kind == ErrorKind::RateLimited ||
           kind == ErrorKind::MalformedReply || kind == ErrorKind::MockExhausted;
}

std::string_view to_string(Speaker speaker) {
    return speaker == Speaker::User ? "User" : "Agent";
}

Speaker parse_speaker(std::string_view text) {
    if (text == "User") return Speaker::User;
    if (text == "Agent") return Speaker::Agent;
    throw Error(ErrorKind::ParseError, "unknown speaker '" + std::string(text) + "'");
}

Speaker other(Speaker speaker) {
    return speaker == Speaker::User ? Speaker::Agent : Speaker::User;
}

// ---------------------------------------------------------------------------

std::string_view canonical_name(Intent intent) {
    switch (intent) {
        case Intent::FindAttraction: return "FindAttraction";
        case Intent::FindRestaurants: return "FindRestaurants";
        case Intent::FindMovie: return "FindMovie";
        case Intent::LookupMusic: return "LookupMusic";
        case Intent::SearchHotel: return "SearchHotel";
        case Intent::FindEvents: return "FindEvents";
        case Intent::GetCarsAvailable: return "GetCarsAvailable";
        case Intent::SearchRoundtripFlights: return "SearchRoundtripFlights";
        case Intent::GetRide: return "GetRide";
        case Intent::SearchOnewayFlight: return "SearchOnewayFlight";
        case Intent::FindBus: return "FindBus";
    }
    return "";
}

bool trainable(Intent intent) {
    return std::find(kTrainableIntents.begin(), kTrainableIntents.end(), intent) !=
           kTrainableIntents.end();
}

namespace {

std::string fold_intent_key(std::string_view text) {
    std::string key;
    for (char c : text::trim(text)) {
        if (c == ' ' || c == '_' || c == '-' || c == '\t') continue;
        key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return key;
}

}  // namespace

std::optional<Intent> try_canonicalize_intent(std::string_view text) {
    const std::string key = fold_intent_key(text);
    for (Intent intent : kAllIntents) {
        if (fold_intent_key(canonical_name(intent)) == key) return intent;
    }
    return std::nullopt;
}

Intent canonicalize_intent(std::string_view text) {
    if (auto intent = try_canonicalize_intent(text)) return *intent;
    throw Error(ErrorKind::UnknownIntent, "'" + std::string(text) + "' is not a target intent");
}

// ---------------------------------------------------------------------------

std::string_view to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::ContinueChitChat: return "ContinueChitChat";
        case PolicyKind::PivotToIntent: return "PivotToIntent";
        case PolicyKind::ContinueTopic: return "ContinueTopic";
        case PolicyKind::ExplicitIntent: return "ExplicitIntent";
    }
    return "";
}

PolicyKind parse_policy_kind(std::string_view text) {
    for (PolicyKind kind : kAllPolicyKinds) {
        if (to_string(kind) == text) return kind;
    }
    throw Error(ErrorKind::ParseError, "unknown policy '" + std::string(text) + "'");
}

Policy Policy::make(PolicyKind kind, std::optional<Intent> intent) {
    if (kind == PolicyKind::ContinueChitChat) {
        if (intent) throw Error(ErrorKind::ParseError, "ContinueChitChat carries no intent");
        return continue_chit_chat();
    }
    if (!intent) {
        throw Error(ErrorKind::ParseError, std::string(to_string(kind)) + " requires an intent");
    }
    return Policy(kind, intent);
}

std::string describe(const Policy& policy) {
    std::string out(to_string(policy.kind()));
    if (auto intent = policy.intent()) {
        out += "(";
        out += canonical_name(*intent);
        out += ")";
    }
    return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(DialogueSource source) {
    switch (source) {
        case DialogueSource::SalesBot1: return "SalesBot1";
        case DialogueSource::SalesBot2: return "SalesBot2";
        case DialogueSource::Generated: return "Generated";
        case DialogueSource::Simulated: return "Simulated";
    }
    return "";
}

DialogueSource parse_dialogue_source(std::string_view text) {
    for (auto s : {DialogueSource::SalesBot1, DialogueSource::SalesBot2, DialogueSource::Generated,
                   DialogueSource::Simulated}) {
        if (to_string(s) == text) return s;
    }
    throw Error(ErrorKind::ParseError, "unknown dialogue source '" + std::string(text) + "'");
}

std::vector<Turn> repair_turns(std::vector<Turn> turns, std::vector<std::size_t>* index_map) {
    std::vector<Turn> out;
    out.reserve(turns.size());
    if (index_map) index_map->assign(turns.size(), static_cast<std::size_t>(-1));
    for (std::size_t i = 0; i < turns.size(); ++i) {
        const Turn& turn = turns[i];
        std::string_view trimmed = text::trim(turn.text);
        if (trimmed.empty()) continue;
        if (!out.empty() && out.back().speaker == turn.speaker) {
            out.back().text += "\n";
            out.back().text += trimmed;
        } else {
            out.push_back(Turn{out.size(), turn.speaker, std::string(trimmed)});
        }
        if (index_map) (*index_map)[i] = out.size() - 1;
    }
    return out;
}

std::vector<Turn> make_turns(std::span<const std::pair<Speaker, std::string>> pairs) {
    std::vector<Turn> turns;
    turns.reserve(pairs.size());
    for (const auto& [speaker, text] : pairs) turns.push_back(Turn{turns.size(), speaker, text});
    return repair_turns(std::move(turns));
}

void validate(const Dialogue& dialogue) {
    auto fail = [&](const std::string& why) {
        throw Error(ErrorKind::InvalidDialogue, "dialogue '" + dialogue.id + "': " + why);
    };
    for (std::size_t i = 0; i < dialogue.turns.size(); ++i) {
        const Turn& turn = dialogue.turns[i];
        if (turn.index != i) fail("turn index " + std::to_string(turn.index) + " at position " + std::to_string(i));
        if (turn.text.empty()) fail("turn " + std::to_string(i) + " is empty");
        if (text::trim(turn.text).size() != turn.text.size()) fail("turn " + std::to_string(i) + " is not trimmed");
        if (i > 0 && dialogue.turns[i - 1].speaker == turn.speaker) {
            fail("turns " + std::to_string(i - 1) + " and " + std::to_string(i) + " share a speaker");
        }
    }
    if (dialogue.boundary_index) {
        const std::size_t b = *dialogue.boundary_index;
        if (!dialogue.intent) fail("boundary_index without intent");
        if (b >= dialogue.turns.size()) fail("boundary_index " + std::to_string(b) + " out of range");
        if (dialogue.turns[b].speaker != Speaker::User) fail("boundary turn " + std::to_string(b) + " is not a User turn");
    }
}

Segments segment_dialogue(const Dialogue& dialogue) {
    if (!dialogue.boundary_index) {
        throw Error(ErrorKind::MissingBoundary, "dialogue '" + dialogue.id + "' has no boundary_index");
    }
    const std::size_t b = *dialogue.boundary_index;
    if (b >= dialogue.turns.size()) {
        throw Error(ErrorKind::InvalidDialogue,
                    "dialogue '" + dialogue.id + "' boundary_index " + std::to_string(b) + " out of range");
    }
    Segments out;
    out.chitchat.assign(dialogue.turns.begin(), dialogue.turns.begin() + static_cast<std::ptrdiff_t>(b));
    out.transition.assign(dialogue.turns.begin() + static_cast<std::ptrdiff_t>(b), dialogue.turns.end());
    return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(PreferenceKind kind) {
    switch (kind) {
        case PreferenceKind::NoPreference: return "no_preference";
        case PreferenceKind::NotInterested2: return "not_interested_2";
        case PreferenceKind::NotInterested4: return "not_interested_4";
        case PreferenceKind::NotInterestedAll: return "not_interested_all";
    }
    return "";
}

PreferenceKind parse_preference_kind(std::string_view text) {
    for (PreferenceKind kind : kAllPreferenceKinds) {
        if (to_string(kind) == text) return kind;
    }
    throw Error(ErrorKind::ParseError, "unknown preference kind '" + std::string(text) + "'");
}

std::size_t not_interested_count(PreferenceKind kind) {
    switch (kind) {
        case PreferenceKind::NoPreference: return 0;
        case PreferenceKind::NotInterested2: return 2;
        case PreferenceKind::NotInterested4: return 4;
        case PreferenceKind::NotInterestedAll: return kTrainableIntents.size();
    }
    return 0;
}

void validate(const PersonaProfile& profile) {
    if (profile.not_interested.size() != not_interested_count(profile.preference_kind)) {
        throw Error(ErrorKind::InvalidDialogue,
                    std::string(to_string(profile.preference_kind)) + " needs " +
                        std::to_string(not_interested_count(profile.preference_kind)) + " intents, got " +
                        std::to_string(profile.not_interested.size()));
    }
    for (std::size_t i = 0; i < profile.not_interested.size(); ++i) {
        Intent intent = profile.not_interested[i];
        if (!trainable(intent)) {
            throw Error(ErrorKind::InvalidDialogue,
                        std::string(canonical_name(intent)) + " is not a trainable intent");
        }
        if (i > 0 && profile.not_interested[i - 1] >= intent) {
            throw Error(ErrorKind::InvalidDialogue, "not_interested must be unique and in whitelist order");
        }
    }
}

}  // namespace salesforge
