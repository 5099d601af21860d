//
// agent.cpp
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

#include "salesforge/agent.hpp"

#include <algorithm>
#include <cctype>

#include "salesforge/promptkit.hpp"
#include "salesforge/serialize.hpp"
#include "salesforge/text.hpp"

namespace salesforge::agent {

using backend::ChatMessage;
using backend::Role;

namespace {

constexpr std::string_view kThoughtLabel = "Thought:";
constexpr std::string_view kResponseLabel = "Response:";

constexpr std::string_view kFormatReminder =
    "Your previous answer did not follow the output format. Answer again using exactly:\n"
    "Thought: <thought>\n"
    "Response: <response>";

/// Lowercase, hyphens as spaces, whitespace collapsed.
std::string fold(std::string_view s) {
    std::string out(s);
    std::replace(out.begin(), out.end(), '-', ' ');
    return text::normalize(out);
}

bool stop_char(char c) {
    return c == '.' || c == ',' || c == ';' || c == '!' || c == '?' || c == '"' || c == '\'' || c == ')' ||
           c == '\n';
}

/// Intent named after the first of the anchors found at or after `from`.
std::optional<Intent> intent_after(const std::string& folded, std::initializer_list<std::string_view> anchors,
                                   std::size_t from = 0) {
    for (std::string_view anchor : anchors) {
        std::size_t pos = folded.find(anchor, from);
        if (pos == std::string::npos) continue;
        std::size_t begin = pos + anchor.size();
        while (begin < folded.size() && (folded[begin] == '"' || folded[begin] == '\'' || folded[begin] == '*')) {
            ++begin;
        }
        std::size_t end = begin;
        while (end < folded.size() && !stop_char(folded[end])) ++end;
        std::string_view slot = text::trim(std::string_view(folded).substr(begin, end - begin));
        if (auto intent = try_canonicalize_intent(slot)) return intent;
        std::string_view first = slot.substr(0, slot.find(' '));
        if (auto intent = try_canonicalize_intent(first)) return intent;
        throw Error(ErrorKind::UnknownIntent, "thought names an intent outside the whitelist: '" +
                                                  std::string(slot) + "'");
    }
    return std::nullopt;
}

Intent require_intent(std::optional<Intent> intent, std::string_view what) {
    if (!intent) throw Error(ErrorKind::Unclassifiable, std::string(what) + " thought has no intent slot");
    return *intent;
}

Json step_to_json(const TranscriptStep& s) {
    Json j;
    j["turn_index"] = s.turn_index;
    j["thought"] = s.step.thought_text;
    j["policy"] = std::string(to_string(s.step.policy.kind()));
    j["intent"] = s.step.policy.intent() ? Json(std::string(canonical_name(*s.step.policy.intent()))) : Json(nullptr);
    j["response"] = s.step.response_text;
    if (!s.step.raw_output.empty()) j["raw_output"] = s.step.raw_output;
    if (s.step.baseline_derived) j["baseline_derived"] = true;
    if (!s.step.warnings.empty()) j["warnings"] = s.step.warnings;
    return j;
}

TranscriptStep step_from_json(const Json& j) {
    TranscriptStep s;
    s.turn_index = j.at("turn_index").get<std::size_t>();
    s.step.thought_text = j.value("thought", "");
    std::optional<Intent> intent;
    if (j.contains("intent") && !j["intent"].is_null()) intent = canonicalize_intent(j["intent"].get<std::string>());
    s.step.policy = Policy::make(parse_policy_kind(j.at("policy").get<std::string>()), intent);
    s.step.response_text = j.value("response", "");
    s.step.raw_output = j.value("raw_output", "");
    s.step.baseline_derived = j.value("baseline_derived", false);
    if (j.contains("warnings")) s.step.warnings = j["warnings"].get<std::vector<std::string>>();
    return s;
}

}  // namespace

ParsedOutput parse_agent_output(std::string_view raw) {
    std::size_t t = text::find_ci(raw, kThoughtLabel);
    if (t == std::string_view::npos) throw Error(ErrorKind::ParseFailure, "no 'Thought:' label", std::string(raw));
    std::size_t r = text::find_ci(raw, kResponseLabel, t + kThoughtLabel.size());
    if (r == std::string_view::npos) {
        throw Error(ErrorKind::ParseFailure, "no 'Response:' label after the thought", std::string(raw));
    }
    ParsedOutput out;
    out.thought = std::string(text::trim(raw.substr(t + kThoughtLabel.size(), r - t - kThoughtLabel.size())));
    out.response = std::string(text::trim(raw.substr(r + kResponseLabel.size())));
    if (out.response.empty()) throw Error(ErrorKind::ParseFailure, "empty response", std::string(raw));
    return out;
}

std::string render_thought(const Policy& policy) {
    std::string name = policy.intent() ? std::string(canonical_name(*policy.intent())) : std::string();
    switch (policy.kind()) {
        case PolicyKind::ContinueChitChat:
            return "The user did not implicitly mention any potential intent, I should continue the chit-chat.";
        case PolicyKind::PivotToIntent:
            return "The user implicitly mentioned the intent of " + name +
                   ". I should smoothly pivot the conversation to the topic of " + name + ".";
        case PolicyKind::ContinueTopic:
            return "The user did not change the topic of " + name + ". I should continue the topic.";
        case PolicyKind::ExplicitIntent:
            return "The user has explicitly shown his/her intent of " + name + ".";
    }
    return {};
}

Policy classify_thought(std::string_view thought) {
    std::string f = fold(thought);
    if (f.empty()) throw Error(ErrorKind::Unclassifiable, "empty thought");

    if (std::size_t pos = f.find("explicitly shown"); pos != std::string::npos) {
        auto intent = intent_after(f, {"intent of ", "topic of "}, pos);
        if (!intent) intent = intent_after(f, {"intent of ", "topic of "});
        return Policy::explicit_intent(require_intent(intent, "explicit-intent"));
    }
    if (f.find("smoothly pivot the conversation") != std::string::npos) {
        return Policy::pivot_to_intent(require_intent(intent_after(f, {"intent of ", "topic of "}), "pivot"));
    }
    for (std::string_view anchor : {"continue the chit chat", "continue the chitchat"}) {
        if (f.find(anchor) != std::string::npos) return Policy::continue_chit_chat();
    }
    if (f.find("continue the topic") != std::string::npos) {
        return Policy::continue_topic(require_intent(intent_after(f, {"topic of ", "intent of "}), "continue-topic"));
    }
    throw Error(ErrorKind::Unclassifiable, "thought matches no known strategy: '" + std::string(thought) + "'");
}

bool contains_handover_marker(std::string_view text) {
    return fold(text).find("proceed to task oriented dialog") != std::string::npos;
}

bool is_handover(const AgentStep& step) {
    return step.policy.kind() == PolicyKind::ExplicitIntent || contains_handover_marker(step.response_text);
}

std::string_view to_string(Mode mode) { return mode == Mode::Cot ? "cot" : "baseline"; }

Mode parse_mode(std::string_view s) {
    std::string l = text::to_lower(text::trim(s));
    if (l == "cot") return Mode::Cot;
    if (l == "baseline") return Mode::Baseline;
    throw Error(ErrorKind::Config, "unknown agent mode '" + std::string(s) + "'");
}

std::vector<std::string> check_policy_legality(const AgentState& state, const Policy& policy) {
    std::vector<std::string> warnings;
    if (policy.kind() != PolicyKind::ContinueTopic) return warnings;
    std::string name(canonical_name(*policy.intent()));
    if (!state.current_topic) {
        warnings.push_back("ContinueTopic(" + name + ") without a prior pivot");
    } else if (*state.current_topic != *policy.intent()) {
        warnings.push_back("ContinueTopic(" + name + ") while the topic is " +
                           std::string(canonical_name(*state.current_topic)));
    }
    return warnings;
}

StepResult agent_step(const AgentState& state, std::string_view user_utterance, backend::ChatBackend& backend,
                      const AgentConfig& config) {
    if (state.handover) throw Error(ErrorKind::StepAfterHandover, "the dialogue has already been handed over");
    std::string_view utterance = text::trim(user_utterance);
    if (utterance.empty()) throw Error(ErrorKind::PreconditionViolation, "empty user utterance");

    AgentState next = state;
    next.history.push_back(Turn{next.history.size(), Speaker::User, std::string(utterance)});
    next.history = repair_turns(std::move(next.history));

    std::vector<ChatMessage> messages;
    if (config.mode == Mode::Cot) {
        messages.push_back({Role::User, promptkit::render_agent_prompt(next.history, config.intents)});
    } else {
        messages.push_back({Role::System, promptkit::render_baseline_prompt(config.intents)});
        for (const Turn& t : next.history) {
            messages.push_back({t.speaker == Speaker::User ? Role::User : Role::Assistant, t.text});
        }
    }

    std::string raw = backend.complete(backend::make_request(messages, config.sampling)).text;

    AgentStep step;
    if (config.mode == Mode::Cot) {
        ParsedOutput parsed;
        try {
            parsed = parse_agent_output(raw);
        } catch (const Error& e) {
            if (!config.reask_on_parse_failure || e.kind() != ErrorKind::ParseFailure) throw;
            messages.push_back({Role::Assistant, raw});
            messages.push_back({Role::User, std::string(kFormatReminder)});
            raw = backend.complete(backend::make_request(messages, config.sampling)).text;
            parsed = parse_agent_output(raw);
        }
        try {
            step.policy = classify_thought(parsed.thought);
        } catch (const Error& e) {
            throw Error(e.kind(), e.detail(), raw);
        }
        step.thought_text = std::move(parsed.thought);
        step.response_text = std::move(parsed.response);
    } else {
        step.response_text = std::string(text::trim(raw));
        if (contains_handover_marker(step.response_text) && next.current_topic) {
            step.policy = Policy::explicit_intent(*next.current_topic);
        }
        step.thought_text = render_thought(step.policy);
        step.baseline_derived = true;
    }
    step.raw_output = raw;
    step.warnings = check_policy_legality(next, step.policy);

    next.history.push_back(Turn{next.history.size(), Speaker::Agent, step.response_text});
    next.policy_trace.push_back(step.policy);
    if (step.policy.intent()) next.current_topic = step.policy.intent();
    next.warnings.insert(next.warnings.end(), step.warnings.begin(), step.warnings.end());
    next.handover = is_handover(step);
    return StepResult{std::move(step), std::move(next)};
}

Json to_json(const Transcript& t) {
    Json j = salesforge::to_json(t.dialogue);
    j["handover"] = t.handover;
    j["truncated"] = t.truncated;
    j["error"] = t.error.empty() ? Json(nullptr) : Json(t.error);
    Json steps = Json::array();
    for (const auto& s : t.steps) steps.push_back(step_to_json(s));
    j["steps"] = std::move(steps);
    return j;
}

Transcript transcript_from_json(const Json& j) {
    Transcript t;
    t.dialogue = dialogue_from_json(j);
    Json& extra = t.dialogue.extra;
    auto take = [&](const char* key) {
        Json v = extra.contains(key) ? extra[key] : Json(nullptr);
        extra.erase(key);
        return v;
    };
    Json handover = take("handover");
    Json truncated = take("truncated");
    Json error = take("error");
    Json steps = take("steps");
    t.handover = handover.is_boolean() && handover.get<bool>();
    t.truncated = truncated.is_boolean() && truncated.get<bool>();
    if (error.is_string()) t.error = error.get<std::string>();
    if (steps.is_array()) {
        for (const auto& s : steps) t.steps.push_back(step_from_json(s));
    }
    return t;
}

std::vector<Transcript> read_transcripts(const std::filesystem::path& path) {
    std::vector<Transcript> out;
    for (const Json& j : read_jsonl(path)) out.push_back(transcript_from_json(j));
    return out;
}

void write_transcripts(const std::filesystem::path& path, std::span<const Transcript> transcripts) {
    std::vector<Json> records;
    records.reserve(transcripts.size());
    for (const auto& t : transcripts) records.push_back(to_json(t));
    write_jsonl(path, records);
}

}  // namespace salesforge::agent
