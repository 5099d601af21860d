//
// promptkit.hpp
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

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "salesforge/core.hpp"

namespace salesforge::promptkit {

enum class TemplateId {
    Revision,
    IntentDetection,
    Continuation,
    Boundary,
    AgentCot,
    Persona,
    BaselineAgent,
    JudgeSchema,
    JudgeInstructions,
};

inline constexpr std::array<TemplateId, 9> kAllTemplates = {
    TemplateId::Revision,  TemplateId::IntentDetection, TemplateId::Continuation,
    TemplateId::Boundary,  TemplateId::AgentCot,        TemplateId::Persona,
    TemplateId::BaselineAgent, TemplateId::JudgeSchema, TemplateId::JudgeInstructions,
};

/// "revision", "intent_detection", ... ; also the data file stem under prompts/.
std::string_view to_string(TemplateId id);
TemplateId parse_template_id(std::string_view text);

struct Template {
    TemplateId id;
    /// Exact bytes of prompts/<id>.txt.
    std::string_view body;
    /// Slot names written as {name} in body. Other braces are literal text.
    std::vector<std::string> required_slots;
};

const Template& get_template(TemplateId id);

/// The labeled output block each pipeline stage must answer with.
std::string_view output_format(TemplateId stage);
std::string_view intent_description(Intent intent);

using SlotMap = std::map<std::string, std::string>;

/// Single-pass replacement of every {slot} for the listed slot names. Values
/// are inserted verbatim and never rescanned. Throws Error(MissingSlot) when
/// a listed slot has no value.
std::string substitute(std::string_view body, std::span<const std::string> slots, const SlotMap& values);

/// "User: ..." / "Agent: ..." lines joined by newlines.
std::string render_dialogue(std::span<const Turn> turns);
/// One canonical name per line, optionally "Name: description".
std::string render_intent_list(std::span<const Intent> intents, bool with_descriptions);

/// Fills one of the four pipeline templates. Caller slots:
///   revision {Dialogue}; intent_detection {Dialogue, Intent List};
///   continuation {Intent, Dialogue}; boundary {Intent, Dialogue}.
/// {output_format} is supplied here. Empty values count as missing.
std::string render_pipeline_stage(TemplateId stage, const SlotMap& slots);

std::string render_agent_prompt(std::span<const Turn> history, std::span<const Intent> intents);
std::string render_persona_prompt(const PersonaProfile& profile);
std::string render_baseline_prompt(std::span<const Intent> intents);
/// Throws Error(EmptyDialogue) for a dialogue without turns.
std::string render_judge_prompt(const Dialogue& dialogue);

/// Raw embedded data file by path relative to prompts/, e.g. "persona.txt".
std::string_view data_file(std::string_view relative_path);

}  // namespace salesforge::promptkit
