//
// golden_prompts.hpp
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

#include <cstdlib>
#include <string>
#include <utility>
#include <vector>

#include "salesforge/promptkit.hpp"
#include "test_support.hpp"

namespace salesforge::testing {

inline Dialogue golden_dialogue() {
    Dialogue d;
    d.id = "golden";
    const std::pair<Speaker, std::string> turns[] = {
        {Speaker::User, "I spent the whole weekend reading."},
        {Speaker::Agent, "Nice! What are you reading at the moment?"},
        {Speaker::User, "A mystery novel. I might go see the film version too."},
        {Speaker::Agent, "That sounds fun. Do you often go to the cinema?"},
    };
    d.turns = make_turns(turns);
    return d;
}

/// Every template rendered with fixed slot values, keyed by template id.
inline std::vector<std::pair<promptkit::TemplateId, std::string>> render_golden_prompts() {
    using promptkit::TemplateId;
    const Dialogue d = golden_dialogue();
    const std::string dialogue = promptkit::render_dialogue(d.turns);
    const Intent movie[] = {Intent::FindMovie};
    const std::vector<Intent> trainable(kTrainableIntents.begin(), kTrainableIntents.end());

    std::vector<std::pair<TemplateId, std::string>> out;
    out.emplace_back(TemplateId::Revision, promptkit::render_pipeline_stage(TemplateId::Revision, {{"Dialogue", dialogue}}));
    out.emplace_back(TemplateId::IntentDetection,
                     promptkit::render_pipeline_stage(
                         TemplateId::IntentDetection,
                         {{"Dialogue", dialogue}, {"Intent List", promptkit::render_intent_list(kAllIntents, true)}}));
    out.emplace_back(TemplateId::Continuation,
                     promptkit::render_pipeline_stage(
                         TemplateId::Continuation,
                         {{"Intent", promptkit::render_intent_list(movie, true)}, {"Dialogue", dialogue}}));
    out.emplace_back(TemplateId::Boundary,
                     promptkit::render_pipeline_stage(TemplateId::Boundary,
                                                      {{"Intent", "FindMovie"}, {"Dialogue", dialogue}}));
    out.emplace_back(TemplateId::AgentCot,
                     promptkit::render_agent_prompt(std::span<const Turn>(d.turns).first(2), trainable));
    out.emplace_back(TemplateId::Persona,
                     promptkit::render_persona_prompt(PersonaProfile{
                         "You are Sam, a 29-year-old teacher who enjoys board games.", PreferenceKind::NotInterested2,
                         {Intent::FindMovie, Intent::SearchHotel}}));
    out.emplace_back(TemplateId::BaselineAgent, promptkit::render_baseline_prompt(trainable));
    out.emplace_back(TemplateId::JudgeSchema, std::string(promptkit::get_template(TemplateId::JudgeSchema).body));
    out.emplace_back(TemplateId::JudgeInstructions, promptkit::render_judge_prompt(d));
    return out;
}

inline bool update_goldens() {
    const char* v = std::getenv("SALESFORGE_UPDATE_GOLDEN");
    return v && std::string(v) == "1";
}

inline std::filesystem::path golden_prompt_path(promptkit::TemplateId id) {
    return golden("prompts/" + std::string(promptkit::to_string(id)) + ".txt");
}

}  // namespace salesforge::testing
