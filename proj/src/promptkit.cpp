//
// promptkit.cpp
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


#include "salesforge/promptkit.hpp"

#include <algorithm>
#include <utility>

#include "salesforge/text.hpp"

namespace salesforge::promptkit {

namespace detail {
std::span<const std::pair<std::string_view, std::string_view>> embedded_files();
}  // namespace detail

std::string_view data_file(std::string_view relative_path) {
    for (const auto& [name, body] : detail::embedded_files()) {
        if (name == relative_path) return body;
    }
    throw Error(ErrorKind::Io, "no embedded prompt file '" + std::string(relative_path) + "'");
}

std::string_view to_string(TemplateId id) {
    switch (id) {
        case TemplateId::Revision: return "revision";
        case TemplateId::IntentDetection: return "intent_detection";
        case TemplateId::Continuation: return "continuation";
        case TemplateId::Boundary: return "boundary";
        case TemplateId::AgentCot: return "agent_cot";
        case TemplateId::Persona: return "persona";
        case TemplateId::BaselineAgent: return "baseline_agent";
        case TemplateId::JudgeSchema: return "judge_schema";
        case TemplateId::JudgeInstructions: return "judge_instructions";
    }
    return "";
}

TemplateId parse_template_id(std::string_view text) {
    for (TemplateId id : kAllTemplates) {
        if (to_string(id) == text) return id;
    }
    throw Error(ErrorKind::ParseError, "unknown template '" + std::string(text) + "'");
}

namespace {

std::vector<std::string> slots_for(TemplateId id) {
    switch (id) {
        case TemplateId::Revision: return {"Dialogue", "output_format"};
        case TemplateId::IntentDetection: return {"Dialogue", "Intent List", "output_format"};
        case TemplateId::Continuation: return {"Intent", "Dialogue", "output_format"};
        case TemplateId::Boundary: return {"Intent", "Dialogue", "output_format"};
        case TemplateId::AgentCot: return {"dialogue_history", "intents"};
        case TemplateId::Persona: return {"persona", "intents"};
        case TemplateId::BaselineAgent: return {"intents"};
        case TemplateId::JudgeSchema: return {};
        case TemplateId::JudgeInstructions: return {"dialog", "eval_schema"};
    }
    return {};
}

std::vector<Template> build_registry() {
    std::vector<Template> out;
    for (TemplateId id : kAllTemplates) {
        out.push_back(Template{id, data_file(std::string(to_string(id)) + ".txt"), slots_for(id)});
    }
    return out;
}

bool is_pipeline_stage(TemplateId id) {
    return id == TemplateId::Revision || id == TemplateId::IntentDetection || id == TemplateId::Continuation ||
           id == TemplateId::Boundary;
}

std::string_view strip_final_newline(std::string_view s) {
    if (!s.empty() && s.back() == '\n') s.remove_suffix(1);
    return s;
}

}  // namespace

const Template& get_template(TemplateId id) {
    static const std::vector<Template> registry = build_registry();
    return registry.at(static_cast<std::size_t>(id));
}

std::string_view output_format(TemplateId stage) {
    if (!is_pipeline_stage(stage)) {
        throw Error(ErrorKind::MissingSlot, std::string(to_string(stage)) + " has no output format");
    }
    return data_file("output_formats/" + std::string(to_string(stage)) + ".txt");
}

std::string_view intent_description(Intent intent) {
    static const std::map<Intent, std::string> descriptions = [] {
        std::map<Intent, std::string> out;
        for (std::string_view line : text::split_lines(data_file("intent_descriptions.tsv"))) {
            const std::size_t tab = line.find('\t');
            if (tab == std::string_view::npos) continue;
            out[canonicalize_intent(line.substr(0, tab))] = std::string(text::trim(line.substr(tab + 1)));
        }
        return out;
    }();
    auto it = descriptions.find(intent);
    if (it == descriptions.end()) return {};
    return it->second;
}

std::string substitute(std::string_view body, std::span<const std::string> slots, const SlotMap& values) {
    for (const std::string& slot : slots) {
        if (!values.contains(slot)) throw Error(ErrorKind::MissingSlot, "slot {" + slot + "} has no value");
    }
    std::string out;
    out.reserve(body.size());
    std::size_t i = 0;
    while (i < body.size()) {
        if (body[i] == '{') {
            const std::size_t close = body.find('}', i + 1);
            if (close != std::string_view::npos) {
                const std::string name(body.substr(i + 1, close - i - 1));
                if (std::find(slots.begin(), slots.end(), name) != slots.end()) {
                    out += values.at(name);
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(body[i]);
        ++i;
    }
    return out;
}

std::string render_dialogue(std::span<const Turn> turns) {
    std::string out;
    for (std::size_t i = 0; i < turns.size(); ++i) {
        if (i) out += '\n';
        out += to_string(turns[i].speaker);
        out += ": ";
        out += turns[i].text;
    }
    return out;
}

std::string render_intent_list(std::span<const Intent> intents, bool with_descriptions) {
    std::string out;
    for (std::size_t i = 0; i < intents.size(); ++i) {
        if (i) out += '\n';
        out += canonical_name(intents[i]);
        if (with_descriptions) {
            out += ": ";
            out += intent_description(intents[i]);
        }
    }
    return out;
}

std::string render_pipeline_stage(TemplateId stage, const SlotMap& slots) {
    if (!is_pipeline_stage(stage)) {
        throw Error(ErrorKind::MissingSlot, std::string(to_string(stage)) + " is not a pipeline stage");
    }
    const Template& t = get_template(stage);
    SlotMap values = slots;
    for (const std::string& slot : t.required_slots) {
        if (slot == "output_format") continue;
        auto it = values.find(slot);
        if (it == values.end() || text::trim(it->second).empty()) {
            throw Error(ErrorKind::MissingSlot, std::string(to_string(stage)) + " needs slot {" + slot + "}");
        }
    }
    values["output_format"] = std::string(output_format(stage));
    return substitute(t.body, t.required_slots, values);
}

std::string render_agent_prompt(std::span<const Turn> history, std::span<const Intent> intents) {
    if (intents.empty()) throw Error(ErrorKind::MissingSlot, "agent prompt needs at least one intent in {intents}");
    const Template& t = get_template(TemplateId::AgentCot);
    return substitute(t.body, t.required_slots,
                      {{"dialogue_history", render_dialogue(history)}, {"intents", render_intent_list(intents, false)}});
}

std::string render_persona_prompt(const PersonaProfile& profile) {
    validate(profile);
    std::vector<std::string> names;
    for (Intent intent : profile.not_interested) names.emplace_back(canonical_name(intent));
    const Template& t = get_template(TemplateId::Persona);
    return substitute(t.body, t.required_slots,
                      {{"persona", std::string(text::trim(profile.persona_text))}, {"intents", text::join(names, ", ")}});
}

std::string render_baseline_prompt(std::span<const Intent> intents) {
    if (intents.empty()) throw Error(ErrorKind::MissingSlot, "baseline prompt needs at least one intent in {intents}");
    const Template& t = get_template(TemplateId::BaselineAgent);
    return substitute(t.body, t.required_slots, {{"intents", render_intent_list(intents, false)}});
}

std::string render_judge_prompt(const Dialogue& dialogue) {
    if (dialogue.turns.empty()) throw Error(ErrorKind::EmptyDialogue, "dialogue '" + dialogue.id + "' has no turns");
    const Template& t = get_template(TemplateId::JudgeInstructions);
    return substitute(t.body, t.required_slots,
                      {{"dialog", render_dialogue(dialogue.turns)},
                       {"eval_schema", std::string(strip_final_newline(get_template(TemplateId::JudgeSchema).body))}});
}

}  // namespace salesforge::promptkit
