//
// serialize.cpp
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


#include "salesforge/serialize.hpp"

#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "salesforge/text.hpp"

namespace salesforge {

namespace {

const Json& require(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) {
        throw Error(ErrorKind::ParseError, std::string("missing field '") + key + "'");
    }
    return j.at(key);
}

std::string require_string(const Json& j, const char* key) {
    const Json& v = require(j, key);
    if (!v.is_string()) throw Error(ErrorKind::ParseError, std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

double require_number(const Json& j, const char* key) {
    const Json& v = require(j, key);
    if (!v.is_number()) throw Error(ErrorKind::ParseError, std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

std::optional<Intent> optional_intent(const Json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    if (!j.at(key).is_string()) throw Error(ErrorKind::ParseError, std::string("field '") + key + "' must be a string");
    return canonicalize_intent(j.at(key).get<std::string>());
}

Json intent_or_null(std::optional<Intent> intent) {
    return intent ? Json(std::string(canonical_name(*intent))) : Json(nullptr);
}

/// Repairs turns and carries the boundary through any merges.
void finish_turns(Dialogue& d, std::vector<Turn> raw, std::optional<std::size_t> raw_boundary) {
    std::vector<std::size_t> map;
    d.turns = repair_turns(std::move(raw), &map);
    d.boundary_index.reset();
    if (raw_boundary) {
        if (*raw_boundary >= map.size() || map[*raw_boundary] == static_cast<std::size_t>(-1)) {
            throw Error(ErrorKind::InvalidDialogue,
                        "dialogue '" + d.id + "' boundary_index " + std::to_string(*raw_boundary) + " out of range");
        }
        d.boundary_index = map[*raw_boundary];
    }
}

std::optional<std::size_t> optional_index(const Json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    const Json& v = j.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw Error(ErrorKind::ParseError, std::string("field '") + key + "' must be a non-negative integer");
    }
    return v.get<std::size_t>();
}

void for_each_line(const std::filesystem::path& path,
                   const std::function<void(const Json&, std::size_t)>& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        Json j = Json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw Error(ErrorKind::ParseError, path.string() + ":" + std::to_string(line_no) + ": invalid JSON");
        }
        try {
            fn(j, line_no);
        } catch (const Error& e) {
            throw Error(e.kind(), path.string() + ":" + std::to_string(line_no) + ": " + e.detail(), e.raw());
        }
    }
}

const Json* lookup(const Json& j, std::string_view path) {
    const Json* cur = &j;
    while (!path.empty()) {
        const std::size_t dot = path.find('.');
        const std::string key(path.substr(0, dot));
        if (!cur->is_object() || !cur->contains(key)) return nullptr;
        cur = &cur->at(key);
        path = dot == std::string_view::npos ? std::string_view{} : path.substr(dot + 1);
    }
    return cur;
}

}  // namespace

// ---------------------------------------------------------------------------

Json to_json(const Turn& turn) {
    return Json{{"speaker", std::string(to_string(turn.speaker))}, {"text", turn.text}};
}

Json to_json(const Dialogue& d) {
    Json j;
    j["id"] = d.id;
    j["source"] = std::string(to_string(d.source));
    j["intent"] = intent_or_null(d.intent);
    j["boundary_index"] = d.boundary_index ? Json(*d.boundary_index) : Json(nullptr);
    Json turns = Json::array();
    for (const Turn& t : d.turns) turns.push_back(to_json(t));
    j["turns"] = std::move(turns);
    for (const auto& [key, value] : d.extra.items()) {
        if (!j.contains(key)) j[key] = value;
    }
    return j;
}

Dialogue dialogue_from_json(const Json& j) {
    if (!j.is_object()) throw Error(ErrorKind::ParseError, "dialogue record must be an object");
    Dialogue d;
    d.id = require_string(j, "id");
    d.source = j.contains("source") ? parse_dialogue_source(require_string(j, "source")) : DialogueSource::SalesBot1;
    d.intent = optional_intent(j, "intent");
    const Json& turns = require(j, "turns");
    if (!turns.is_array()) throw Error(ErrorKind::ParseError, "field 'turns' must be an array");
    std::vector<Turn> raw;
    for (const Json& t : turns) {
        raw.push_back(Turn{raw.size(), parse_speaker(require_string(t, "speaker")), require_string(t, "text")});
    }
    finish_turns(d, std::move(raw), optional_index(j, "boundary_index"));
    static const std::set<std::string> owned = {"id", "source", "intent", "boundary_index", "turns"};
    for (const auto& [key, value] : j.items()) {
        if (!owned.contains(key)) d.extra[key] = value;
    }
    validate(d);
    return d;
}

Json to_json(const Policy& policy) {
    return Json{{"policy", std::string(to_string(policy.kind()))}, {"intent", intent_or_null(policy.intent())}};
}

Policy policy_from_json(const Json& j) {
    return Policy::make(parse_policy_kind(require_string(j, "policy")), optional_intent(j, "intent"));
}

Json to_json(const AgentStep& step) {
    Json j;
    j["thought"] = step.thought_text;
    j["policy"] = std::string(to_string(step.policy.kind()));
    j["intent"] = intent_or_null(step.policy.intent());
    j["response"] = step.response_text;
    j["raw_output"] = step.raw_output;
    j["baseline_derived"] = step.baseline_derived;
    j["warnings"] = step.warnings;
    return j;
}

AgentStep agent_step_from_json(const Json& j) {
    AgentStep step;
    step.thought_text = require_string(j, "thought");
    step.policy = policy_from_json(j);
    step.response_text = require_string(j, "response");
    step.raw_output = j.value("raw_output", std::string{});
    step.baseline_derived = j.value("baseline_derived", false);
    if (j.contains("warnings")) step.warnings = j.at("warnings").get<std::vector<std::string>>();
    return step;
}

Json to_json(const CorpusStats& stats) {
    Json hist = Json::object();
    for (Intent intent : kAllIntents) {
        auto it = stats.intent_histogram.find(intent);
        if (it != stats.intent_histogram.end()) hist[std::string(canonical_name(intent))] = it->second;
    }
    return Json{{"dialogue_count", stats.dialogue_count},
                {"avg_chitchat_turns", stats.avg_chitchat_turns},
                {"avg_transition_turns", stats.avg_transition_turns},
                {"avg_total_turns", stats.avg_total_turns},
                {"intent_histogram", hist}};
}

CorpusStats corpus_stats_from_json(const Json& j) {
    CorpusStats stats;
    stats.dialogue_count = require(j, "dialogue_count").get<std::size_t>();
    stats.avg_chitchat_turns = require_number(j, "avg_chitchat_turns");
    stats.avg_transition_turns = require_number(j, "avg_transition_turns");
    stats.avg_total_turns = require_number(j, "avg_total_turns");
    for (const auto& [name, count] : require(j, "intent_histogram").items()) {
        stats.intent_histogram[canonicalize_intent(name)] = count.get<std::size_t>();
    }
    return stats;
}

Json to_json(const TurnLevelReport& report) {
    Json confusion = Json::object();
    for (PolicyKind gold : kAllPolicyKinds) {
        Json row = Json::object();
        const auto& counts = report.confusion[static_cast<std::size_t>(gold)];
        for (PolicyKind pred : kAllPolicyKinds) row[std::string(to_string(pred))] = counts[static_cast<std::size_t>(pred)];
        row["Unparsed"] = counts[kUnparsedColumn];
        confusion[std::string(to_string(gold))] = row;
    }
    return Json{{"intent_accuracy", report.intent_accuracy},
                {"policy_accuracy", report.policy_accuracy},
                {"both_accuracy", report.both_accuracy},
                {"total", report.total},
                {"missing", report.missing},
                {"confusion", confusion}};
}

TurnLevelReport turn_level_report_from_json(const Json& j) {
    TurnLevelReport r;
    r.intent_accuracy = require_number(j, "intent_accuracy");
    r.policy_accuracy = require_number(j, "policy_accuracy");
    r.both_accuracy = require_number(j, "both_accuracy");
    r.total = require(j, "total").get<std::size_t>();
    r.missing = require(j, "missing").get<std::size_t>();
    const Json& confusion = require(j, "confusion");
    for (PolicyKind gold : kAllPolicyKinds) {
        const Json& row = require(confusion, std::string(to_string(gold)).c_str());
        auto& counts = r.confusion[static_cast<std::size_t>(gold)];
        for (PolicyKind pred : kAllPolicyKinds) {
            counts[static_cast<std::size_t>(pred)] = require(row, std::string(to_string(pred)).c_str()).get<std::size_t>();
        }
        counts[kUnparsedColumn] = require(row, "Unparsed").get<std::size_t>();
    }
    return r;
}

Json to_json(const JudgeScores& s) {
    auto c = [](const JudgeCriterion& x) { return Json{{"reason", x.reason}, {"score", x.score}}; };
    return Json{{"naturalness", c(s.naturalness)},
                {"coherence", c(s.coherence)},
                {"smoothness", c(s.smoothness)},
                {"agent_aggressiveness", c(s.agent_aggressiveness)},
                {"agent_consistency", c(s.agent_consistency)}};
}

JudgeScores judge_scores_from_json(const Json& j) {
    auto c = [&](const char* key) {
        const Json& v = require(j, key);
        return JudgeCriterion{require_string(v, "reason"), require_number(v, "score")};
    };
    return JudgeScores{c("naturalness"), c("coherence"), c("smoothness"), c("agent_aggressiveness"),
                       c("agent_consistency")};
}

Json to_json(const PersonaProfile& p) {
    Json names = Json::array();
    for (Intent intent : p.not_interested) names.push_back(std::string(canonical_name(intent)));
    return Json{{"persona_text", p.persona_text},
                {"preference_kind", std::string(to_string(p.preference_kind))},
                {"not_interested", names}};
}

PersonaProfile persona_profile_from_json(const Json& j) {
    PersonaProfile p;
    p.persona_text = require_string(j, "persona_text");
    p.preference_kind = parse_preference_kind(require_string(j, "preference_kind"));
    for (const Json& name : require(j, "not_interested")) p.not_interested.push_back(canonicalize_intent(name.get<std::string>()));
    validate(p);
    return p;
}

// ---------------------------------------------------------------------------

std::vector<Json> read_jsonl(const std::filesystem::path& path) {
    std::vector<Json> out;
    for_each_line(path, [&](const Json& j, std::size_t) { out.push_back(j); });
    return out;
}

std::string dump_jsonl(std::span<const Json> records) {
    std::string out;
    for (const Json& j : records) {
        out += j.dump(-1, ' ', false, Json::error_handler_t::replace);
        out += '\n';
    }
    return out;
}

void write_jsonl(const std::filesystem::path& path, std::span<const Json> records) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
    out << dump_jsonl(records);
    if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

FieldMapping field_mapping_from_json(const Json& j) {
    FieldMapping m;
    auto str = [&](const char* key, std::string& dst) {
        if (j.contains(key)) dst = j.at(key).get<std::string>();
    };
    str("id", m.id);
    str("turns", m.turns);
    str("speaker", m.speaker);
    str("text", m.text);
    str("intent", m.intent);
    str("boundary_index", m.boundary_index);
    str("boundary_text", m.boundary_text);
    str("turn_format", m.turn_format);
    str("first_speaker", m.first_speaker);
    if (j.contains("speaker_values")) {
        for (const auto& [k, v] : j.at("speaker_values").items()) m.speaker_values[k] = v.get<std::string>();
    }
    if (j.contains("source")) m.source = parse_dialogue_source(j.at("source").get<std::string>());
    if (m.turn_format != "objects" && m.turn_format != "prefixed" && m.turn_format != "alternating") {
        throw Error(ErrorKind::Config, "unknown turn_format '" + m.turn_format + "'");
    }
    return m;
}

FieldMapping load_field_mapping(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open mapping '" + path.string() + "'");
    Json j = Json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error(ErrorKind::Config, "mapping '" + path.string() + "' is not a JSON object");
    return field_mapping_from_json(j);
}

namespace {

Speaker mapped_speaker(const FieldMapping& m, std::string_view value) {
    auto it = m.speaker_values.find(std::string(value));
    if (it != m.speaker_values.end()) return parse_speaker(it->second);
    const std::string folded = text::to_lower(text::trim(value));
    if (folded == "user" || folded == "u" || folded == "customer") return Speaker::User;
    if (folded == "agent" || folded == "a" || folded == "system" || folded == "salesperson") return Speaker::Agent;
    throw Error(ErrorKind::ParseError, "cannot map speaker '" + std::string(value) + "'");
}

std::string scalar_string(const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    throw Error(ErrorKind::ParseError, "expected a string or integer id");
}

}  // namespace

Dialogue adapt_record(const Json& record, const FieldMapping& m) {
    Dialogue d;
    std::set<std::string> consumed;
    auto take = [&](const std::string& path) -> const Json* {
        if (path.empty()) return nullptr;
        const Json* v = lookup(record, path);
        if (v) consumed.insert(path.substr(0, path.find('.')));
        return v;
    };

    const Json* id = take(m.id);
    if (!id) throw Error(ErrorKind::ParseError, "missing id field '" + m.id + "'");
    d.id = scalar_string(*id);
    if (const Json* src = lookup(record, "source"); src && src->is_string() && !m.source) {
        d.source = parse_dialogue_source(src->get<std::string>());
        consumed.insert("source");
    } else {
        d.source = m.source.value_or(DialogueSource::SalesBot2);
    }
    if (const Json* intent = take(m.intent); intent && !intent->is_null()) {
        d.intent = canonicalize_intent(intent->get<std::string>());
    }

    const Json* turns = take(m.turns);
    if (!turns || !turns->is_array()) throw Error(ErrorKind::ParseError, "missing turns array '" + m.turns + "'");
    std::vector<Turn> raw;
    Speaker next = mapped_speaker(m, m.first_speaker);
    for (const Json& t : *turns) {
        Turn turn{raw.size(), next, {}};
        if (m.turn_format == "objects") {
            turn.speaker = mapped_speaker(m, t.at(m.speaker).get<std::string>());
            turn.text = t.at(m.text).get<std::string>();
        } else if (m.turn_format == "prefixed") {
            const std::string s = t.get<std::string>();
            const std::size_t colon = s.find(':');
            if (colon == std::string::npos) throw Error(ErrorKind::ParseError, "turn without speaker prefix: " + s);
            turn.speaker = mapped_speaker(m, s.substr(0, colon));
            turn.text = s.substr(colon + 1);
        } else {
            turn.text = t.get<std::string>();
        }
        next = other(turn.speaker);
        raw.push_back(std::move(turn));
    }

    std::optional<std::size_t> boundary;
    if (const Json* b = take(m.boundary_index); b && !b->is_null()) {
        boundary = b->get<std::size_t>();
    } else if (const Json* bt = take(m.boundary_text); bt && bt->is_string()) {
        const std::string wanted = text::normalize(bt->get<std::string>());
        for (const Turn& t : raw) {
            if (t.speaker == Speaker::User && text::normalize(t.text) == wanted) {
                boundary = t.index;
                break;
            }
        }
        if (!boundary) throw Error(ErrorKind::InvalidDialogue, "boundary text matches no user turn in '" + d.id + "'");
    }
    finish_turns(d, std::move(raw), boundary);

    for (const auto& [key, value] : record.items()) {
        if (!consumed.contains(key)) d.extra[key] = value;
    }
    validate(d);
    return d;
}

std::vector<Dialogue> read_dialogues(const std::filesystem::path& path, const std::optional<FieldMapping>& mapping) {
    std::vector<Dialogue> out;
    for_each_line(path, [&](const Json& j, std::size_t) {
        out.push_back(mapping ? adapt_record(j, *mapping) : dialogue_from_json(j));
    });
    return out;
}

void write_dialogues(const std::filesystem::path& path, std::span<const Dialogue> dialogues) {
    std::vector<Json> records;
    records.reserve(dialogues.size());
    for (const Dialogue& d : dialogues) records.push_back(to_json(d));
    write_jsonl(path, records);
}

}  // namespace salesforge
