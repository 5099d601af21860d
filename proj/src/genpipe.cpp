//
// genpipe.cpp
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


#include "salesforge/genpipe.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

#include "salesforge/parallel.hpp"
#include "salesforge/promptkit.hpp"
#include "salesforge/serialize.hpp"
#include "salesforge/text.hpp"

namespace salesforge::genpipe {

using backend::ChatBackend;
using backend::ChatMessage;
using backend::Role;
using promptkit::TemplateId;

std::string_view to_string(Stage stage) {
    switch (stage) {
        case Stage::Revision: return "revision";
        case Stage::IntentDetection: return "intent_detection";
        case Stage::Continuation: return "continuation";
        case Stage::Boundary: return "boundary";
    }
    return "";
}

Json to_json(const StageRecord& r) {
    Json j;
    j["dialogue_id"] = r.dialogue_id;
    j["stage"] = std::string(to_string(r.stage));
    j["attempts"] = r.attempts;
    j["prompt"] = r.prompt;
    j["raw_output"] = r.raw_output;
    j["parsed"] = r.parsed ? *r.parsed : Json(nullptr);
    j["error"] = r.error.empty() ? Json(nullptr) : Json(r.error);
    return j;
}

Json to_json(const Quarantined& q) {
    Json j;
    j["dialogue_id"] = q.dialogue_id;
    j["stage"] = std::string(to_string(q.stage));
    j["error"] = std::string(salesforge::to_string(q.error));
    j["message"] = q.message;
    j["record"] = to_json(q.record);
    return j;
}

namespace {

Error stage_failure(const std::string& why, std::string_view raw) {
    return Error(ErrorKind::StageParseFailure, why, std::string(raw));
}

/// Matches "User:" / "Agent:" labels, tolerating surrounding markdown bold.
std::optional<std::pair<Speaker, std::string_view>> turn_label(std::string_view line) {
    std::string_view s = text::trim(line);
    while (!s.empty() && (s.front() == '*' || s.front() == '-')) s.remove_prefix(1);
    s = text::trim(s);
    for (Speaker speaker : {Speaker::User, Speaker::Agent}) {
        const std::string_view name = to_string(speaker);
        if (!text::starts_with_ci(s, name)) continue;
        std::string_view rest = s.substr(name.size());
        while (!rest.empty() && rest.front() == '*') rest.remove_prefix(1);
        if (rest.empty() || rest.front() != ':') continue;
        rest.remove_prefix(1);
        while (!rest.empty() && rest.front() == '*') rest.remove_prefix(1);
        return std::make_pair(speaker, text::trim(rest));
    }
    return std::nullopt;
}

std::string_view strip_quotes(std::string_view s) {
    s = text::trim(s);
    static constexpr std::string_view kPairs[][2] = {{"\"", "\""}, {"'", "'"}, {"\xE2\x80\x9C", "\xE2\x80\x9D"}};
    for (const auto& pair : kPairs) {
        if (s.size() >= pair[0].size() + pair[1].size() && s.starts_with(pair[0]) && s.ends_with(pair[1])) {
            s = text::trim(s.substr(pair[0].size(), s.size() - pair[0].size() - pair[1].size()));
        }
    }
    return s;
}

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

Json turns_json(std::span<const Turn> turns) {
    Json arr = Json::array();
    for (const Turn& t : turns) arr.push_back(to_json(t));
    return arr;
}

/// Sends the prompt, parses the reply and re-asks with the parse error until
/// the attempt budget runs out. Backend errors are not retried here (the
/// backend has its own retry policy).
template <class T>
T run_stage(Stage stage, const std::string& dialogue_id, const std::string& prompt, ChatBackend& backend,
            const PipelineConfig& config, const std::function<T(const std::string&, Json&)>& parse,
            StageRecord* record) {
    StageRecord local;
    StageRecord& rec = record ? *record : local;
    rec = StageRecord{};
    rec.dialogue_id = dialogue_id;
    rec.stage = stage;
    rec.prompt = prompt;

    const int attempts = std::max(1, config.attempts);
    std::vector<ChatMessage> messages{{Role::User, prompt}};
    for (int attempt = 1;; ++attempt) {
        rec.attempts = attempt;
        backend::CompletionResponse response;
        try {
            response = backend.complete(backend::make_request(messages, config.sampling));
        } catch (const Error& e) {
            rec.error = e.what();
            throw;
        }
        rec.raw_output = response.text;
        try {
            Json payload;
            T value = parse(response.text, payload);
            rec.parsed = std::move(payload);
            rec.error.clear();
            return value;
        } catch (const Error& e) {
            rec.error = e.what();
            if (attempt >= attempts) {
                throw Error(e.kind(),
                            std::string(to_string(stage)) + " failed after " + std::to_string(attempt) +
                                " attempt(s): " + e.detail(),
                            response.text);
            }
            messages.resize(1);
            messages.push_back({Role::Assistant, response.text});
            messages.push_back({Role::User, "Your previous answer could not be used: " + e.detail() +
                                                "\nAnswer again and follow the required output format exactly."});
        }
    }
}

}  // namespace

std::vector<Turn> parse_turn_block(std::string_view raw, std::string_view header) {
    const std::vector<std::string_view> lines = text::split_lines(raw);
    std::optional<std::size_t> start;
    for (std::size_t i = 0; i < lines.size() && !start; ++i) {
        std::string_view line = text::trim(lines[i]);
        while (!line.empty() && (line.front() == '*' || line.front() == '#')) line.remove_prefix(1);
        if (text::starts_with_ci(text::trim(line), header)) start = i + 1;
    }
    if (!start) throw stage_failure("missing '" + std::string(header) + "' block", raw);
    std::vector<Turn> turns;
    for (std::size_t i = *start; i < lines.size(); ++i) {
        if (auto label = turn_label(lines[i])) {
            turns.push_back(Turn{turns.size(), label->first, std::string(label->second)});
        } else if (!turns.empty() && !text::trim(lines[i]).empty()) {
            turns.back().text += "\n";
            turns.back().text += text::trim(lines[i]);
        }
    }
    turns = repair_turns(std::move(turns));
    if (turns.empty()) throw stage_failure("no turn lines under '" + std::string(header) + "'", raw);
    return turns;
}

Intent parse_topic(std::string_view raw) {
    const auto lines = text::split_lines(raw);
    for (std::string_view line : lines) {
        std::string_view s = text::trim(line);
        while (!s.empty() && s.front() == '*') s.remove_prefix(1);
        if (!text::starts_with_ci(s, "topic")) continue;
        std::string_view rest = s.substr(5);
        while (!rest.empty() && rest.front() == '*') rest.remove_prefix(1);
        if (rest.empty() || rest.front() != ':') continue;
        std::string_view value = text::trim(rest.substr(1));
        while (!value.empty() && value.front() == '*') value.remove_prefix(1);
        while (!value.empty() && (value.back() == '.' || value.back() == '*')) value.remove_suffix(1);
        value = strip_quotes(value);
        return canonicalize_intent(strip_quotes(value));
    }
    std::vector<std::string_view> nonblank;
    for (auto l : lines) {
        if (!text::trim(l).empty()) nonblank.push_back(l);
    }
    if (nonblank.size() == 1) {
        std::string_view value = strip_quotes(nonblank.front());
        while (!value.empty() && value.back() == '.') value.remove_suffix(1);
        return canonicalize_intent(value);
    }
    throw stage_failure("missing 'Topic:' line", raw);
}

std::string parse_boundary_answer(std::string_view raw) {
    for (std::string_view line : text::split_lines(raw)) {
        std::string_view s = text::trim(line);
        while (!s.empty() && s.front() == '*') s.remove_prefix(1);
        if (!text::starts_with_ci(s, "turn")) continue;
        std::string_view rest = s.substr(4);
        while (!rest.empty() && rest.front() == '*') rest.remove_prefix(1);
        if (rest.empty() || rest.front() != ':') continue;
        std::string_view value = strip_quotes(rest.substr(1));
        if (auto label = turn_label(value)) value = strip_quotes(label->second);
        if (value.empty()) break;
        return std::string(value);
    }
    throw stage_failure("missing 'Turn:' line", raw);
}

BoundaryMatch resolve_boundary(const Dialogue& d, std::string_view answer, double threshold) {
    const std::string wanted = text::normalize(answer);
    auto check_user = [&](std::size_t index, BoundaryMatch m) {
        if (d.turns[index].speaker != Speaker::User) {
            throw Error(ErrorKind::BoundaryInvalid,
                        "turn " + std::to_string(index) + " is said by Agent; the boundary must be a User turn",
                        std::string(answer));
        }
        m.index = index;
        return m;
    };

    std::optional<std::size_t> agent_exact;
    for (const Turn& t : d.turns) {
        if (text::normalize(t.text) != wanted) continue;
        if (t.speaker == Speaker::User) return BoundaryMatch{t.index, 1.0, true};
        if (!agent_exact) agent_exact = t.index;
    }
    if (agent_exact) return check_user(*agent_exact, {});

    if (all_digits(wanted)) {
        const std::size_t index = std::stoul(wanted);
        if (index >= d.turns.size()) {
            throw Error(ErrorKind::BoundaryInvalid,
                        "turn index " + wanted + " out of range for " + std::to_string(d.turns.size()) + " turns",
                        std::string(answer));
        }
        return check_user(index, BoundaryMatch{index, 1.0, true});
    }

    std::optional<std::size_t> best;
    double best_similarity = -1.0;
    for (const Turn& t : d.turns) {
        const double s = text::normalized_similarity(t.text, answer);
        if (s > best_similarity) {
            best_similarity = s;
            best = t.index;
        }
    }
    if (!best || best_similarity < threshold) {
        throw stage_failure("the quoted turn does not appear in the dialogue", answer);
    }
    return check_user(*best, BoundaryMatch{*best, best_similarity, false});
}

// ---------------------------------------------------------------------------

Dialogue revise_chitchat(const Dialogue& d, ChatBackend& backend, const PipelineConfig& config, StageRecord* record) {
    if (d.turns.empty()) throw Error(ErrorKind::EmptyInput, "dialogue '" + d.id + "' has no turns to revise");
    const std::string prompt =
        promptkit::render_pipeline_stage(TemplateId::Revision, {{"Dialogue", promptkit::render_dialogue(d.turns)}});
    std::function<std::vector<Turn>(const std::string&, Json&)> parse = [&](const std::string& raw, Json& payload) {
        std::vector<Turn> turns = parse_turn_block(raw, "Rewritten Dialogue:");
        if (turns.size() < config.min_revised_turns) {
            throw stage_failure("the rewritten dialogue has " + std::to_string(turns.size()) +
                                    " turns; it must be more than " + std::to_string(config.min_revised_turns - 1) +
                                    " turns",
                                raw);
        }
        payload = Json{{"original", turns_json(d.turns)}, {"revised", turns_json(turns)}};
        return turns;
    };
    Dialogue revised = d;
    revised.turns = run_stage(Stage::Revision, d.id, prompt, backend, config, parse, record);
    revised.intent.reset();
    revised.boundary_index.reset();
    return revised;
}

Intent detect_intent(const Dialogue& d, ChatBackend& backend, const PipelineConfig& config, StageRecord* record) {
    if (d.turns.empty()) throw Error(ErrorKind::EmptyInput, "dialogue '" + d.id + "' has no turns");
    const std::string prompt = promptkit::render_pipeline_stage(
        TemplateId::IntentDetection, {{"Dialogue", promptkit::render_dialogue(d.turns)},
                                      {"Intent List", promptkit::render_intent_list(kAllIntents, true)}});
    std::function<Intent(const std::string&, Json&)> parse = [](const std::string& raw, Json& payload) {
        Intent intent = [&] {
            try {
                return parse_topic(raw);
            } catch (const Error& e) {
                throw Error(e.kind(), e.detail(), raw);
            }
        }();
        payload = Json{{"intent", std::string(canonical_name(intent))}};
        return intent;
    };
    return run_stage(Stage::IntentDetection, d.id, prompt, backend, config, parse, record);
}

Dialogue continue_dialogue(const Dialogue& d, Intent intent, ChatBackend& backend, const PipelineConfig& config,
                           StageRecord* record) {
    const Intent whitelisted[] = {intent};
    const std::string prompt = promptkit::render_pipeline_stage(
        TemplateId::Continuation, {{"Intent", promptkit::render_intent_list(whitelisted, true)},
                                   {"Dialogue", promptkit::render_dialogue(d.turns)}});
    std::function<std::vector<Turn>(const std::string&, Json&)> parse = [&](const std::string& raw, Json& payload) {
        std::vector<Turn> added = parse_turn_block(raw, "Continued Dialogue:");
        // Models sometimes restate the given context before continuing it.
        std::size_t skip = 0;
        while (skip < added.size() && skip < d.turns.size() && added[skip].speaker == d.turns[skip].speaker &&
               text::normalize(added[skip].text) == text::normalize(d.turns[skip].text)) {
            ++skip;
        }
        if (skip == d.turns.size()) added.erase(added.begin(), added.begin() + static_cast<std::ptrdiff_t>(skip));

        std::vector<Turn> all = d.turns;
        all.insert(all.end(), added.begin(), added.end());
        all = repair_turns(std::move(all));
        const std::size_t appended = all.size() > d.turns.size() ? all.size() - d.turns.size() : 0;
        if (appended < config.min_continuation_turns) {
            throw stage_failure("the continuation adds " + std::to_string(appended) + " turns; at least " +
                                    std::to_string(config.min_continuation_turns) + " are required",
                                raw);
        }
        payload = Json{{"appended", appended},
                       {"turns", turns_json(std::span<const Turn>(all).subspan(d.turns.size()))}};
        return all;
    };
    Dialogue out = d;
    out.turns = run_stage(Stage::Continuation, d.id, prompt, backend, config, parse, record);
    out.intent = intent;
    out.boundary_index.reset();
    return out;
}

std::size_t detect_boundary(const Dialogue& d, Intent intent, ChatBackend& backend, const PipelineConfig& config,
                            StageRecord* record) {
    if (std::none_of(d.turns.begin(), d.turns.end(), [](const Turn& t) { return t.speaker == Speaker::User; })) {
        throw Error(ErrorKind::BoundaryInvalid, "dialogue '" + d.id + "' has no User turn");
    }
    const std::string prompt = promptkit::render_pipeline_stage(
        TemplateId::Boundary,
        {{"Intent", std::string(canonical_name(intent))}, {"Dialogue", promptkit::render_dialogue(d.turns)}});
    std::function<std::size_t(const std::string&, Json&)> parse = [&](const std::string& raw, Json& payload) {
        const std::string answer = parse_boundary_answer(raw);
        BoundaryMatch match = [&] {
            try {
                return resolve_boundary(d, answer, config.boundary_similarity);
            } catch (const Error& e) {
                throw Error(e.kind(), e.detail(), raw);
            }
        }();
        payload = Json{{"boundary_index", match.index},
                       {"answer", answer},
                       {"match", match.exact ? "exact" : "similar"},
                       {"similarity", match.similarity}};
        return match.index;
    };
    return run_stage(Stage::Boundary, d.id, prompt, backend, config, parse, record);
}

// ---------------------------------------------------------------------------

PipelineResult run_pipeline(std::span<const Dialogue> seeds, ChatBackend& backend, const PipelineConfig& config) {
    if (seeds.empty()) throw Error(ErrorKind::EmptyInput, "no seed dialogues");

    struct ItemResult {
        std::optional<Dialogue> dialogue;
        std::vector<StageRecord> records;
        std::optional<Quarantined> reject;
    };
    std::vector<ItemResult> items(seeds.size());

    parallel_for(seeds.size(), config.concurrency, [&](std::size_t i) {
        const Dialogue& seed = seeds[i];
        ItemResult& item = items[i];
        Stage stage = Stage::Revision;
        StageRecord current;
        auto finish = [&] { item.records.push_back(current); };
        try {
            current = {};
            Dialogue revised = revise_chitchat(seed, backend, config, &current);
            finish();
            stage = Stage::IntentDetection;
            current = {};
            const Intent intent = detect_intent(revised, backend, config, &current);
            finish();
            stage = Stage::Continuation;
            current = {};
            Dialogue full = continue_dialogue(revised, intent, backend, config, &current);
            finish();
            stage = Stage::Boundary;
            current = {};
            const std::size_t boundary = detect_boundary(full, intent, backend, config, &current);
            finish();

            full.source = DialogueSource::Generated;
            full.intent = intent;
            full.boundary_index = boundary;
            validate(full);
            item.dialogue = std::move(full);
        } catch (const Error& e) {
            if (current.dialogue_id.empty()) {
                current.dialogue_id = seed.id;
                current.stage = stage;
                current.error = e.what();
            }
            finish();
            item.reject = Quarantined{seed.id, stage, e.kind(), e.detail(), current};
        } catch (const std::exception& e) {
            current.dialogue_id = seed.id;
            current.stage = stage;
            current.error = e.what();
            finish();
            item.reject = Quarantined{seed.id, stage, ErrorKind::StageParseFailure, e.what(), current};
        }
    });

    PipelineResult result;
    for (ItemResult& item : items) {
        for (StageRecord& r : item.records) result.records.push_back(std::move(r));
        if (item.dialogue) result.corpus.push_back(std::move(*item.dialogue));
        if (item.reject) result.rejects.push_back(std::move(*item.reject));
    }
    return result;
}

}  // namespace salesforge::genpipe
