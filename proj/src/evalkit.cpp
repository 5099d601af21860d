//
// evalkit.cpp
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

#include "salesforge/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "salesforge/parallel.hpp"
#include "salesforge/promptkit.hpp"
#include "salesforge/serialize.hpp"
#include "salesforge/text.hpp"

namespace salesforge::evalkit {

using backend::ChatMessage;
using backend::Role;

namespace {

std::size_t idx(PolicyKind kind) { return static_cast<std::size_t>(kind); }

struct Key {
    std::string dialogue_id;
    std::size_t turn_index;
    auto operator<=>(const Key&) const = default;
};

std::string describe_key(const Key& k) { return "(" + k.dialogue_id + ", " + std::to_string(k.turn_index) + ")"; }

double round2(double x) { return std::round(x * 100.0) / 100.0; }

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> number_or_null(const Json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<double>();
}

// Rubric keys exactly as the schema spells them.
constexpr std::array<std::string_view, 5> kJudgeKeys = {
    "naturalness", "coherence", "smoothness", "agent aggressiveness", "agent consistancy",
};

Json judge_means_to_json(const JudgeMeans& m) {
    return Json{{"naturalness", m.naturalness},
                {"coherence", m.coherence},
                {"smoothness", m.smoothness},
                {"agent_aggressiveness", m.agent_aggressiveness},
                {"agent_consistency", m.agent_consistency}};
}

JudgeMeans judge_means_from_json(const Json& j) {
    return JudgeMeans{j.at("naturalness").get<double>(), j.at("coherence").get<double>(),
                      j.at("smoothness").get<double>(), j.at("agent_aggressiveness").get<double>(),
                      j.at("agent_consistency").get<double>()};
}

}  // namespace

// ---------------------------------------------------------------------------
// Gold labels
// ---------------------------------------------------------------------------

Json to_json(const GoldTurn& g) {
    Json j;
    j["dialogue_id"] = g.dialogue_id;
    j["turn_index"] = g.turn_index;
    j["policy"] = std::string(to_string(g.gold_policy.kind()));
    j["intent"] = g.gold_policy.intent() ? Json(std::string(canonical_name(*g.gold_policy.intent()))) : Json(nullptr);
    return j;
}

GoldTurn gold_turn_from_json(const Json& j) {
    try {
        std::optional<Intent> intent;
        if (j.contains("intent") && !j["intent"].is_null()) intent = canonicalize_intent(j["intent"].get<std::string>());
        return GoldTurn{j.at("dialogue_id").get<std::string>(), j.at("turn_index").get<std::size_t>(),
                        Policy::make(parse_policy_kind(j.at("policy").get<std::string>()), intent)};
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::ParseError, std::string("gold turn: ") + e.what());
    }
}

std::vector<GoldTurn> read_gold(const std::filesystem::path& path) {
    std::vector<GoldTurn> gold;
    for (const Json& j : read_jsonl(path)) gold.push_back(gold_turn_from_json(j));
    return gold;
}

void write_gold(const std::filesystem::path& path, std::span<const GoldTurn> gold) {
    std::vector<Json> records;
    for (const auto& g : gold) records.push_back(to_json(g));
    write_jsonl(path, records);
}

bool ends_in_handover(const Dialogue& d) {
    if (d.extra.contains("handover") && d.extra["handover"].is_boolean() && d.extra["handover"].get<bool>()) {
        return true;
    }
    for (auto it = d.turns.rbegin(); it != d.turns.rend(); ++it) {
        if (it->speaker == Speaker::Agent) return agent::contains_handover_marker(it->text);
    }
    return false;
}

std::vector<GoldTurn> derive_gold_labels(const Dialogue& d) {
    if (!d.boundary_index) throw Error(ErrorKind::MissingBoundary, "dialogue '" + d.id + "' has no boundary_index");
    if (!d.intent) throw Error(ErrorKind::InvalidDialogue, "dialogue '" + d.id + "' has no intent");
    const std::size_t boundary = *d.boundary_index;
    const Intent intent = *d.intent;

    std::optional<std::size_t> last_agent;
    for (const Turn& t : d.turns) {
        if (t.speaker == Speaker::Agent) last_agent = t.index;
    }
    const bool handover = ends_in_handover(d);

    std::vector<GoldTurn> gold;
    bool pivoted = false;
    for (const Turn& t : d.turns) {
        if (t.speaker != Speaker::Agent) continue;
        Policy policy = Policy::continue_chit_chat();
        if (t.index > boundary) {
            if (!pivoted) {
                policy = Policy::pivot_to_intent(intent);
                pivoted = true;
            } else if (handover && t.index == last_agent) {
                policy = Policy::explicit_intent(intent);
            } else {
                policy = Policy::continue_topic(intent);
            }
        }
        gold.push_back({d.id, t.index, policy});
    }
    return gold;
}

// ---------------------------------------------------------------------------
// Predictions
// ---------------------------------------------------------------------------

std::vector<Prediction> predictions_from_transcripts(std::span<const agent::Transcript> transcripts) {
    std::vector<Prediction> out;
    for (const auto& t : transcripts) {
        for (const auto& s : t.steps) out.push_back({t.dialogue.id, s.turn_index, s.step.policy});
    }
    return out;
}

std::vector<Prediction> predict_turns(std::span<const Dialogue> dialogues, std::span<const GoldTurn> gold,
                                      backend::ChatBackend& backend, const agent::AgentConfig& config,
                                      std::size_t concurrency) {
    std::map<std::string, const Dialogue*> by_id;
    for (const auto& d : dialogues) by_id[d.id] = &d;
    for (const auto& g : gold) {
        auto it = by_id.find(g.dialogue_id);
        if (it == by_id.end()) {
            throw Error(ErrorKind::PreconditionViolation, "gold turn refers to unknown dialogue '" + g.dialogue_id + "'");
        }
        const auto& turns = it->second->turns;
        if (g.turn_index >= turns.size() || turns[g.turn_index].speaker != Speaker::Agent) {
            throw Error(ErrorKind::PreconditionViolation,
                        "gold turn " + describe_key({g.dialogue_id, g.turn_index}) + " is not an agent turn");
        }
    }

    std::vector<Prediction> out(gold.size());
    parallel_for(gold.size(), concurrency, [&](std::size_t i) {
        const GoldTurn& g = gold[i];
        out[i].dialogue_id = g.dialogue_id;
        out[i].turn_index = g.turn_index;
        // An opening agent turn has no user utterance to answer.
        if (g.turn_index == 0) return;
        const auto& turns = by_id.at(g.dialogue_id)->turns;
        agent::AgentState state;
        state.history.assign(turns.begin(), turns.begin() + static_cast<std::ptrdiff_t>(g.turn_index - 1));
        try {
            out[i].policy = agent::agent_step(state, turns[g.turn_index - 1].text, backend, config).step.policy;
        } catch (const Error&) {
            out[i].policy.reset();
        }
    });
    return out;
}

// ---------------------------------------------------------------------------
// Turn-level scoring
// ---------------------------------------------------------------------------

bool intent_match(const Policy& gold, const Policy& predicted) { return gold.intent() == predicted.intent(); }

TurnLevelReport turn_level_eval(std::span<const Prediction> predictions, std::span<const GoldTurn> gold) {
    if (gold.empty()) throw Error(ErrorKind::EmptyGold, "no gold turns to score");
    std::map<Key, std::optional<Policy>> predicted;
    for (const auto& p : predictions) {
        Key key{p.dialogue_id, p.turn_index};
        if (!predicted.emplace(key, p.policy).second) {
            throw Error(ErrorKind::KeyCollision, "duplicate prediction for " + describe_key(key));
        }
    }
    std::set<Key> seen;
    TurnLevelReport report;
    std::size_t intent_hits = 0;
    std::size_t policy_hits = 0;
    std::size_t both_hits = 0;
    for (const auto& g : gold) {
        Key key{g.dialogue_id, g.turn_index};
        if (!seen.insert(key).second) throw Error(ErrorKind::KeyCollision, "duplicate gold turn " + describe_key(key));
        auto& row = report.confusion[idx(g.gold_policy.kind())];
        auto it = predicted.find(key);
        if (it == predicted.end() || !it->second) {
            if (it == predicted.end()) ++report.missing;
            ++row[kUnparsedColumn];
            continue;
        }
        const Policy& p = *it->second;
        ++row[idx(p.kind())];
        const bool i_ok = intent_match(g.gold_policy, p);
        const bool p_ok = g.gold_policy.kind() == p.kind();
        intent_hits += i_ok;
        policy_hits += p_ok;
        both_hits += i_ok && p_ok;
    }
    report.total = gold.size();
    const auto n = static_cast<double>(report.total);
    report.intent_accuracy = static_cast<double>(intent_hits) / n;
    report.policy_accuracy = static_cast<double>(policy_hits) / n;
    report.both_accuracy = static_cast<double>(both_hits) / n;
    return report;
}

std::array<MatchRate, 4> match_rates(const TurnLevelReport& report) {
    std::array<MatchRate, 4> rates{};
    for (PolicyKind kind : kAllPolicyKinds) {
        const std::size_t k = idx(kind);
        std::size_t row = 0;
        std::size_t column = 0;
        for (std::size_t c = 0; c <= kUnparsedColumn; ++c) row += report.confusion[k][c];
        for (std::size_t r = 0; r < 4; ++r) column += report.confusion[r][k];
        const auto hit = static_cast<double>(report.confusion[k][k]);
        if (row > 0) rates[k].recall = hit / static_cast<double>(row);
        if (column > 0) rates[k].precision = hit / static_cast<double>(column);
    }
    return rates;
}

// ---------------------------------------------------------------------------
// Corpus and dialogue level
// ---------------------------------------------------------------------------

CorpusStatsResult corpus_stats(std::span<const Dialogue> corpus) {
    if (corpus.empty()) throw Error(ErrorKind::EmptyCorpus, "the corpus is empty");
    CorpusStatsResult result;
    std::size_t chitchat = 0;
    std::size_t transition = 0;
    for (const auto& d : corpus) {
        try {
            Segments s = segment_dialogue(d);
            chitchat += s.chitchat.size();
            transition += s.transition.size();
            ++result.stats.dialogue_count;
            if (d.intent) ++result.stats.intent_histogram[*d.intent];
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::MissingBoundary && e.kind() != ErrorKind::InvalidDialogue) throw;
            result.rejects.push_back({d.id, std::string(to_string(e.kind())) + ": " + e.detail()});
        }
    }
    if (result.stats.dialogue_count == 0) {
        throw Error(ErrorKind::EmptyCorpus, "no dialogue in the corpus has a usable boundary");
    }
    const auto n = static_cast<double>(result.stats.dialogue_count);
    result.stats.avg_chitchat_turns = static_cast<double>(chitchat) / n;
    result.stats.avg_transition_turns = static_cast<double>(transition) / n;
    result.stats.avg_total_turns = result.stats.avg_chitchat_turns + result.stats.avg_transition_turns;
    return result;
}

double proceed_tod_rate(std::span<const agent::Transcript> transcripts) {
    if (transcripts.empty()) throw Error(ErrorKind::EmptyInput, "no dialogues to rate");
    std::size_t handovers = 0;
    for (const auto& t : transcripts) {
        if (!t.steps.empty() && agent::is_handover(t.steps.back().step)) ++handovers;
    }
    return static_cast<double>(handovers) / static_cast<double>(transcripts.size());
}

double average_turns(std::span<const agent::Transcript> transcripts) {
    if (transcripts.empty()) throw Error(ErrorKind::EmptyInput, "no dialogues to average");
    std::size_t turns = 0;
    for (const auto& t : transcripts) turns += t.dialogue.turns.size();
    return static_cast<double>(turns) / static_cast<double>(transcripts.size());
}

// ---------------------------------------------------------------------------
// Judge
// ---------------------------------------------------------------------------

JudgeScores parse_judge_reply(std::string_view raw) {
    auto fail = [&](const std::string& why) { return Error(ErrorKind::JudgeParseFailure, why, std::string(raw)); };
    const std::size_t open = raw.find('{');
    const std::size_t close = raw.rfind('}');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
        throw fail("no JSON object in the reply");
    }
    Json j;
    try {
        j = Json::parse(raw.substr(open, close - open + 1));
    } catch (const Json::parse_error& e) {
        throw fail(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw fail("the reply is not a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (std::find(kJudgeKeys.begin(), kJudgeKeys.end(), key) == kJudgeKeys.end()) {
            throw fail("unexpected key '" + key + "'");
        }
    }
    auto criterion = [&](std::string_view key) {
        const std::string k(key);
        if (!j.contains(k)) throw fail("missing key '" + k + "'");
        const Json& v = j[k];
        if (!v.is_object() || !v.contains("reason") || !v.contains("score")) {
            throw fail("'" + k + "' needs a reason and a score");
        }
        if (!v["reason"].is_string()) throw fail("'" + k + "' reason is not a string");
        if (!v["score"].is_number()) throw fail("'" + k + "' score is not a number");
        const double score = v["score"].get<double>();
        if (!(score >= 0.0 && score <= 100.0)) {
            throw Error(ErrorKind::ScoreOutOfRange, "'" + k + "' score " + v["score"].dump() + " is outside [0, 100]",
                        std::string(raw));
        }
        return JudgeCriterion{v["reason"].get<std::string>(), score};
    };
    JudgeScores s;
    s.naturalness = criterion(kJudgeKeys[0]);
    s.coherence = criterion(kJudgeKeys[1]);
    s.smoothness = criterion(kJudgeKeys[2]);
    s.agent_aggressiveness = criterion(kJudgeKeys[3]);
    s.agent_consistency = criterion(kJudgeKeys[4]);
    return s;
}

JudgeScores judge_dialogue(const Dialogue& dialogue, backend::ChatBackend& backend, const JudgeConfig& config,
                           std::vector<Json>* archive) {
    const std::string prompt = promptkit::render_judge_prompt(dialogue);
    const int attempts = std::max(1, config.attempts);
    std::vector<ChatMessage> messages{{Role::User, prompt}};
    for (int attempt = 1;; ++attempt) {
        const std::string raw = backend.complete(backend::make_request(messages, config.sampling)).text;
        try {
            JudgeScores scores = parse_judge_reply(raw);
            if (archive) archive->push_back(Json{{"dialogue_id", dialogue.id}, {"attempt", attempt}, {"raw", raw},
                                                 {"error", nullptr}});
            return scores;
        } catch (const Error& e) {
            if (archive) archive->push_back(Json{{"dialogue_id", dialogue.id}, {"attempt", attempt}, {"raw", raw},
                                                 {"error", std::string(e.what())}});
            if (attempt >= attempts) {
                throw Error(e.kind(), "judge failed after " + std::to_string(attempt) + " attempt(s): " + e.detail(),
                            raw);
            }
            messages.resize(1);
            messages.push_back({Role::Assistant, raw});
            messages.push_back({Role::User, "Your previous answer could not be used: " + e.detail() +
                                                "\nAnswer again with only the JSON object in the required format."});
        }
    }
}

JudgeMeans mean_scores(std::span<const JudgeScores> scores) {
    if (scores.empty()) throw Error(ErrorKind::EmptyInput, "no judge scores to average");
    JudgeMeans m;
    for (const auto& s : scores) {
        m.naturalness += s.naturalness.score;
        m.coherence += s.coherence.score;
        m.smoothness += s.smoothness.score;
        m.agent_aggressiveness += s.agent_aggressiveness.score;
        m.agent_consistency += s.agent_consistency.score;
    }
    const auto n = static_cast<double>(scores.size());
    m.naturalness /= n;
    m.coherence /= n;
    m.smoothness /= n;
    m.agent_aggressiveness /= n;
    m.agent_consistency /= n;
    return m;
}

void attach_quality(Dialogue& dialogue, const JudgeScores& scores) {
    dialogue.extra["quality"] =
        Json{{"naturalness", scores.naturalness.score}, {"consistency", scores.agent_consistency.score}};
}

std::vector<Dialogue> quality_filter(std::span<const Dialogue> corpus, double threshold,
                                     std::optional<std::size_t> cap) {
    struct Scored {
        const Dialogue* dialogue;
        double mean;
    };
    std::vector<Scored> kept;
    for (const auto& d : corpus) {
        const Json* q = d.extra.contains("quality") ? &d.extra["quality"] : nullptr;
        if (!q || !q->is_object() || !q->contains("naturalness") || !q->contains("consistency") ||
            !(*q)["naturalness"].is_number() || !(*q)["consistency"].is_number()) {
            throw Error(ErrorKind::MissingScores, "dialogue '" + d.id + "' has no quality scores");
        }
        const double nat = (*q)["naturalness"].get<double>();
        const double con = (*q)["consistency"].get<double>();
        if (nat > threshold && con > threshold) kept.push_back({&d, (nat + con) / 2.0});
    }
    std::sort(kept.begin(), kept.end(), [](const Scored& a, const Scored& b) {
        if (a.mean != b.mean) return a.mean > b.mean;
        return a.dialogue->id < b.dialogue->id;
    });
    if (cap && kept.size() > *cap) kept.resize(*cap);
    std::vector<Dialogue> out;
    out.reserve(kept.size());
    for (const auto& s : kept) out.push_back(*s.dialogue);
    return out;
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

Report aggregate_report(const ReportInputs& in) {
    Report report;
    auto pct = [](std::optional<double> v) -> std::optional<double> {
        if (!v) return std::nullopt;
        return round2(*v * 100.0);
    };
    auto plain = [](std::optional<double> v) -> std::optional<double> {
        if (!v) return std::nullopt;
        return round2(*v);
    };
    auto judge = [&](double JudgeMeans::*field) -> std::optional<double> {
        if (!in.judge) return std::nullopt;
        return round2((*in.judge).*field);
    };
    std::optional<double> intent, policy, both;
    if (in.turn) {
        intent = in.turn->intent_accuracy;
        policy = in.turn->policy_accuracy;
        both = in.turn->both_accuracy;
    }
    report.rows = {
        {"Intent Detection", pct(intent)},
        {"Policy Selection", pct(policy)},
        {"Both Match", pct(both)},
        {"# Turns", plain(in.avg_turns)},
        {"Proceed TOD Rate", pct(in.proceed_tod_rate)},
        {"Naturalness", judge(&JudgeMeans::naturalness)},
        {"Coherence", judge(&JudgeMeans::coherence)},
        {"Agent Consistency", judge(&JudgeMeans::agent_consistency)},
        {"Agent Aggressiveness", judge(&JudgeMeans::agent_aggressiveness)},
        {"Smoothness", judge(&JudgeMeans::smoothness)},
    };

    Json rows = Json::array();
    for (const auto& r : report.rows) rows.push_back(Json{{"metric", r.metric}, {"value", optional_number(r.value)}});

    Json inputs;
    inputs["dialogues"] = in.dialogues;
    inputs["turn"] = in.turn ? to_json(*in.turn) : Json(nullptr);
    inputs["avg_turns"] = optional_number(in.avg_turns);
    inputs["proceed_tod_rate"] = optional_number(in.proceed_tod_rate);
    inputs["judge"] = in.judge ? judge_means_to_json(*in.judge) : Json(nullptr);

    Json distribution = nullptr;
    Json rates = nullptr;
    if (in.turn) {
        distribution = Json::object();
        rates = Json::object();
        const auto mr = match_rates(*in.turn);
        for (PolicyKind gold : kAllPolicyKinds) {
            const auto& counts = in.turn->confusion[idx(gold)];
            std::size_t sum = 0;
            for (std::size_t c : counts) sum += c;
            Json row = Json::object();
            auto share = [&](std::size_t c) {
                return sum ? Json(static_cast<double>(c) / static_cast<double>(sum)) : Json(nullptr);
            };
            for (PolicyKind pred : kAllPolicyKinds) row[std::string(to_string(pred))] = share(counts[idx(pred)]);
            row["Unparsed"] = share(counts[kUnparsedColumn]);
            distribution[std::string(to_string(gold))] = std::move(row);
            rates[std::string(to_string(gold))] =
                Json{{"recall", optional_number(mr[idx(gold)].recall)},
                     {"precision", optional_number(mr[idx(gold)].precision)}};
        }
    }

    report.json["rows"] = std::move(rows);
    report.json["policy_distribution"] = std::move(distribution);
    report.json["match_rate"] = std::move(rates);
    report.json["inputs"] = std::move(inputs);

    std::size_t width = 0;
    for (const auto& r : report.rows) width = std::max(width, r.metric.size());
    std::ostringstream out;
    out << std::fixed << std::setprecision(2);
    out << std::left << std::setw(static_cast<int>(width)) << "Metric" << "  " << std::right << std::setw(8)
        << "Value" << "\n";
    for (const auto& r : report.rows) {
        out << std::left << std::setw(static_cast<int>(width)) << r.metric << "  " << std::right << std::setw(8);
        if (r.value) {
            out << *r.value;
        } else {
            out << "-";
        }
        out << "\n";
    }
    if (in.turn) {
        out << "\nPrediction distribution per gold policy\n";
        for (PolicyKind gold : kAllPolicyKinds) {
            const Json& row = report.json["policy_distribution"][std::string(to_string(gold))];
            out << "  " << to_string(gold) << ":";
            for (const auto& [name, share] : row.items()) {
                out << " " << name << "=";
                if (share.is_null()) {
                    out << "-";
                } else {
                    out << share.get<double>();
                }
            }
            out << "\n";
        }
    }
    report.text = out.str();
    return report;
}

ReportInputs inputs_from_report(const Json& report) {
    try {
        const Json& j = report.at("inputs");
        ReportInputs in;
        in.dialogues = j.at("dialogues").get<std::size_t>();
        if (!j.at("turn").is_null()) in.turn = turn_level_report_from_json(j["turn"]);
        in.avg_turns = number_or_null(j, "avg_turns");
        in.proceed_tod_rate = number_or_null(j, "proceed_tod_rate");
        if (!j.at("judge").is_null()) in.judge = judge_means_from_json(j["judge"]);
        return in;
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::ParseError, std::string("report: ") + e.what());
    }
}

}  // namespace salesforge::evalkit
