//
// simarena.cpp
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

#include "salesforge/simarena.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>

#include "salesforge/parallel.hpp"
#include "salesforge/promptkit.hpp"
#include "salesforge/serialize.hpp"
#include "salesforge/text.hpp"

namespace salesforge::simarena {

using backend::ChatMessage;
using backend::Role;

namespace {

constexpr std::string_view kPersonaRequest =
    "Describe a fictional person who might chat with a virtual assistant. Write a single paragraph in the second "
    "person (\"You are ...\") covering their age, job, where they live, hobbies and how they like to talk. "
    "Reply with the paragraph only.";

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::string describe_error(const std::exception& e) {
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        return std::string(to_string(err->kind())) + ": " + err->detail();
    }
    return e.what();
}

}  // namespace

std::string persona_id(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "persona-%03zu", index);
    return buf;
}

std::vector<PersonaRecord> build_persona_bank(std::size_t n, backend::ChatBackend& backend,
                                              const PersonaBankOptions& options) {
    if (n == 0) throw Error(ErrorKind::PreconditionViolation, "persona bank size must be at least 1");
    std::vector<PersonaRecord> bank;
    bank.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::string last;
        double last_similarity = 0.0;
        bool accepted = false;
        for (int attempt = 0; attempt < std::max(options.attempts, 1) && !accepted; ++attempt) {
            SamplingParams sampling = options.sampling;
            sampling.seed = static_cast<std::int64_t>(
                splitmix64(options.seed ^ (i * static_cast<std::uint64_t>(options.attempts) + attempt)) >> 1);
            auto request = backend::make_request({{Role::User, std::string(kPersonaRequest)}}, sampling);
            last = std::string(text::trim(backend.complete(request).text));
            last_similarity = 0.0;
            for (const auto& prior : bank) {
                last_similarity = std::max(last_similarity, text::normalized_similarity(prior.persona_text, last));
            }
            accepted = last_similarity < options.max_similarity;
        }
        if (!accepted) {
            throw Error(ErrorKind::DistinctnessFailure,
                        "persona " + std::to_string(i) + " stayed too similar to an earlier one (similarity " +
                            std::to_string(last_similarity) + ")",
                        last);
        }
        bank.push_back({persona_id(i), last});
    }
    return bank;
}

std::vector<PersonaRecord> read_persona_bank(const std::filesystem::path& path) {
    std::vector<PersonaRecord> bank;
    for (const Json& j : read_jsonl(path)) {
        bank.push_back({j.at("id").get<std::string>(), j.at("persona_text").get<std::string>()});
    }
    return bank;
}

void write_persona_bank(const std::filesystem::path& path, std::span<const PersonaRecord> bank) {
    std::vector<Json> records;
    for (const auto& p : bank) {
        Json j;
        j["id"] = p.id;
        j["persona_text"] = p.persona_text;
        records.push_back(std::move(j));
    }
    write_jsonl(path, records);
}

std::vector<PersonaRecord> load_or_build_persona_bank(const std::filesystem::path& path, std::size_t n,
                                                      backend::ChatBackend& backend,
                                                      const PersonaBankOptions& options) {
    if (std::filesystem::exists(path)) return read_persona_bank(path);
    auto bank = build_persona_bank(n, backend, options);
    write_persona_bank(path, bank);
    return bank;
}

PreferenceKind draw_preference_kind(std::mt19937_64& rng) {
    return kAllPreferenceKinds[rng() % kAllPreferenceKinds.size()];
}

PersonaProfile assign_preferences(std::string persona_text, PreferenceKind kind, std::mt19937_64& rng) {
    std::vector<Intent> pool(kTrainableIntents.begin(), kTrainableIntents.end());
    for (std::size_t i = pool.size() - 1; i > 0; --i) {
        std::swap(pool[i], pool[rng() % (i + 1)]);
    }
    pool.resize(not_interested_count(kind));
    std::sort(pool.begin(), pool.end());
    PersonaProfile profile{std::move(persona_text), kind, std::move(pool)};
    validate(profile);
    return profile;
}

std::string strip_stage_directions(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '*') {
            std::size_t close = s.find('*', i + 1);
            if (close != std::string_view::npos && s.find('\n', i) > close) {
                i = close;
                continue;
            }
        }
        out.push_back(s[i]);
    }
    std::string tidy;
    for (std::string_view line : text::split_lines(out)) {
        std::string collapsed = text::collapse_whitespace(line);
        if (collapsed.empty()) continue;
        if (!tidy.empty()) tidy.push_back('\n');
        tidy += collapsed;
    }
    return tidy;
}

std::string user_step(const PersonaProfile& profile, std::span<const Turn> history, backend::ChatBackend& backend,
                      const UserSimConfig& config) {
    std::vector<ChatMessage> messages;
    messages.push_back({Role::System, promptkit::render_persona_prompt(profile)});
    for (const Turn& t : history) {
        messages.push_back({t.speaker == Speaker::Agent ? Role::User : Role::Assistant, t.text});
    }
    std::string reply = backend.complete(backend::make_request(std::move(messages), config.sampling)).text;
    if (config.strip_stage_directions) reply = strip_stage_directions(reply);
    return std::string(text::trim(reply));
}

agent::Transcript run_dialogue(std::string id, const agent::AgentConfig& agent_config, const PersonaProfile& profile,
                               backend::ChatBackend& agent_backend, backend::ChatBackend& user_backend,
                               std::size_t max_turns, const UserSimConfig& user_config) {
    if (max_turns < 2) {
        throw Error(ErrorKind::PreconditionViolation, "max_turns must be at least 2, got " + std::to_string(max_turns));
    }
    agent::Transcript t;
    t.dialogue.id = std::move(id);
    t.dialogue.source = DialogueSource::Simulated;

    agent::AgentState state;
    try {
        while (state.history.size() + 2 <= max_turns) {
            std::string utterance = user_step(profile, state.history, user_backend, user_config);
            agent::StepResult result = agent::agent_step(state, utterance, agent_backend, agent_config);
            state = std::move(result.state);
            t.steps.push_back({state.history.size() - 1, std::move(result.step)});
            if (state.handover) break;
        }
    } catch (const Error& e) {
        t.truncated = true;
        t.error = describe_error(e);
    }
    t.dialogue.turns = state.history;
    t.dialogue.intent = state.current_topic;
    t.handover = state.handover;
    return t;
}

std::uint64_t dialogue_seed(std::uint64_t seed, std::size_t index) {
    return splitmix64(seed ^ splitmix64(index + 1));
}

ArenaResult run_arena(const ArenaConfig& config, std::span<const PersonaRecord> bank,
                      const agent::AgentConfig& agent_config, backend::ChatBackend& agent_backend,
                      backend::ChatBackend& user_backend, const SamplingParams& user_sampling) {
    if (config.personas == 0 || bank.empty()) throw Error(ErrorKind::EmptyBank, "the persona bank is empty");
    if (bank.size() < config.personas) {
        throw Error(ErrorKind::PreconditionViolation, "the arena needs " + std::to_string(config.personas) +
                                                          " personas but the bank holds " +
                                                          std::to_string(bank.size()));
    }
    if (config.repeats == 0) throw Error(ErrorKind::PreconditionViolation, "repeats must be at least 1");
    if (config.max_turns < 2) throw Error(ErrorKind::PreconditionViolation, "max_turns must be at least 2");

    std::mt19937_64 rng(config.seed);
    std::vector<PersonaProfile> profiles;
    profiles.reserve(config.personas);
    for (std::size_t p = 0; p < config.personas; ++p) {
        PreferenceKind kind = draw_preference_kind(rng);
        profiles.push_back(assign_preferences(bank[p].persona_text, kind, rng));
    }

    const std::size_t total = config.personas * config.repeats;
    std::vector<std::optional<agent::Transcript>> slots(total);
    std::vector<std::string> failures(total);
    std::vector<std::uint64_t> seeds(total);
    std::vector<std::string> ids(total);
    for (std::size_t i = 0; i < total; ++i) {
        seeds[i] = dialogue_seed(config.seed, i);
        ids[i] = bank[i / config.repeats].id + "-r" + std::to_string(i % config.repeats);
    }

    parallel_for(total, config.concurrency, [&](std::size_t i) {
        const std::size_t p = i / config.repeats;
        const auto request_seed = static_cast<std::int64_t>(seeds[i] >> 1);
        agent::AgentConfig acfg = agent_config;
        acfg.sampling.seed = request_seed;
        UserSimConfig ucfg{user_sampling, config.strip_stage_directions};
        ucfg.sampling.seed = request_seed;
        try {
            agent::Transcript t =
                run_dialogue(ids[i], acfg, profiles[p], agent_backend, user_backend, config.max_turns, ucfg);
            Json& extra = t.dialogue.extra;
            extra["persona_id"] = bank[p].id;
            extra["preference"] = std::string(to_string(profiles[p].preference_kind));
            Json disliked = Json::array();
            for (Intent intent : profiles[p].not_interested) disliked.push_back(std::string(canonical_name(intent)));
            extra["not_interested"] = std::move(disliked);
            extra["repeat"] = i % config.repeats;
            extra["seed"] = seeds[i];
            slots[i] = std::move(t);
        } catch (const std::exception& e) {
            failures[i] = describe_error(e);
        }
    });

    ArenaResult result;
    Json seed_list = Json::array();
    std::size_t handovers = 0;
    std::size_t truncated = 0;
    for (std::size_t i = 0; i < total; ++i) {
        Json s;
        s["dialogue_id"] = ids[i];
        s["seed"] = seeds[i];
        seed_list.push_back(std::move(s));
        if (slots[i]) {
            handovers += slots[i]->handover ? 1 : 0;
            truncated += slots[i]->truncated ? 1 : 0;
            result.transcripts.push_back(std::move(*slots[i]));
        } else {
            result.rejects.push_back({ids[i], failures[i]});
        }
    }

    Json cfg;
    cfg["personas"] = config.personas;
    cfg["repeats"] = config.repeats;
    cfg["max_turns"] = config.max_turns;
    cfg["seed"] = config.seed;
    cfg["strip_stage_directions"] = config.strip_stage_directions;
    cfg["agent_mode"] = std::string(agent::to_string(agent_config.mode));
    Json counts;
    counts["expected"] = total;
    counts["dialogues"] = result.transcripts.size();
    counts["quarantined"] = result.rejects.size();
    counts["handover"] = handovers;
    counts["truncated"] = truncated;
    Json rejects = Json::array();
    for (const auto& r : result.rejects) rejects.push_back(Json{{"dialogue_id", r.dialogue_id}, {"error", r.message}});

    result.manifest["config"] = std::move(cfg);
    result.manifest["seeds"] = std::move(seed_list);
    result.manifest["counts"] = std::move(counts);
    result.manifest["rejects"] = std::move(rejects);
    return result;
}

}  // namespace salesforge::simarena
