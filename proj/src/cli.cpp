//
// cli.cpp
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

#include "salesforge/cli.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "salesforge/agent.hpp"
#include "salesforge/evalkit.hpp"
#include "salesforge/genpipe.hpp"
#include "salesforge/serialize.hpp"
#include "salesforge/text.hpp"

namespace salesforge::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kDim = "\x1b[2m";
constexpr std::string_view kReset = "\x1b[0m";

template <class T>
void read_into(const Json& j, const char* key, T& field) {
    if (!j.contains(key) || j[key].is_null()) return;
    try {
        field = j[key].get<T>();
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::Config, std::string("config field '") + key + "': " + e.what());
    }
}

void overlay(const Json& j, BackendSection& s) {
    if (!j.is_object()) throw Error(ErrorKind::Config, "backend sections must be objects");
    read_into(j, "base_url", s.base_url);
    read_into(j, "model_name", s.model_name);
    read_into(j, "temperature", s.temperature);
    read_into(j, "max_tokens", s.max_tokens);
    read_into(j, "concurrency", s.concurrency);
    if (j.contains("retry")) {
        const Json& r = j["retry"];
        read_into(r, "max_attempts", s.retry.max_attempts);
        long long backoff = s.retry.initial_backoff.count();
        read_into(r, "initial_backoff_ms", backoff);
        s.retry.initial_backoff = std::chrono::milliseconds(backoff);
        read_into(r, "multiplier", s.retry.multiplier);
        read_into(r, "jitter", s.retry.jitter);
    }
    if (s.concurrency < 1) throw Error(ErrorKind::Config, "backend concurrency must be at least 1");
    if (s.max_tokens < 1) throw Error(ErrorKind::Config, "max_tokens must be at least 1");
}

std::string describe(const std::exception& e) {
    if (const auto* err = dynamic_cast<const Error*>(&e)) return std::string(to_string(err->kind())) + ": " + err->detail();
    return e.what();
}

void write_text(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
    f << content;
}

Json read_json_file(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::Io, "cannot read '" + path.string() + "'");
    try {
        return Json::parse(f);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
    }
}

/// "out/corpus.jsonl" + ".rejects" -> "out/corpus.rejects.jsonl"
fs::path sibling(const fs::path& base, const std::string& tag, const std::string& ext) {
    fs::path p = base;
    p.replace_filename(base.stem().string() + tag + ext);
    return p;
}

std::string pick(const std::string& flag, const std::string& fallback, const char* what) {
    if (!flag.empty()) return flag;
    if (!fallback.empty()) return fallback;
    throw Error(ErrorKind::Usage, std::string("missing ") + what);
}

std::string fixed2(double v) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(2);
    s << v;
    return s.str();
}

/// Backends per role. With a mock script every role shares one scripted
/// backend and runs one request at a time, so queue replies are consumed in
/// a fixed order.
class Backends {
public:
    Backends(const RunConfig& config, std::string mock_path, const std::string& audit_path)
        : config_(config), mock_path_(std::move(mock_path)) {
        audit_ = audit_path.empty() ? std::make_shared<backend::AuditLog>()
                                    : std::make_shared<backend::AuditLog>(audit_path);
    }

    bool mocked() const { return !mock_path_.empty(); }

    backend::ChatBackend& get(BackendRole role) {
        if (mocked()) {
            if (!shared_) {
                std::shared_ptr<backend::ChatBackend> mock = backend::load_mock_script(mock_path_);
                backend::RetryingOptions options;
                options.max_in_flight = 1;
                options.retry = config_.backend.retry;
                shared_ = std::make_shared<backend::RetryingBackend>(std::move(mock), audit_, options);
            }
            return *shared_;
        }
        auto& slot = by_role_[role];
        if (!slot) {
            const BackendSection& s = section_for(config_, role);
            backend::HttpConfig http;
            http.base_url = s.base_url;
            http.api_key = backend::api_key_from_env();
            backend::RetryingOptions options;
            options.retry = s.retry;
            options.max_in_flight = s.concurrency;
            slot = std::make_shared<backend::RetryingBackend>(std::make_shared<backend::HttpBackend>(http), audit_,
                                                              options);
        }
        return *slot;
    }

    std::size_t concurrency(BackendRole role) const {
        return mocked() ? 1 : section_for(config_, role).concurrency;
    }

    SamplingParams sampling(BackendRole role, std::optional<std::uint64_t> seed) const {
        const BackendSection& s = section_for(config_, role);
        SamplingParams p;
        p.model_name = s.model_name;
        p.temperature = s.temperature;
        p.max_tokens = s.max_tokens;
        if (seed) p.seed = static_cast<std::int64_t>(*seed >> 1);
        return p;
    }

private:
    const RunConfig& config_;
    std::string mock_path_;
    std::shared_ptr<backend::AuditLog> audit_;
    std::shared_ptr<backend::ChatBackend> shared_;
    std::map<BackendRole, std::shared_ptr<backend::ChatBackend>> by_role_;
};

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string mock_path;
    std::string audit_path;
};

struct GenerateArgs {
    std::string seeds, mapping, out, rejects, records;
};

struct SimulateArgs {
    std::string personas, out, manifest, mode = "cot";
    std::optional<std::size_t> count, repeats, max_turns;
    bool strip = false;
};

struct PersonasArgs {
    std::string out;
    std::optional<std::size_t> n;
    bool force = false;
};

struct EvalTurnArgs {
    std::string corpus, mapping, gold, predictions, out_dir, gold_out, mode = "cot";
};

struct EvalDialogueArgs {
    std::string in, out_dir, turn_report, judge_log;
};

struct StatsArgs {
    std::string in, mapping, json;
};

struct ChatArgs {
    std::string mode = "cot";
    bool hide_thoughts = false;
};

std::optional<FieldMapping> mapping_from(const std::string& path) {
    if (path.empty()) return std::nullopt;
    return load_field_mapping(path);
}

agent::AgentConfig agent_config(Backends& b, const std::string& mode, std::optional<std::uint64_t> seed) {
    agent::AgentConfig cfg;
    cfg.mode = agent::parse_mode(mode);
    cfg.sampling = b.sampling(BackendRole::Agent, seed);
    return cfg;
}

int cmd_generate(const GenerateArgs& a, const RunConfig& config, const Globals& g, Backends& b, std::ostream& out) {
    const fs::path out_path = pick(a.out, config.paths.corpus, "--out");
    const auto seeds = read_dialogues(a.seeds, mapping_from(a.mapping));

    genpipe::PipelineConfig pc;
    pc.sampling = b.sampling(BackendRole::Generation, g.seed);
    pc.attempts = config.retry_budget;
    pc.concurrency = b.concurrency(BackendRole::Generation);
    auto result = genpipe::run_pipeline(seeds, b.get(BackendRole::Generation), pc);

    write_dialogues(out_path, result.corpus);
    std::vector<Json> rejects;
    for (const auto& q : result.rejects) rejects.push_back(genpipe::to_json(q));
    write_jsonl(a.rejects.empty() ? sibling(out_path, ".rejects", ".jsonl") : fs::path(a.rejects), rejects);
    if (!a.records.empty()) {
        std::vector<Json> records;
        for (const auto& r : result.records) records.push_back(genpipe::to_json(r));
        write_jsonl(a.records, records);
    }
    out << "generated " << result.corpus.size() << " dialogue(s) from " << seeds.size() << " seed(s); "
        << result.rejects.size() << " quarantined\n";
    return result.rejects.empty() ? 0 : 1;
}

simarena::PersonaBankOptions bank_options(const RunConfig& config, const Globals& g, Backends& b) {
    simarena::PersonaBankOptions o;
    o.sampling = b.sampling(BackendRole::Generation, std::nullopt);
    o.seed = g.seed.value_or(config.arena.seed);
    return o;
}

int cmd_personas(const PersonasArgs& a, const RunConfig& config, const Globals& g, Backends& b, std::ostream& out) {
    const fs::path path = pick(a.out, config.paths.personas, "--out");
    const std::size_t n = a.n.value_or(config.arena.personas);
    std::vector<simarena::PersonaRecord> bank;
    if (a.force && fs::exists(path)) fs::remove(path);
    bank = simarena::load_or_build_persona_bank(path, n, b.get(BackendRole::Generation), bank_options(config, g, b));
    out << bank.size() << " persona(s) in " << path.string() << "\n";
    return 0;
}

int cmd_simulate(const SimulateArgs& a, const RunConfig& config, const Globals& g, Backends& b, std::ostream& out) {
    const fs::path bank_path = pick(a.personas, config.paths.personas, "--personas");
    const fs::path out_path = pick(a.out, "", "--out");
    simarena::ArenaConfig arena = config.arena;
    if (a.count) arena.personas = *a.count;
    if (a.repeats) arena.repeats = *a.repeats;
    if (a.max_turns) arena.max_turns = *a.max_turns;
    if (g.seed) arena.seed = *g.seed;
    arena.strip_stage_directions = arena.strip_stage_directions || a.strip;
    arena.concurrency = std::min(b.concurrency(BackendRole::Agent), b.concurrency(BackendRole::User));

    auto bank = simarena::load_or_build_persona_bank(bank_path, arena.personas, b.get(BackendRole::Generation),
                                                     bank_options(config, g, b));
    agent::AgentConfig acfg = agent_config(b, a.mode, std::nullopt);
    auto result = simarena::run_arena(arena, bank, acfg, b.get(BackendRole::Agent), b.get(BackendRole::User),
                                      b.sampling(BackendRole::User, std::nullopt));

    agent::write_transcripts(out_path, result.transcripts);
    write_text(a.manifest.empty() ? sibling(out_path, ".manifest", ".json") : fs::path(a.manifest),
               result.manifest.dump(2) + "\n");
    const Json& counts = result.manifest["counts"];
    out << "simulated " << counts["dialogues"].get<std::size_t>() << " of " << counts["expected"].get<std::size_t>()
        << " dialogue(s); " << counts["handover"].get<std::size_t>() << " handed over, "
        << counts["truncated"].get<std::size_t>() << " truncated, " << counts["quarantined"].get<std::size_t>()
        << " quarantined\n";
    return result.rejects.empty() ? 0 : 1;
}

void write_report(const evalkit::Report& report, const fs::path& dir, std::ostream& out) {
    write_text(dir / "report.json", report.json.dump(2) + "\n");
    write_text(dir / "report.txt", report.text);
    out << report.text;
}

fs::path report_dir(const std::string& flag, const RunConfig& config) {
    if (!flag.empty()) return flag;
    if (!config.paths.reports.empty()) return config.paths.reports;
    return "reports";
}

int cmd_eval_turn(const EvalTurnArgs& a, const RunConfig& config, const Globals& g, Backends& b, std::ostream& out,
                  std::ostream& err) {
    std::vector<Dialogue> corpus;
    std::vector<evalkit::GoldTurn> gold;
    std::size_t quarantined = 0;
    const bool need_corpus = a.gold.empty() || a.predictions.empty();
    if (need_corpus) corpus = read_dialogues(pick(a.corpus, config.paths.corpus, "--corpus"), mapping_from(a.mapping));
    if (!a.gold.empty()) {
        gold = evalkit::read_gold(a.gold);
    } else {
        for (const auto& d : corpus) {
            try {
                auto labels = evalkit::derive_gold_labels(d);
                gold.insert(gold.end(), labels.begin(), labels.end());
            } catch (const Error& e) {
                ++quarantined;
                err << "skipped dialogue '" << d.id << "': " << describe(e) << "\n";
            }
        }
    }
    if (!a.gold_out.empty()) evalkit::write_gold(a.gold_out, gold);

    std::vector<evalkit::Prediction> predictions;
    if (!a.predictions.empty()) {
        predictions = evalkit::predictions_from_transcripts(agent::read_transcripts(a.predictions));
    } else {
        predictions = evalkit::predict_turns(corpus, gold, b.get(BackendRole::Agent), agent_config(b, a.mode, g.seed),
                                             b.concurrency(BackendRole::Agent));
    }

    evalkit::ReportInputs inputs;
    inputs.turn = evalkit::turn_level_eval(predictions, gold);
    inputs.dialogues = need_corpus ? corpus.size() : 0;
    write_report(evalkit::aggregate_report(inputs), report_dir(a.out_dir, config), out);
    return quarantined ? 1 : 0;
}

int cmd_eval_dialogue(const EvalDialogueArgs& a, const RunConfig& config, const Globals& g, Backends& b,
                      std::ostream& out, std::ostream& err) {
    const auto transcripts = agent::read_transcripts(pick(a.in, "", "--in"));
    const fs::path dir = report_dir(a.out_dir, config);

    evalkit::JudgeConfig jc;
    jc.sampling = b.sampling(BackendRole::Judge, g.seed);
    jc.attempts = config.retry_budget;

    std::vector<JudgeScores> scores;
    std::vector<Json> archive;
    std::size_t quarantined = 0;
    for (const auto& t : transcripts) {
        if (t.dialogue.turns.empty()) {
            ++quarantined;
            err << "skipped dialogue '" << t.dialogue.id << "': no turns\n";
            continue;
        }
        try {
            scores.push_back(evalkit::judge_dialogue(t.dialogue, b.get(BackendRole::Judge), jc, &archive));
        } catch (const Error& e) {
            ++quarantined;
            err << "judge failed on '" << t.dialogue.id << "': " << describe(e) << "\n";
        }
    }
    write_jsonl(a.judge_log.empty() ? dir / "judge.jsonl" : fs::path(a.judge_log), archive);

    evalkit::ReportInputs inputs;
    if (!a.turn_report.empty()) inputs.turn = evalkit::inputs_from_report(read_json_file(a.turn_report)).turn;
    inputs.dialogues = transcripts.size();
    if (!transcripts.empty()) {
        inputs.avg_turns = evalkit::average_turns(transcripts);
        inputs.proceed_tod_rate = evalkit::proceed_tod_rate(transcripts);
    }
    if (!scores.empty()) inputs.judge = evalkit::mean_scores(scores);
    write_report(evalkit::aggregate_report(inputs), dir, out);
    return quarantined ? 1 : 0;
}

int cmd_stats(const StatsArgs& a, const RunConfig& config, std::ostream& out, std::ostream& err) {
    const auto corpus = read_dialogues(pick(a.in, config.paths.corpus, "--in"), mapping_from(a.mapping));
    const auto result = evalkit::corpus_stats(corpus);
    for (const auto& r : result.rejects) err << "skipped dialogue '" << r.dialogue_id << "': " << r.message << "\n";
    const CorpusStats& s = result.stats;
    out << "Dialogues             " << s.dialogue_count << "\n"
        << "Avg chit-chat turns   " << fixed2(s.avg_chitchat_turns) << "\n"
        << "Avg transition turns  " << fixed2(s.avg_transition_turns) << "\n"
        << "Avg total turns       " << fixed2(s.avg_total_turns) << "\n"
        << "Quarantined           " << result.rejects.size() << "\n";
    if (!s.intent_histogram.empty()) {
        out << "Intents\n";
        for (const auto& [intent, count] : s.intent_histogram) {
            out << "  " << canonical_name(intent) << " " << count << "\n";
        }
    }
    if (!a.json.empty()) write_text(a.json, to_json(s).dump(2) + "\n");
    return result.rejects.empty() ? 0 : 1;
}

int cmd_chat(const ChatArgs& a, const Globals& g, Backends& b, std::istream& in, std::ostream& out,
             std::ostream& err) {
    agent::AgentConfig cfg = agent_config(b, a.mode, g.seed);
    agent::AgentState state;
    std::string line;
    while (true) {
        out << "> " << std::flush;
        if (!std::getline(in, line)) break;
        if (text::trim(line).empty()) continue;
        try {
            agent::StepResult r = agent::agent_step(state, line, b.get(BackendRole::Agent), cfg);
            state = std::move(r.state);
            if (!a.hide_thoughts) out << kDim << "Thought: " << r.step.thought_text << kReset << "\n";
            out << "Agent: " << r.step.response_text << "\n";
            for (const auto& w : r.step.warnings) err << "warning: " << w << "\n";
        } catch (const Error& e) {
            err << "error: " << describe(e) << "\n";
            continue;
        }
        if (state.handover) {
            out << "[handover] proceeding to the task-oriented agent";
            if (state.current_topic) out << " for " << canonical_name(*state.current_topic);
            out << "\n";
            return 0;
        }
    }
    out << "\n";
    return 0;
}

}  // namespace

RunConfig run_config_from_json(const Json& j) {
    if (!j.is_object()) throw Error(ErrorKind::Config, "the config must be a JSON object");
    RunConfig c;
    if (j.contains("backend")) overlay(j["backend"], c.backend);
    c.agent_backend = c.backend;
    c.user_backend = c.backend;
    c.judge_backend = c.backend;
    c.judge_backend.temperature = 0.0;
    if (j.contains("agent_backend")) overlay(j["agent_backend"], c.agent_backend);
    if (j.contains("user_backend")) overlay(j["user_backend"], c.user_backend);
    if (j.contains("judge_backend")) overlay(j["judge_backend"], c.judge_backend);
    if (j.contains("paths")) {
        const Json& p = j["paths"];
        read_into(p, "corpus", c.paths.corpus);
        read_into(p, "personas", c.paths.personas);
        read_into(p, "audit", c.paths.audit);
        read_into(p, "reports", c.paths.reports);
    }
    if (j.contains("arena")) {
        const Json& a = j["arena"];
        read_into(a, "personas", c.arena.personas);
        read_into(a, "repeats", c.arena.repeats);
        read_into(a, "max_turns", c.arena.max_turns);
        read_into(a, "seed", c.arena.seed);
        read_into(a, "strip_stage_directions", c.arena.strip_stage_directions);
        if (c.arena.personas < 1 || c.arena.repeats < 1) {
            throw Error(ErrorKind::Config, "arena personas and repeats must be positive");
        }
        if (c.arena.max_turns < 2) throw Error(ErrorKind::Config, "arena max_turns must be at least 2");
    }
    read_into(j, "retry_budget", c.retry_budget);
    if (c.retry_budget < 1) throw Error(ErrorKind::Config, "retry_budget must be at least 1");
    return c;
}

RunConfig load_run_config(const fs::path& path) {
    try {
        return run_config_from_json(read_json_file(path));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Config) throw;
        throw Error(ErrorKind::Config, e.detail());
    }
}

const BackendSection& section_for(const RunConfig& config, BackendRole role) {
    switch (role) {
        case BackendRole::Generation: return config.backend;
        case BackendRole::Agent: return config.agent_backend;
        case BackendRole::User: return config.user_backend;
        case BackendRole::Judge: return config.judge_backend;
    }
    return config.backend;
}

int run_command(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sales dialogue generation, simulation and evaluation.", "salesforge"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    Globals g;
    app.add_option("--config", g.config_path, "JSON run configuration");
    app.add_option("--seed", g.seed, "Seed for every random choice");
    app.add_option("--mock", g.mock_path, "Serve all model calls from a JSONL mock script");
    app.add_option("--audit-log", g.audit_path, "Write one JSONL line per model call");

    GenerateArgs gen;
    auto* c_gen = app.add_subcommand("generate", "Synthesize sales dialogues from chit-chat seeds");
    c_gen->add_option("--seeds", gen.seeds, "Seed dialogues (JSONL)")->required();
    c_gen->add_option("--mapping", gen.mapping, "Field mapping for foreign records (JSON)");
    c_gen->add_option("--out", gen.out, "Output corpus (JSONL)");
    c_gen->add_option("--rejects", gen.rejects, "Quarantine file (default: <out>.rejects.jsonl)");
    c_gen->add_option("--records", gen.records, "Per-stage prompt/output records (JSONL)");

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "Run the agent against persona simulators");
    c_sim->add_option("--personas", sim.personas, "Persona bank (JSONL); built when missing");
    c_sim->add_option("--out", sim.out, "Transcripts (JSONL)")->required();
    c_sim->add_option("--manifest", sim.manifest, "Run manifest (default: <out>.manifest.json)");
    c_sim->add_option("--mode", sim.mode, "Agent mode: cot or baseline");
    c_sim->add_option("--count", sim.count, "Number of personas to use");
    c_sim->add_option("--repeats", sim.repeats, "Dialogues per persona");
    c_sim->add_option("--max-turns", sim.max_turns, "Turn cap counting both speakers");
    c_sim->add_flag("--strip-directions", sim.strip, "Remove *stage directions* from simulator replies");

    PersonasArgs per;
    auto* c_per = app.add_subcommand("personas", "Build the persona bank");
    c_per->add_option("--out", per.out, "Persona bank (JSONL)");
    c_per->add_option("-n,--count", per.n, "Number of personas");
    c_per->add_flag("--force", per.force, "Rebuild even if the file exists");

    EvalTurnArgs et;
    auto* c_et = app.add_subcommand("eval-turn", "Turn-level intent and policy accuracy");
    c_et->add_option("--corpus", et.corpus, "Annotated dialogues (JSONL)");
    c_et->add_option("--mapping", et.mapping, "Field mapping for foreign records (JSON)");
    c_et->add_option("--gold", et.gold, "Gold turns (JSONL); derived from the corpus when absent");
    c_et->add_option("--gold-out", et.gold_out, "Write the gold turns used (JSONL)");
    c_et->add_option("--predictions", et.predictions, "Agent transcripts (JSONL); the agent is run when absent");
    c_et->add_option("--mode", et.mode, "Agent mode: cot or baseline");
    c_et->add_option("--out-dir", et.out_dir, "Report directory");

    EvalDialogueArgs ed;
    auto* c_ed = app.add_subcommand("eval-dialogue", "Dialogue-level metrics and judge scores");
    c_ed->add_option("--in", ed.in, "Transcripts (JSONL)")->required();
    c_ed->add_option("--out-dir", ed.out_dir, "Report directory");
    c_ed->add_option("--turn-report", ed.turn_report, "Include turn-level rows from an eval-turn report.json");
    c_ed->add_option("--judge-log", ed.judge_log, "Raw judge replies (default: <out-dir>/judge.jsonl)");

    StatsArgs st;
    auto* c_st = app.add_subcommand("stats", "Turn statistics of a corpus");
    c_st->add_option("--in", st.in, "Dialogues (JSONL)");
    c_st->add_option("--mapping", st.mapping, "Field mapping for foreign records (JSON)");
    c_st->add_option("--json", st.json, "Also write the statistics as JSON");

    ChatArgs ch;
    auto* c_ch = app.add_subcommand("chat", "Talk to the agent as the customer");
    c_ch->add_option("--mode", ch.mode, "Agent mode: cot or baseline");
    c_ch->add_flag("--hide-thoughts", ch.hide_thoughts, "Do not print the agent's thoughts");

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        RunConfig config = g.config_path.empty() ? RunConfig{} : load_run_config(g.config_path);
        const std::string audit = g.audit_path.empty() ? config.paths.audit : g.audit_path;
        Backends backends(config, g.mock_path, audit);
        if (*c_gen) return cmd_generate(gen, config, g, backends, out);
        if (*c_sim) return cmd_simulate(sim, config, g, backends, out);
        if (*c_per) return cmd_personas(per, config, g, backends, out);
        if (*c_et) return cmd_eval_turn(et, config, g, backends, out, err);
        if (*c_ed) return cmd_eval_dialogue(ed, config, g, backends, out, err);
        if (*c_st) return cmd_stats(st, config, out, err);
        if (*c_ch) return cmd_chat(ch, g, backends, in, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        if (e.kind() == ErrorKind::Usage) err << app.help();
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

}  // namespace salesforge::cli
