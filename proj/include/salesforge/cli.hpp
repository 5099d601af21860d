//
// cli.hpp
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

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "salesforge/backend.hpp"
#include "salesforge/core.hpp"
#include "salesforge/simarena.hpp"

namespace salesforge::cli {

enum class BackendRole { Generation, Agent, User, Judge };

struct BackendSection {
    std::string base_url = "https://api.openai.com/v1";
    std::string model_name = "gpt-3.5-turbo";
    double temperature = 0.7;
    int max_tokens = 1024;
    std::size_t concurrency = 4;
    backend::RetryPolicy retry{};
};

struct PathsSection {
    std::string corpus;
    std::string personas;
    std::string audit;
    std::string reports;
};

/// The JSON run configuration. Role sections ("agent_backend",
/// "user_backend", "judge_backend") overlay "backend"; the judge samples at
/// temperature 0 unless its section says otherwise.
struct RunConfig {
    BackendSection backend;
    BackendSection agent_backend;
    BackendSection user_backend;
    BackendSection judge_backend;
    PathsSection paths;
    simarena::ArenaConfig arena;
    /// Attempts per pipeline stage and judge call.
    int retry_budget = 3;
};

/// Throws Error(Config) on a malformed document.
RunConfig run_config_from_json(const Json& j);
RunConfig load_run_config(const std::filesystem::path& path);

const BackendSection& section_for(const RunConfig& config, BackendRole role);

/// Parses args (without the program name) and runs one subcommand. Returns
/// 0 on success, 1 when items were quarantined, 2 on usage, config or I/O
/// errors.
int run_command(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace salesforge::cli
