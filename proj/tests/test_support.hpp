//
// test_support.hpp
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

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "salesforge/backend.hpp"
#include "salesforge/core.hpp"

namespace salesforge::testing {

inline std::filesystem::path test_dir() { return SALESFORGE_TEST_DIR; }
inline std::filesystem::path fixture(const std::string& rel) { return test_dir() / "fixtures" / rel; }
inline std::filesystem::path golden(const std::string& rel) { return test_dir() / "golden" / rel; }

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << content;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<unsigned> counter{0};
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("salesforge-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

/// Alternating dialogue whose turns read "turn 0", "turn 1", ...
inline Dialogue numbered_dialogue(std::string id, std::size_t n, Speaker first = Speaker::User) {
    Dialogue d;
    d.id = std::move(id);
    Speaker s = first;
    for (std::size_t i = 0; i < n; ++i) {
        d.turns.push_back(Turn{i, s, "turn " + std::to_string(i)});
        s = other(s);
    }
    return d;
}

inline std::unique_ptr<backend::MockBackend> queue_mock(std::vector<std::string> replies) {
    std::vector<backend::MockEntry> entries;
    for (auto& r : replies) entries.push_back({backend::MockEntry::Match::Queue, {}, std::move(r)});
    return std::make_unique<backend::MockBackend>(std::move(entries));
}

}  // namespace salesforge::testing
