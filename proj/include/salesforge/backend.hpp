//
// backend.hpp
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

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "salesforge/core.hpp"

namespace salesforge::backend {

enum class Role { System, User, Assistant };

std::string_view to_string(Role role);
Role parse_role(std::string_view text);

struct ChatMessage {
    Role role = Role::User;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

struct CompletionRequest {
    std::vector<ChatMessage> messages;
    std::string model_name;
    double temperature = 0.7;
    int max_tokens = 1024;
    std::optional<std::int64_t> seed;

    bool operator==(const CompletionRequest&) const = default;
};

/// Builds a request from a prompt sequence and the caller's sampling params.
CompletionRequest make_request(std::vector<ChatMessage> messages, const SamplingParams& sampling);

/// The chat/completions request body. seed is included only when set.
Json to_json(const CompletionRequest& request);

/// Stable 16-hex-digit FNV-1a hash of to_json(request).dump().
std::string fingerprint(const CompletionRequest& request);

struct CompletionResponse {
    std::string text;
    std::string finish_reason;
    std::string request_fingerprint;
    /// Wall time spent by the backend; 0 for simulated backends.
    double latency_ms = 0.0;
};

/// A chat model. complete() returns the first choice text or throws
/// Error(Transport | RateLimited | MalformedReply | MockExhausted). It never
/// returns empty text. Implementations are safe to call concurrently.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual CompletionResponse complete(const CompletionRequest& request) = 0;
};

// ---------------------------------------------------------------------------
// Mock
// ---------------------------------------------------------------------------

struct MockEntry {
    enum class Match { Queue, Fingerprint };
    Match match = Match::Queue;
    std::string key;
    std::string reply;
};

/// Scripted backend. Fingerprint entries answer every request whose
/// fingerprint equals their key, however often it is sent; the rest are
/// served FIFO, one per call.
class MockBackend : public ChatBackend {
public:
    explicit MockBackend(std::vector<MockEntry> entries);

    CompletionResponse complete(const CompletionRequest& request) override;

    void push(std::string reply);
    void set_fingerprint_reply(std::string fingerprint, std::string reply);

    std::size_t remaining() const;
    std::vector<CompletionRequest> calls() const;

private:
    mutable std::mutex mutex_;
    std::deque<std::string> queue_;
    std::map<std::string, std::string> by_fingerprint_;
    std::vector<CompletionRequest> calls_;
};

/// Parses a JSONL script of {"match": "queue"|"fingerprint", "key": str|null,
/// "reply": str}. Throws Error(ParseError) naming the 1-based line.
std::vector<MockEntry> parse_mock_script(std::string_view content, std::string_view origin = "<script>");
std::unique_ptr<MockBackend> load_mock_script(const std::filesystem::path& path);
std::string mock_script_line(const MockEntry& entry);

// ---------------------------------------------------------------------------
// OpenAI-compatible HTTP endpoint
// ---------------------------------------------------------------------------

struct HttpConfig {
    /// e.g. "https://api.openai.com/v1"; requests go to {base_url}/chat/completions.
    std::string base_url;
    std::string api_key;
    std::chrono::seconds connect_timeout{10};
    std::chrono::seconds read_timeout{120};
};

inline constexpr const char* kApiKeyEnv = "SALESFORGE_API_KEY";

/// Reads the bearer credential from SALESFORGE_API_KEY (empty when unset).
std::string api_key_from_env();

/// One HTTP attempt per call: 429 raises RateLimited, connection failures and
/// 5xx raise Transport, a reply without choice text raises MalformedReply.
class HttpBackend : public ChatBackend {
public:
    explicit HttpBackend(HttpConfig config);

    CompletionResponse complete(const CompletionRequest& request) override;

private:
    HttpConfig config_;
    std::string scheme_host_port_;
    std::string path_prefix_;
};

// ---------------------------------------------------------------------------
// Retry, audit and concurrency cap
// ---------------------------------------------------------------------------

struct RetryPolicy {
    int max_attempts = 5;
    std::chrono::milliseconds initial_backoff{1000};
    double multiplier = 2.0;
    /// Uniform jitter as a fraction of each delay, e.g. 0.2 for +/-20%.
    double jitter = 0.2;
};

/// Append-only JSONL audit trail; internally synchronized.
class AuditLog {
public:
    AuditLog() = default;
    explicit AuditLog(const std::filesystem::path& path);

    void append(const Json& entry);
    std::vector<Json> entries() const;

private:
    mutable std::mutex mutex_;
    std::vector<Json> entries_;
    std::optional<std::ofstream> file_;
};

struct RetryingOptions {
    RetryPolicy retry;
    std::size_t max_in_flight = 4;
    /// Replaces std::this_thread::sleep_for; tests pass a no-op.
    std::function<void(std::chrono::milliseconds)> sleep;
    std::uint64_t jitter_seed = 0x5EED;
};

/// Wraps a backend with bounded concurrency and exponential backoff on
/// Transport and RateLimited. Every attempt is written to the audit log with
/// fingerprint, latency and truncation flag; the request itself is never
/// altered between attempts.
class RetryingBackend : public ChatBackend {
public:
    RetryingBackend(std::shared_ptr<ChatBackend> inner, std::shared_ptr<AuditLog> audit, RetryingOptions options = {});

    CompletionResponse complete(const CompletionRequest& request) override;

    const AuditLog& audit() const { return *audit_; }

private:
    std::chrono::milliseconds backoff_for(int attempt);

    std::shared_ptr<ChatBackend> inner_;
    std::shared_ptr<AuditLog> audit_;
    RetryingOptions options_;

    std::mutex slots_mutex_;
    std::condition_variable slots_cv_;
    std::size_t in_flight_ = 0;

    std::mutex rng_mutex_;
    std::mt19937_64 rng_;
};

}  // namespace salesforge::backend
