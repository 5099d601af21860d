//
// backend.cpp
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


#include "salesforge/backend.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "salesforge/text.hpp"

namespace salesforge::backend {

std::string_view to_string(Role role) {
    switch (role) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "";
}

Role parse_role(std::string_view text) {
    if (text == "system") return Role::System;
    if (text == "user") return Role::User;
    if (text == "assistant") return Role::Assistant;
    throw Error(ErrorKind::ParseError, "unknown role '" + std::string(text) + "'");
}

CompletionRequest make_request(std::vector<ChatMessage> messages, const SamplingParams& sampling) {
    CompletionRequest req;
    req.messages = std::move(messages);
    req.model_name = sampling.model_name;
    req.temperature = sampling.temperature;
    req.max_tokens = sampling.max_tokens;
    req.seed = sampling.seed;
    return req;
}

Json to_json(const CompletionRequest& request) {
    Json messages = Json::array();
    for (const ChatMessage& m : request.messages) {
        messages.push_back(Json{{"role", std::string(to_string(m.role))}, {"content", m.content}});
    }
    Json body;
    body["model"] = request.model_name;
    body["messages"] = std::move(messages);
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_tokens;
    if (request.seed) body["seed"] = *request.seed;
    return body;
}

std::string fingerprint(const CompletionRequest& request) {
    const std::string serialized = to_json(request).dump();
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : serialized) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

// ---------------------------------------------------------------------------

MockBackend::MockBackend(std::vector<MockEntry> entries) {
    for (auto& e : entries) {
        if (e.match == MockEntry::Match::Fingerprint) {
            by_fingerprint_[e.key] = std::move(e.reply);
        } else {
            queue_.push_back(std::move(e.reply));
        }
    }
}

CompletionResponse MockBackend::complete(const CompletionRequest& request) {
    const std::string fp = fingerprint(request);
    std::string reply;
    {
        std::lock_guard lock(mutex_);
        calls_.push_back(request);
        if (auto it = by_fingerprint_.find(fp); it != by_fingerprint_.end()) {
            reply = it->second;
        } else if (!queue_.empty()) {
            reply = std::move(queue_.front());
            queue_.pop_front();
        } else {
            throw Error(ErrorKind::MockExhausted, "no scripted reply for call " + std::to_string(calls_.size()) +
                                                      " (fingerprint " + fp + ")");
        }
    }
    if (reply.empty()) throw Error(ErrorKind::MalformedReply, "scripted reply is empty", reply);
    return CompletionResponse{std::move(reply), "stop", fp, 0.0};
}

void MockBackend::push(std::string reply) {
    std::lock_guard lock(mutex_);
    queue_.push_back(std::move(reply));
}

void MockBackend::set_fingerprint_reply(std::string fp, std::string reply) {
    std::lock_guard lock(mutex_);
    by_fingerprint_[std::move(fp)] = std::move(reply);
}

std::size_t MockBackend::remaining() const {
    std::lock_guard lock(mutex_);
    return queue_.size();
}

std::vector<CompletionRequest> MockBackend::calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

std::vector<MockEntry> parse_mock_script(std::string_view content, std::string_view origin) {
    std::vector<MockEntry> entries;
    std::size_t line_no = 0;
    for (std::string_view line : text::split_lines(content)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        auto fail = [&](const std::string& why) {
            throw Error(ErrorKind::ParseError, std::string(origin) + ":" + std::to_string(line_no) + ": " + why);
        };
        Json j = Json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) fail("invalid JSON");
        if (!j.contains("reply") || !j["reply"].is_string()) fail("missing string 'reply'");
        MockEntry e;
        const std::string match = j.value("match", std::string("queue"));
        if (match == "queue") {
            e.match = MockEntry::Match::Queue;
        } else if (match == "fingerprint") {
            e.match = MockEntry::Match::Fingerprint;
            if (!j.contains("key") || !j["key"].is_string()) fail("fingerprint entry needs a string 'key'");
            e.key = j["key"].get<std::string>();
        } else {
            fail("unknown match mode '" + match + "'");
        }
        e.reply = j["reply"].get<std::string>();
        entries.push_back(std::move(e));
    }
    return entries;
}

std::unique_ptr<MockBackend> load_mock_script(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open mock script '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return std::make_unique<MockBackend>(parse_mock_script(ss.str(), path.string()));
}

std::string mock_script_line(const MockEntry& entry) {
    Json j;
    j["match"] = entry.match == MockEntry::Match::Queue ? "queue" : "fingerprint";
    j["key"] = entry.match == MockEntry::Match::Queue ? Json(nullptr) : Json(entry.key);
    j["reply"] = entry.reply;
    return j.dump();
}

// ---------------------------------------------------------------------------

std::string api_key_from_env() {
    const char* key = std::getenv(kApiKeyEnv);
    return key ? std::string(key) : std::string();
}

HttpBackend::HttpBackend(HttpConfig config) : config_(std::move(config)) {
    std::string url(text::trim(config_.base_url));
    while (!url.empty() && url.back() == '/') url.pop_back();
    const std::size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error(ErrorKind::Config, "base_url needs a scheme: '" + url + "'");
    const std::size_t path_start = url.find('/', scheme_end + 3);
    scheme_host_port_ = url.substr(0, path_start);
    path_prefix_ = path_start == std::string::npos ? std::string() : url.substr(path_start);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (url.rfind("https://", 0) == 0) throw Error(ErrorKind::Config, "built without TLS support; cannot use " + url);
#endif
}

CompletionResponse HttpBackend::complete(const CompletionRequest& request) {
    const std::string fp = fingerprint(request);
    httplib::Client client(scheme_host_port_);
    client.set_connection_timeout(config_.connect_timeout);
    client.set_read_timeout(config_.read_timeout);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    const auto started = std::chrono::steady_clock::now();
    auto result = client.Post(path_prefix_ + "/chat/completions", headers, to_json(request).dump(), "application/json");
    const double latency =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();

    if (!result) {
        throw Error(ErrorKind::Transport, "request to " + scheme_host_port_ + " failed: " + httplib::to_string(result.error()));
    }
    if (result->status == 429) throw Error(ErrorKind::RateLimited, "HTTP 429", result->body);
    if (result->status >= 500) throw Error(ErrorKind::Transport, "HTTP " + std::to_string(result->status), result->body);
    if (result->status != 200) {
        throw Error(ErrorKind::MalformedReply, "HTTP " + std::to_string(result->status), result->body);
    }

    Json body = Json::parse(result->body, nullptr, false);
    if (body.is_discarded() || !body.contains("choices") || !body["choices"].is_array() || body["choices"].empty()) {
        throw Error(ErrorKind::MalformedReply, "reply has no choices", result->body);
    }
    const Json& choice = body["choices"][0];
    if (!choice.contains("message") || !choice["message"].contains("content") ||
        !choice["message"]["content"].is_string()) {
        throw Error(ErrorKind::MalformedReply, "first choice has no message content", result->body);
    }
    std::string content = choice["message"]["content"].get<std::string>();
    if (content.empty()) throw Error(ErrorKind::MalformedReply, "first choice text is empty", result->body);
    std::string finish = choice.contains("finish_reason") && choice["finish_reason"].is_string()
                             ? choice["finish_reason"].get<std::string>()
                             : std::string();
    return CompletionResponse{std::move(content), std::move(finish), fp, latency};
}

// ---------------------------------------------------------------------------

AuditLog::AuditLog(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    file_.emplace(path, std::ios::binary | std::ios::trunc);
    if (!*file_) throw Error(ErrorKind::Io, "cannot write audit log '" + path.string() + "'");
}

void AuditLog::append(const Json& entry) {
    std::lock_guard lock(mutex_);
    entries_.push_back(entry);
    if (file_) {
        *file_ << entry.dump(-1, ' ', false, Json::error_handler_t::replace) << '\n';
        file_->flush();
    }
}

std::vector<Json> AuditLog::entries() const {
    std::lock_guard lock(mutex_);
    return entries_;
}

RetryingBackend::RetryingBackend(std::shared_ptr<ChatBackend> inner, std::shared_ptr<AuditLog> audit,
                                 RetryingOptions options)
    : inner_(std::move(inner)),
      audit_(audit ? std::move(audit) : std::make_shared<AuditLog>()),
      options_(std::move(options)),
      rng_(options_.jitter_seed) {
    if (options_.max_in_flight == 0) options_.max_in_flight = 1;
    if (options_.retry.max_attempts < 1) options_.retry.max_attempts = 1;
    if (!options_.sleep) options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::chrono::milliseconds RetryingBackend::backoff_for(int attempt) {
    double delay = static_cast<double>(options_.retry.initial_backoff.count());
    for (int i = 1; i < attempt; ++i) delay *= options_.retry.multiplier;
    if (options_.retry.jitter > 0 && delay > 0) {
        std::lock_guard lock(rng_mutex_);
        std::uniform_real_distribution<double> jitter(-options_.retry.jitter, options_.retry.jitter);
        delay *= 1.0 + jitter(rng_);
    }
    return std::chrono::milliseconds(static_cast<long long>(delay));
}

CompletionResponse RetryingBackend::complete(const CompletionRequest& request) {
    {
        std::unique_lock lock(slots_mutex_);
        slots_cv_.wait(lock, [&] { return in_flight_ < options_.max_in_flight; });
        ++in_flight_;
    }
    struct Release {
        RetryingBackend* self;
        ~Release() {
            {
                std::lock_guard lock(self->slots_mutex_);
                --self->in_flight_;
            }
            self->slots_cv_.notify_one();
        }
    } release{this};

    const std::string fp = fingerprint(request);
    for (int attempt = 1;; ++attempt) {
        Json entry;
        entry["fingerprint"] = fp;
        entry["model"] = request.model_name;
        entry["attempt"] = attempt;
        try {
            CompletionResponse response = inner_->complete(request);
            if (response.text.empty()) throw Error(ErrorKind::MalformedReply, "backend returned empty text");
            response.request_fingerprint = fp;
            entry["status"] = "ok";
            entry["latency_ms"] = response.latency_ms;
            entry["finish_reason"] = response.finish_reason;
            entry["truncated"] = response.finish_reason == "length";
            audit_->append(entry);
            return response;
        } catch (const Error& e) {
            const bool transient = e.kind() == ErrorKind::Transport || e.kind() == ErrorKind::RateLimited;
            entry["status"] = "error";
            entry["error"] = std::string(to_string(e.kind()));
            entry["message"] = e.detail();
            entry["truncated"] = false;
            audit_->append(entry);
            if (!transient || attempt >= options_.retry.max_attempts) {
                throw Error(e.kind(), e.detail() + " (after " + std::to_string(attempt) + " attempt(s))",
                            e.raw());
            }
        }
        options_.sleep(backoff_for(attempt));
    }
}

}  // namespace salesforge::backend
