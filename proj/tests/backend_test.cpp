//
// backend_test.cpp
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

#include <gtest/gtest.h>

#include <httplib.h>

#include <atomic>
#include <thread>

#include "salesforge/backend.hpp"
#include "test_support.hpp"

namespace salesforge::backend {
namespace {

CompletionRequest request(const std::string& content, std::optional<std::int64_t> seed = std::nullopt) {
    SamplingParams p;
    p.model_name = "test-model";
    p.seed = seed;
    return make_request({{Role::System, "be brief"}, {Role::User, content}}, p);
}

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected an Error";
    return ErrorKind::Usage;
}

TEST(Request, WireBodyAndFingerprint) {
    const auto r = request("hi");
    EXPECT_EQ(to_json(r).dump(),
              R"({"model":"test-model","messages":[{"role":"system","content":"be brief"},{"role":"user","content":"hi"}],"temperature":0.7,"max_tokens":1024})");
    EXPECT_EQ(to_json(request("hi", 7))["seed"], 7);

    const std::string fp = fingerprint(r);
    EXPECT_EQ(fp.size(), 16u);
    EXPECT_EQ(fp, fingerprint(request("hi")));
    EXPECT_NE(fp, fingerprint(request("hi!")));
    EXPECT_NE(fp, fingerprint(request("hi", 1)));
}

TEST(MockBackend, QueueServesInOrderThenRunsOut) {
    auto mock = testing::queue_mock({"one", "two", "three"});
    const auto first = mock->complete(request("a"));
    EXPECT_EQ(first.text, "one");
    EXPECT_EQ(first.latency_ms, 0.0);
    EXPECT_EQ(mock->complete(request("a")).text, "two");
    EXPECT_EQ(mock->complete(request("b")).text, "three");
    EXPECT_EQ(mock->remaining(), 0u);
    EXPECT_EQ(kind_of([&] { mock->complete(request("c")); }), ErrorKind::MockExhausted);
    EXPECT_EQ(mock->calls().size(), 4u);
}

TEST(MockBackend, SingleEntryScriptExhaustsOnSecondCall) {
    auto mock = testing::queue_mock({"hello"});
    EXPECT_EQ(mock->complete(request("a")).text, "hello");
    EXPECT_EQ(kind_of([&] { mock->complete(request("a")); }), ErrorKind::MockExhausted);
}

TEST(MockBackend, FingerprintEntriesIgnoreCallOrder) {
    const auto ra = request("alpha");
    const auto rb = request("beta");
    auto build = [&] {
        return std::make_unique<MockBackend>(std::vector<MockEntry>{
            {MockEntry::Match::Fingerprint, fingerprint(ra), "reply-a"},
            {MockEntry::Match::Fingerprint, fingerprint(rb), "reply-b"},
        });
    };
    auto first = build();
    const std::string a1 = first->complete(ra).text;
    const std::string b1 = first->complete(rb).text;
    auto second = build();
    const std::string b2 = second->complete(rb).text;
    const std::string a2 = second->complete(ra).text;
    EXPECT_EQ(a1, "reply-a");
    EXPECT_EQ(a1, a2);
    EXPECT_EQ(b1, b2);
    // Fingerprint replies are not consumed.
    EXPECT_EQ(second->complete(ra).text, "reply-a");
}

TEST(MockBackend, FingerprintTakesPrecedenceOverQueue) {
    const auto ra = request("alpha");
    MockBackend mock({{MockEntry::Match::Queue, {}, "queued"}, {MockEntry::Match::Fingerprint, fingerprint(ra), "keyed"}});
    EXPECT_EQ(mock.complete(ra).text, "keyed");
    EXPECT_EQ(mock.complete(request("other")).text, "queued");
}

TEST(MockBackend, EmptyReplyIsMalformed) {
    auto mock = testing::queue_mock({""});
    EXPECT_EQ(kind_of([&] { mock->complete(request("a")); }), ErrorKind::MalformedReply);
}

TEST(MockScript, ParsesAndReportsLineNumbers) {
    const auto entries = parse_mock_script(
        "{\"match\":\"queue\",\"key\":null,\"reply\":\"x\"}\n\n{\"match\":\"fingerprint\",\"key\":\"abc\",\"reply\":\"y\"}\n");
    ASSERT_EQ(entries.size(), 2u);
    EXPECT_EQ(entries[1].match, MockEntry::Match::Fingerprint);
    EXPECT_EQ(entries[1].key, "abc");
    EXPECT_EQ(parse_mock_script(mock_script_line(entries[0]) + "\n")[0].reply, "x");

    try {
        parse_mock_script("{\"reply\":\"ok\"}\n{\"match\":\"fingerprint\",\"reply\":\"no key\"}\n", "script.jsonl");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ParseError);
        EXPECT_NE(std::string(e.what()).find("script.jsonl:2"), std::string::npos) << e.what();
    }
    EXPECT_EQ(kind_of([] { parse_mock_script("not json\n"); }), ErrorKind::ParseError);
}

/// Local chat/completions endpoint whose behavior each test scripts.
class FakeEndpoint {
public:
    using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

    explicit FakeEndpoint(Handler handler) {
        server_.Post("/v1/chat/completions", std::move(handler));
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeEndpoint() {
        server_.stop();
        thread_.join();
    }

    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

std::string ok_body(const std::string& content, const std::string& finish = "stop") {
    return Json{{"choices", Json::array({Json{{"message", {{"role", "assistant"}, {"content", content}}},
                                              {"finish_reason", finish}}})}}
        .dump();
}

TEST(HttpBackend, SpeaksTheChatCompletionsProtocol) {
    std::string seen_body, seen_auth;
    FakeEndpoint server([&](const httplib::Request& req, httplib::Response& res) {
        seen_body = req.body;
        seen_auth = req.get_header_value("Authorization");
        res.set_content(ok_body("hello"), "application/json");
    });
    HttpBackend b({server.base_url(), "secret-key"});
    const auto r = request("hi");
    const auto response = b.complete(r);
    EXPECT_EQ(response.text, "hello");
    EXPECT_EQ(response.finish_reason, "stop");
    EXPECT_EQ(response.request_fingerprint, fingerprint(r));
    EXPECT_EQ(Json::parse(seen_body), to_json(r));
    EXPECT_EQ(seen_auth, "Bearer secret-key");
}

TEST(HttpBackend, MapsFailuresToErrorKinds) {
    std::atomic<int> mode{0};
    FakeEndpoint server([&](const httplib::Request&, httplib::Response& res) {
        switch (mode.load()) {
            case 0: res.status = 429; res.set_content("slow down", "text/plain"); break;
            case 1: res.status = 503; break;
            case 2: res.set_content(R"({"choices":[]})", "application/json"); break;
            case 3: res.set_content(ok_body(""), "application/json"); break;
            case 4: res.status = 400; res.set_content("{}", "application/json"); break;
            default: res.set_content("not json", "text/plain"); break;
        }
    });
    HttpBackend b({server.base_url(), ""});
    const ErrorKind expected[] = {ErrorKind::RateLimited, ErrorKind::Transport, ErrorKind::MalformedReply,
                                  ErrorKind::MalformedReply, ErrorKind::MalformedReply, ErrorKind::MalformedReply};
    for (int m = 0; m < 6; ++m) {
        mode = m;
        EXPECT_EQ(kind_of([&] { b.complete(request("x")); }), expected[m]) << "mode " << m;
    }
}

TEST(HttpBackend, UnreachableEndpointIsTransport) {
    HttpConfig cfg{"http://127.0.0.1:1/v1", ""};
    cfg.connect_timeout = std::chrono::seconds(1);
    HttpBackend b(cfg);
    EXPECT_EQ(kind_of([&] { b.complete(request("x")); }), ErrorKind::Transport);
}

TEST(HttpBackend, RejectsBaseUrlWithoutScheme) {
    EXPECT_EQ(kind_of([] { HttpBackend b({"localhost:8080", ""}); }), ErrorKind::Config);
}

/// Fails with the given kinds in order, then answers "done".
class FlakyBackend : public ChatBackend {
public:
    explicit FlakyBackend(std::vector<ErrorKind> failures) : failures_(std::move(failures)) {}
    CompletionResponse complete(const CompletionRequest& r) override {
        requests.push_back(r);
        if (calls_ < failures_.size()) throw Error(failures_[calls_++], "scripted failure");
        ++calls_;
        return {"done", "length", "", 0.0};
    }
    std::vector<CompletionRequest> requests;

private:
    std::vector<ErrorKind> failures_;
    std::size_t calls_ = 0;
};

TEST(RetryingBackend, RetriesTransientFailuresWithoutChangingTheRequest) {
    auto inner = std::make_shared<FlakyBackend>(std::vector{ErrorKind::Transport, ErrorKind::RateLimited});
    auto audit = std::make_shared<AuditLog>();
    std::vector<std::chrono::milliseconds> sleeps;
    RetryingOptions options;
    options.sleep = [&](std::chrono::milliseconds d) { sleeps.push_back(d); };
    RetryingBackend b(inner, audit, options);

    const auto r = request("hi");
    const auto response = b.complete(r);
    EXPECT_EQ(response.text, "done");
    ASSERT_EQ(inner->requests.size(), 3u);
    for (const auto& sent : inner->requests) EXPECT_EQ(sent, r);

    const auto entries = audit->entries();
    ASSERT_EQ(entries.size(), 3u);
    EXPECT_EQ(entries[0]["status"], "error");
    EXPECT_EQ(entries[0]["error"], "Transport");
    EXPECT_EQ(entries[2]["status"], "ok");
    EXPECT_EQ(entries[2]["truncated"], true);
    for (const auto& e : entries) EXPECT_EQ(e["fingerprint"], fingerprint(r));

    ASSERT_EQ(sleeps.size(), 2u);
    EXPECT_GE(sleeps[0].count(), 800);
    EXPECT_LE(sleeps[0].count(), 1200);
    EXPECT_GE(sleeps[1].count(), 1600);
    EXPECT_LE(sleeps[1].count(), 2400);
}

TEST(RetryingBackend, GivesUpAfterTheAttemptCap) {
    auto inner = std::make_shared<FlakyBackend>(std::vector<ErrorKind>(10, ErrorKind::RateLimited));
    auto audit = std::make_shared<AuditLog>();
    RetryingOptions options;
    options.sleep = [](std::chrono::milliseconds) {};
    RetryingBackend b(inner, audit, options);
    try {
        b.complete(request("x"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::RateLimited);
        EXPECT_NE(std::string(e.what()).find("after 5 attempt(s)"), std::string::npos);
    }
    EXPECT_EQ(inner->requests.size(), 5u);
    EXPECT_EQ(audit->entries().size(), 5u);
}

TEST(RetryingBackend, DoesNotRetryPermanentFailures) {
    auto inner = std::make_shared<FlakyBackend>(std::vector{ErrorKind::MalformedReply});
    RetryingOptions options;
    options.sleep = [](std::chrono::milliseconds) { ADD_FAILURE() << "should not sleep"; };
    RetryingBackend b(inner, nullptr, options);
    EXPECT_EQ(kind_of([&] { b.complete(request("x")); }), ErrorKind::MalformedReply);
    EXPECT_EQ(inner->requests.size(), 1u);
}

/// Counts overlapping calls.
class SlowBackend : public ChatBackend {
public:
    CompletionResponse complete(const CompletionRequest&) override {
        const int now = ++active;
        int prev = peak.load();
        while (now > prev && !peak.compare_exchange_weak(prev, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
        --active;
        return {"ok", "stop", "", 0.0};
    }
    std::atomic<int> active{0};
    std::atomic<int> peak{0};
};

TEST(RetryingBackend, CapsRequestsInFlight) {
    auto inner = std::make_shared<SlowBackend>();
    RetryingOptions options;
    options.max_in_flight = 2;
    RetryingBackend b(inner, nullptr, options);
    std::vector<std::jthread> threads;
    for (int i = 0; i < 8; ++i) threads.emplace_back([&] { b.complete(request("x")); });
    threads.clear();
    EXPECT_LE(inner->peak.load(), 2);
    EXPECT_GE(inner->peak.load(), 1);
}

TEST(AuditLog, WritesOneLinePerEntry) {
    testing::TempDir dir;
    {
        AuditLog log(dir / "logs/audit.jsonl");
        log.append(Json{{"a", 1}});
        log.append(Json{{"b", 2}});
    }
    EXPECT_EQ(testing::slurp(dir / "logs/audit.jsonl"), "{\"a\":1}\n{\"b\":2}\n");
}

TEST(ApiKey, ReadFromEnvironment) {
    ::setenv(kApiKeyEnv, "from-env", 1);
    EXPECT_EQ(api_key_from_env(), "from-env");
    ::unsetenv(kApiKeyEnv);
    EXPECT_EQ(api_key_from_env(), "");
}

}  // namespace
}  // namespace salesforge::backend
