#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include "scamlens/errors.hpp"
#include "scamlens/llm_gateway.hpp"
#include "support.hpp"

using namespace scamlens;
using testing::ScriptedTransport;

namespace {

const std::string kVerdict =
    R"({"verdict":"scam","confidence":0.95,"red_flags":[{"category":"suspicious_link","evidence":"wwwthefitdollar.com"}]})";

EmailDocument fixture_doc() { return parse_email(testing::read_fixture("rackspace_phish.eml")); }

BackendConfig fast_backend(int retries = 2) {
    BackendConfig b;
    b.endpoint_url = "http://127.0.0.1:9/v1/chat/completions";
    b.max_retries = retries;
    b.backoff_base = std::chrono::milliseconds(100);
    return b;
}

struct SleepLog {
    std::vector<std::chrono::milliseconds> sleeps;
    RetryHooks hooks() {
        return {[this](std::chrono::milliseconds d) { sleeps.push_back(d); }, 7};
    }
};

}  // namespace

TEST_CASE("build_prompt substitutes placeholders verbatim") {
    auto tmpl = PromptTemplate::defaults();
    auto prompt = build_prompt(fixture_doc(), tmpl);
    CHECK(prompt.find("wwwthefitdollar.com/gabbyr") != std::string::npos);
    for (auto c : kAllFlagCategories) CHECK(prompt.find(std::string(to_string(c))) != std::string::npos);
    CHECK(prompt == build_prompt(fixture_doc(), tmpl));

    auto empty = build_prompt(EmailDocument{}, tmpl);
    CHECK(empty.find("{body}") == std::string::npos);
    CHECK(empty.find(tmpl.output_contract_text) != std::string::npos);
}

TEST_CASE("build_prompt truncates long bodies with a marker") {
    PromptTemplate tmpl;
    tmpl.user_text_pattern = "{body}";
    tmpl.max_body_chars = 50;
    auto doc = parse_plaintext(std::string(500, 'a'));
    auto prompt = build_prompt(doc, tmpl);
    CHECK(prompt.size() == 50 + kTruncationMarker.size());
    CHECK(prompt.ends_with(kTruncationMarker));
}

TEST_CASE("truncation never splits a UTF-8 sequence") {
    PromptTemplate tmpl;
    tmpl.user_text_pattern = "{body}";
    tmpl.max_body_chars = 5;
    auto prompt = build_prompt(parse_plaintext("\xC3\xA9\xC3\xA9\xC3\xA9\xC3\xA9"), tmpl);
    auto body = prompt.substr(0, prompt.size() - kTruncationMarker.size());
    CHECK(body == "\xC3\xA9\xC3\xA9");
}

TEST_CASE("request body is a chat-completion object") {
    auto body = nlohmann::json::parse(build_request_body(fixture_doc(), PromptTemplate::defaults(), BackendConfig{}));
    CHECK(body["model"] == "gpt-4");
    CHECK(body["temperature"] == 0);
    REQUIRE(body["messages"].is_array());
    CHECK(body["messages"].back()["role"] == "user");
}

TEST_CASE("parse_llm_response: plain, fenced, prose") {
    auto v = parse_llm_response(kVerdict);
    CHECK(v.verdict == Label::scam);
    CHECK(v.confidence == 0.95);
    REQUIRE(v.red_flags.size() == 1);
    CHECK(v.red_flags[0].category == FlagCategory::suspicious_link);
    CHECK(v.red_flags[0].evidence == "wwwthefitdollar.com");
    CHECK_FALSE(v.degraded);

    auto fenced = parse_llm_response("Here is my analysis:\n```json\n" + kVerdict + "\n```\nHope that helps {really}.");
    CHECK(fenced.verdict == v.verdict);
    CHECK(fenced.confidence == v.confidence);
    CHECK(fenced.red_flags == v.red_flags);
    CHECK_FALSE(fenced.degraded);

    CHECK_THROWS_AS(parse_llm_response("I believe this is fine."), UnparseableResponse);
    CHECK_THROWS_AS(parse_llm_response("{\"confidence\": 0.3}"), UnparseableResponse);
}

TEST_CASE("parse_llm_response clamps and drops unknown categories") {
    auto v = parse_llm_response(
        R"({"verdict":"legitimate","confidence":1.7,"red_flags":[{"category":"vibes","evidence":"x"},{"category":"urgency_fear","evidence":"now"}]})");
    CHECK(v.verdict == Label::legitimate);
    CHECK(v.confidence == 1.0);
    CHECK(v.red_flags.size() == 1);
    CHECK(v.dropped_flags == 1);
}

TEST_CASE("fallback keyword parse") {
    auto v = fallback_verdict("This looks like a classic Phishing attempt.");
    CHECK(v.verdict == Label::scam);
    CHECK(v.confidence == 0.5);
    CHECK(v.degraded);
    CHECK(fallback_verdict("Seems fine to me.").verdict == Label::legitimate);
}

TEST_CASE("classify_remote: structured reply in one request") {
    ScriptedTransport t({testing::chat_ok(kVerdict)});
    auto v = classify_remote(fixture_doc(), PromptTemplate::defaults(), fast_backend(), t);
    CHECK(t.attempts() == 1);
    CHECK(v.verdict == Label::scam);
    CHECK(v.confidence == 0.95);
    CHECK(v.red_flags.size() == 1);
}

TEST_CASE("classify_remote: free prose degrades to the keyword fallback") {
    ScriptedTransport t({testing::chat_ok("This email is very likely to be a scam.")});
    auto v = classify_remote(fixture_doc(), PromptTemplate::defaults(), fast_backend(), t);
    CHECK(v.degraded);
    CHECK(v.verdict == Label::scam);
    CHECK(v.confidence == 0.5);
}

TEST_CASE("classify_remote: 429 then success takes two attempts") {
    ScriptedTransport t({testing::status(429), testing::chat_ok(kVerdict)});
    SleepLog log;
    auto v = classify_remote(fixture_doc(), PromptTemplate::defaults(), fast_backend(), t, log.hooks());
    CHECK(t.attempts() == 2);
    CHECK(v.verdict == Label::scam);
    REQUIRE(log.sleeps.size() == 1);
    CHECK(log.sleeps[0] <= std::chrono::milliseconds(100));
}

TEST_CASE("classify_remote: auth failures are never retried") {
    for (int code : {401, 403}) {
        ScriptedTransport t({testing::status(code), testing::chat_ok(kVerdict)});
        SleepLog log;
        CHECK_THROWS_AS(classify_remote(fixture_doc(), PromptTemplate::defaults(), fast_backend(), t, log.hooks()), AuthFailure);
        CHECK(t.attempts() == 1);
        CHECK(log.sleeps.empty());
    }
}

TEST_CASE("classify_remote: exhausted retries") {
    SleepLog log;
    ScriptedTransport timeouts({testing::timed_out()});
    CHECK_THROWS_AS(classify_remote(fixture_doc(), PromptTemplate::defaults(), fast_backend(2), timeouts, log.hooks()),
                    BackendUnavailable);
    CHECK(timeouts.attempts() == 3);
    // the final-attempt timeout is reported as the more specific Timeout
    ScriptedTransport again({testing::timed_out()});
    CHECK_THROWS_AS(classify_remote(fixture_doc(), PromptTemplate::defaults(), fast_backend(2), again, log.hooks()), Timeout);

    ScriptedTransport errors({testing::status(503)});
    CHECK_THROWS_AS(classify_remote(fixture_doc(), PromptTemplate::defaults(), fast_backend(4), errors, log.hooks()),
                    BackendUnavailable);
    CHECK(errors.attempts() == 5);

    ScriptedTransport bad_request({testing::status(400)});
    CHECK_THROWS_AS(classify_remote(fixture_doc(), PromptTemplate::defaults(), fast_backend(4), bad_request, log.hooks()),
                    BackendUnavailable);
    CHECK(bad_request.attempts() == 1);
}

TEST_CASE("backoff doubles its cap and is reproducible per seed") {
    auto run = [] {
        ScriptedTransport t({testing::status(500)});
        SleepLog log;
        auto backend = fast_backend(6);
        CHECK_THROWS(classify_remote(EmailDocument{}, PromptTemplate::defaults(), backend, t, log.hooks()));
        return log.sleeps;
    };
    auto a = run();
    REQUIRE(a.size() == 6);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].count() >= 0);
        CHECK(a[i].count() <= 100 * (1 << i));
    }
    CHECK(a == run());
}

TEST_CASE("bearer token comes from the named environment variable") {
    ::setenv("SCAMLENS_TEST_KEY", "sk-test", 1);
    auto backend = fast_backend();
    backend.api_key_ref = "SCAMLENS_TEST_KEY";
    ScriptedTransport t({testing::chat_ok(kVerdict)});
    classify_remote(EmailDocument{}, PromptTemplate::defaults(), backend, t);
    auto headers = t.requests().at(0).headers;
    CHECK(std::find(headers.begin(), headers.end(), std::pair<std::string, std::string>{"Authorization", "Bearer sk-test"}) !=
          headers.end());
    ::unsetenv("SCAMLENS_TEST_KEY");
}

TEST_CASE("SCAMLENS_API_URL overrides the endpoint") {
    ::setenv("SCAMLENS_API_URL", "http://localhost:1234/x", 1);
    CHECK(BackendConfig{}.with_environment().endpoint_url == "http://localhost:1234/x");
    ::unsetenv("SCAMLENS_API_URL");
    CHECK(BackendConfig{}.with_environment().endpoint_url == BackendConfig{}.endpoint_url);
}

TEST_CASE("RemoteGateway caps concurrent requests") {
    struct SlowTransport : Transport {
        std::atomic<int> in_flight{0}, peak{0};
        HttpResponse send(const HttpRequest&) override {
            int now = ++in_flight;
            int p = peak.load();
            while (now > p && !peak.compare_exchange_weak(p, now)) {
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(20));
            --in_flight;
            return testing::chat_ok(kVerdict);
        }
    };
    auto transport = std::make_shared<SlowTransport>();
    auto backend = fast_backend();
    backend.max_concurrent_requests = 2;
    RemoteGateway gateway(backend, PromptTemplate::defaults(), transport);
    std::vector<std::thread> threads;
    for (int i = 0; i < 6; ++i) threads.emplace_back([&] { gateway.classify(EmailDocument{}); });
    for (auto& t : threads) t.join();
    CHECK(transport->peak.load() <= 2);
}

TEST_CASE("mock_classify mirrors the heuristic engine") {
    auto doc = fixture_doc();
    auto cfg = DetectorConfig::defaults();
    auto v = mock_classify(doc, cfg.brands, cfg);
    auto flags = detect_flags(doc, cfg);
    CHECK(v.verdict == Label::scam);
    CHECK(v.confidence == heuristic_score(flags));
    REQUIRE(v.red_flags.size() == flags.size());
    for (std::size_t i = 0; i < flags.size(); ++i) CHECK(v.red_flags[i].category == flags[i].category);
    CHECK_FALSE(v.degraded);
    CHECK(v == mock_classify(doc, cfg.brands, cfg));

    auto empty = mock_classify(EmailDocument{}, cfg.brands, cfg);
    CHECK(empty.verdict == Label::legitimate);
    CHECK(empty.confidence == 0.0);
}

TEST_CASE("HttpTransport reports an unreachable endpoint as status 0") {
    HttpTransport t;
    HttpRequest req;
    req.url = "http://127.0.0.1:9/v1/chat/completions";
    req.timeout = std::chrono::milliseconds(500);
    req.body = "{}";
    auto res = t.send(req);
    CHECK(res.status == 0);
}
