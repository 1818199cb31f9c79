#include <doctest.h>

#include "scamlens/classifier.hpp"
#include "scamlens/errors.hpp"
#include "support.hpp"

using namespace scamlens;

TEST_CASE("fuse") {
    CHECK(fuse(0.58, std::optional<double>{}, FusionWeights(1, 0)) == 0.58);
    CHECK(fuse(0.58, std::optional<double>(0.2), FusionWeights(1, 0)) == 0.58);
    CHECK(fuse(0.0, std::optional<double>(0.95), FusionWeights(0, 1)) == 0.95);
    CHECK(std::abs(fuse(0.58, std::optional<double>(0.95), FusionWeights(0.5, 0.5)) - 0.765) < 1e-12);
    // llm absent: heuristic alone, whatever the weights
    CHECK(fuse(0.3, std::optional<LlmVerdict>{}, FusionWeights(0.2, 0.8)) == 0.3);
}

TEST_CASE("FusionWeights normalize and validate") {
    FusionWeights w(2, 6);
    CHECK(w.heuristic() == 0.25);
    CHECK(w.llm() == 0.75);
    CHECK_THROWS_AS(FusionWeights(0, 0), std::invalid_argument);
    CHECK_THROWS_AS(FusionWeights(-1, 2), std::invalid_argument);
}

TEST_CASE("decide is strict") {
    CHECK(decide(0.765, 0.5) == Label::scam);
    CHECK(decide(0.5, 0.5) == Label::legitimate);
    CHECK(decide(0.0, 0.0) == Label::legitimate);
    CHECK(decide(std::nextafter(0.5, 1.0), 0.5) == Label::scam);
}

TEST_CASE("pipeline with the mock backend") {
    PipelineConfig cfg;
    auto v = classify(parse_email(testing::read_fixture("rackspace_phish.eml")), cfg);
    CHECK(v.decision == Label::scam);
    CHECK(v.confidence > cfg.threshold);
    CHECK(v.threshold_used == 0.5);
    REQUIRE(v.llm.has_value());
    CHECK_FALSE(v.degraded);
    CHECK(v.timings.total >= v.timings.detect);

    auto empty = classify(EmailDocument{}, cfg);
    CHECK(empty.decision == Label::legitimate);
    CHECK(empty.confidence == 0.0);

    auto clean = classify(parse_email(testing::read_fixture("clean.eml")), cfg);
    CHECK(clean.decision == Label::legitimate);
    CHECK(clean.flags.empty());
}

TEST_CASE("remote failures degrade unless the LLM is required") {
    PipelineConfig cfg;
    cfg.backend = BackendKind::remote;
    cfg.remote.endpoint_url = "http://127.0.0.1:9/x";
    cfg.remote.max_retries = 1;
    cfg.remote.backoff_base = std::chrono::milliseconds(1);
    auto doc = parse_email(testing::read_fixture("rackspace_phish.eml"));
    RetryHooks no_sleep{[](std::chrono::milliseconds) {}, 1};

    auto failing = std::make_shared<testing::ScriptedTransport>(std::vector<HttpResponse>{testing::status(503)});
    auto v = Pipeline(cfg, failing, no_sleep).classify(doc);
    CHECK(v.degraded);
    CHECK_FALSE(v.llm.has_value());
    CHECK(v.confidence == v.heuristic_score);
    CHECK(v.decision == Label::scam);
    CHECK(failing->attempts() == 2);

    cfg.require_llm = true;
    CHECK_THROWS_AS(Pipeline(cfg, failing, no_sleep).classify(doc), BackendUnavailable);
}

TEST_CASE("remote verdict is fused with the heuristic") {
    PipelineConfig cfg;
    cfg.backend = BackendKind::remote;
    auto transport = std::make_shared<testing::ScriptedTransport>(
        std::vector<HttpResponse>{testing::chat_ok(R"({"verdict":"scam","confidence":0.95})")});
    auto doc = parse_plaintext("Dear Customer, click the link.");
    auto v = Pipeline(cfg, transport).classify(doc);
    REQUIRE(v.llm.has_value());
    CHECK(v.llm->confidence == 0.95);
    CHECK(std::abs(v.confidence - (0.5 * v.heuristic_score + 0.5 * 0.95)) < 1e-12);
}

TEST_CASE("pipeline configuration file") {
    auto cfg = parse_pipeline_config(
        "threshold = 0.35\n"
        "weights.heuristic = 3\n"
        "weights.llm = 1\n"
        "backend = remote\n"
        "require_llm = true\n"
        "remote.model = gpt-3.5-turbo\n"
        "remote.timeout_ms = 2500\n"
        "weight.generic_signoff = 0.25\n");
    CHECK(cfg.threshold == 0.35);
    CHECK(cfg.weights.heuristic() == 0.75);
    CHECK(cfg.backend == BackendKind::remote);
    CHECK(cfg.require_llm);
    CHECK(cfg.remote.model_name == "gpt-3.5-turbo");
    CHECK(cfg.remote.timeout == std::chrono::milliseconds(2500));
    CHECK(cfg.detector.weight(FlagCategory::generic_signoff) == 0.25);

    CHECK_THROWS_AS(parse_pipeline_config("threshold = 2"), ConfigError);
    CHECK_THROWS_AS(parse_pipeline_config("backend = carrier-pigeon"), ConfigError);
    CHECK_THROWS_AS(parse_pipeline_config("weights.heuristic = 0\nweights.llm = 0"), ConfigError);
    CHECK_THROWS_AS(parse_pipeline_config("remote.max_concurrent = 0"), ConfigError);
    CHECK_THROWS_AS(parse_pipeline_config("colour = blue"), ConfigError);

    CHECK(load_pipeline_config(testing::fixture("scamlens.conf")).threshold == 0.5);
}
