#include "scamlens/classifier.hpp"

#include <algorithm>
#include <cmath>

#include "scamlens/config_file.hpp"
#include "scamlens/errors.hpp"
#include "text_util.hpp"

namespace scamlens {

FusionWeights::FusionWeights(double heuristic, double llm) {
    if (!(heuristic >= 0.0) || !(llm >= 0.0) || !std::isfinite(heuristic) || !std::isfinite(llm) || heuristic + llm <= 0.0)
        throw std::invalid_argument("fusion weights must be non-negative with a positive sum");
    double sum = heuristic + llm;
    heuristic_ = heuristic / sum;
    llm_ = llm / sum;
}

double fuse(double heuristic, std::optional<double> llm_confidence, const FusionWeights& weights) {
    if (!llm_confidence) return std::clamp(heuristic, 0.0, 1.0);
    return std::clamp(weights.heuristic() * heuristic + weights.llm() * *llm_confidence, 0.0, 1.0);
}

double fuse(double heuristic, const std::optional<LlmVerdict>& llm, const FusionWeights& weights) {
    return fuse(heuristic, llm ? std::optional<double>(llm->confidence) : std::nullopt, weights);
}

Label decide(double confidence, double threshold) { return confidence > threshold ? Label::scam : Label::legitimate; }

namespace {

[[noreturn]] void bad(const KeyValueEntry& e, const std::string& what) {
    throw ConfigError("config line " + std::to_string(e.line) + " (" + e.key + "): " + what);
}

double unit_interval(const KeyValueEntry& e) {
    double v = parse_number(e);
    if (!(v >= 0.0 && v <= 1.0)) bad(e, "must be in [0, 1]");
    return v;
}

}  // namespace

PipelineConfig parse_pipeline_config(std::string_view text) {
    PipelineConfig c;
    double w_heuristic = c.weights.heuristic(), w_llm = c.weights.llm();
    const KeyValueFile file = KeyValueFile::parse(text);
    for (const auto& e : file.entries()) {
        if (apply_detector_key(e, c.detector)) continue;
        const std::string& k = e.key;
        if (k == "threshold") {
            c.threshold = unit_interval(e);
        } else if (k == "weights.heuristic") {
            w_heuristic = parse_number(e);
        } else if (k == "weights.llm") {
            w_llm = parse_number(e);
        } else if (k == "backend") {
            if (e.value == "mock")
                c.backend = BackendKind::mock;
            else if (e.value == "remote")
                c.backend = BackendKind::remote;
            else
                bad(e, "expected mock or remote");
        } else if (k == "require_llm") {
            c.require_llm = parse_bool(e);
        } else if (k == "remote.endpoint_url") {
            c.remote.endpoint_url = e.value;
        } else if (k == "remote.model") {
            c.remote.model_name = e.value;
        } else if (k == "remote.api_key_env") {
            c.remote.api_key_ref = e.value;
        } else if (k == "remote.timeout_ms") {
            c.remote.timeout = std::chrono::milliseconds(parse_integer(e));
        } else if (k == "remote.max_retries") {
            c.remote.max_retries = static_cast<int>(parse_integer(e));
        } else if (k == "remote.max_concurrent") {
            c.remote.max_concurrent_requests = static_cast<int>(parse_integer(e));
        } else if (k == "remote.backoff_ms") {
            c.remote.backoff_base = std::chrono::milliseconds(parse_integer(e));
        } else if (k == "prompt.max_body_chars") {
            long v = parse_integer(e);
            if (v < 1) bad(e, "must be positive");
            c.prompt.max_body_chars = static_cast<std::size_t>(v);
        } else {
            bad(e, "unknown key");
        }
    }
    try {
        c.weights = FusionWeights(w_heuristic, w_llm);
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(ex.what());
    }
    if (!c.remote.valid()) throw ConfigError("remote backend: timeout must be > 0, retries >= 0, concurrency >= 1");
    return c;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) { return parse_pipeline_config(read_file(path)); }

Pipeline::Pipeline(PipelineConfig config, std::shared_ptr<Transport> transport, RetryHooks hooks)
    : config_(std::move(config)) {
    if (config_.backend == BackendKind::remote) {
        if (!transport) transport = std::make_shared<HttpTransport>();
        gateway_ = std::make_shared<RemoteGateway>(config_.remote.with_environment(), config_.prompt, std::move(transport),
                                                   std::move(hooks));
    }
}

Verdict Pipeline::classify(const EmailDocument& doc) const {
    using clock = std::chrono::steady_clock;
    auto micros = [](clock::duration d) { return std::chrono::duration_cast<std::chrono::microseconds>(d); };
    const auto started = clock::now();

    Verdict v;
    v.threshold_used = config_.threshold;
    v.flags = detect_flags(doc, config_.detector);
    v.heuristic_score = heuristic_score(v.flags);
    const auto detected = clock::now();
    v.timings.detect = micros(detected - started);

    if (config_.backend == BackendKind::mock) {
        v.llm = mock_classify(doc, config_.detector.brands, config_.detector);
    } else {
        try {
            v.llm = gateway_->classify(doc);
            if (v.llm->degraded) {
                v.degraded = true;
                v.degraded_reason = "llm response parsed by keyword fallback";
            }
        } catch (const Error& e) {
            if (config_.require_llm) throw;
            v.degraded = true;
            v.degraded_reason = std::string("llm unavailable: ") + e.what();
        }
    }
    v.timings.llm = micros(clock::now() - detected);

    v.confidence = fuse(v.heuristic_score, v.llm, config_.weights);
    v.decision = decide(v.confidence, v.threshold_used);
    v.timings.total = micros(clock::now() - started);
    return v;
}

}  // namespace scamlens
