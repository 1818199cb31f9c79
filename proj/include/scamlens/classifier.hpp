#pragma once

// Signal fusion, the threshold decision rule, and the end-to-end pipeline.

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "scamlens/email.hpp"
#include "scamlens/labels.hpp"
#include "scamlens/llm_gateway.hpp"
#include "scamlens/redflags.hpp"

namespace scamlens {

/// Convex weights; normalized to sum to one on construction.
class FusionWeights {
public:
    FusionWeights() : FusionWeights(0.5, 0.5) {}
    FusionWeights(double heuristic, double llm);

    double heuristic() const noexcept { return heuristic_; }
    double llm() const noexcept { return llm_; }

    bool operator==(const FusionWeights&) const = default;

private:
    double heuristic_;
    double llm_;
};

/// Without an LLM verdict the heuristic score is returned unchanged.
double fuse(double heuristic, const std::optional<LlmVerdict>& llm, const FusionWeights& weights);
double fuse(double heuristic, std::optional<double> llm_confidence, const FusionWeights& weights);

/// Scam iff confidence is strictly above the threshold.
Label decide(double confidence, double threshold);

enum class BackendKind { mock, remote };

struct PipelineConfig {
    DetectorConfig detector = DetectorConfig::defaults();
    FusionWeights weights;
    double threshold = 0.5;
    BackendKind backend = BackendKind::mock;
    bool require_llm = false;
    BackendConfig remote;
    PromptTemplate prompt = PromptTemplate::defaults();
};

/// Detector keys plus: threshold, weights.heuristic, weights.llm, backend,
/// require_llm, remote.{endpoint_url,model,api_key_env,timeout_ms,max_retries,
/// max_concurrent,backoff_ms}, prompt.max_body_chars.
PipelineConfig parse_pipeline_config(std::string_view text);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

struct StageTimings {
    std::chrono::microseconds detect{0};
    std::chrono::microseconds llm{0};
    std::chrono::microseconds total{0};
};

struct Verdict {
    double confidence = 0.0;
    Label decision = Label::legitimate;
    double threshold_used = 0.5;
    double heuristic_score = 0.0;
    std::vector<RedFlag> flags;
    std::optional<LlmVerdict> llm;
    bool degraded = false;         // LLM failed and was skipped, or its answer came from the keyword fallback
    std::string degraded_reason;
    StageTimings timings;
};

/// Runs detection, the configured backend, fusion and the decision rule.
/// Gateway errors propagate only when require_llm is set.
class Pipeline {
public:
    explicit Pipeline(PipelineConfig config, std::shared_ptr<Transport> transport = nullptr, RetryHooks hooks = {});

    Verdict classify(const EmailDocument& doc) const;

    const PipelineConfig& config() const noexcept { return config_; }

private:
    PipelineConfig config_;
    std::shared_ptr<RemoteGateway> gateway_;
};

inline Verdict classify(const EmailDocument& doc, const PipelineConfig& config,
                        std::shared_ptr<Transport> transport = nullptr) {
    return Pipeline(config, std::move(transport)).classify(doc);
}

}  // namespace scamlens
