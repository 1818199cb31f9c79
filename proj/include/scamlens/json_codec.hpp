#pragma once

// Structured-object and plain-text renderings of verdicts and reports. The
// JSON shapes here are what the CLI prints with --json and what the HTTP
// service returns, so both surfaces stay byte-compatible.

#include <string>

#include <json.hpp>

#include "scamlens/classifier.hpp"
#include "scamlens/corpus.hpp"
#include "scamlens/evaluation.hpp"

namespace scamlens {

using Json = nlohmann::json;

Json to_json(const RedFlag& flag);
Json to_json(const LlmVerdict& verdict);
/// {decision, confidence, threshold, heuristic_score, flags, llm?, degraded, degraded_reason?}
Json to_json(const Verdict& verdict);
Json to_json(const ConfusionMatrix& cm);
Json to_json(const EvalReport& report);
Json to_json(const SweepCurve& curve);
Json to_json(const TuneResult& result);
Json to_json(const FalsePositiveReport& report);

/// Compact, invalid UTF-8 replaced rather than thrown on.
std::string dump(const Json& j);

std::string render_text(const Verdict& verdict);
std::string render_text(const EvalReport& report);
std::string render_text(const SweepCurve& curve);
std::string render_text(const TuneResult& result);

/// Markdown for reviewers: one section per false positive with its flags.
std::string render_markdown(const FalsePositiveReport& report);

}  // namespace scamlens
