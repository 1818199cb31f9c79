#pragma once

// Prompt construction, chat-completion transport, response parsing and the
// deterministic mock backend.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "scamlens/email.hpp"
#include "scamlens/labels.hpp"
#include "scamlens/redflags.hpp"

namespace scamlens {

struct PromptTemplate {
    std::string system_text;
    std::string user_text_pattern;  // {subject} {sender} {body} {categories}
    std::string output_contract_text;
    std::size_t max_body_chars = 8000;

    static PromptTemplate defaults();
    bool valid() const { return user_text_pattern.find("{body}") != std::string::npos; }
};

inline constexpr std::string_view kTruncationMarker = "\n[... message truncated ...]";

struct LlmFlag {
    FlagCategory category;
    std::string evidence;

    bool operator==(const LlmFlag&) const = default;
};

struct LlmVerdict {
    Label verdict = Label::legitimate;
    double confidence = 0.0;  // probability of scam, in [0, 1]
    std::vector<LlmFlag> red_flags;
    std::string raw_response;
    bool degraded = false;
    std::size_t dropped_flags = 0;  // unknown categories discarded while parsing

    bool operator==(const LlmVerdict&) const = default;
};

struct BackendConfig {
    std::string endpoint_url = "https://api.openai.com/v1/chat/completions";
    std::string model_name = "gpt-4";
    std::string api_key_ref = "SCAMLENS_API_KEY";
    std::chrono::milliseconds timeout{30000};
    int max_retries = 2;
    int max_concurrent_requests = 4;
    std::chrono::milliseconds backoff_base{1000};

    bool valid() const { return timeout.count() > 0 && max_retries >= 0 && max_concurrent_requests >= 1; }

    /// Applies SCAMLENS_API_URL when set.
    BackendConfig with_environment() const;
};

struct HttpRequest {
    std::string url;
    std::vector<std::pair<std::string, std::string>> headers;
    std::string body;
    std::chrono::milliseconds timeout{0};
};

struct HttpResponse {
    int status = 0;  // 0 when no response was received
    std::string body;
    bool timed_out = false;
};

/// Sends one request. Implementations must be safe for concurrent use.
class Transport {
public:
    virtual ~Transport() = default;
    virtual HttpResponse send(const HttpRequest& request) = 0;
};

/// cpp-httplib client, HTTP and HTTPS.
class HttpTransport final : public Transport {
public:
    HttpResponse send(const HttpRequest& request) override;
};

/// Controls backoff sleeps; tests substitute a recorder.
struct RetryHooks {
    std::function<void(std::chrono::milliseconds)> sleep;
    std::uint64_t jitter_seed = 0x5eed;
};

std::string build_prompt(const EmailDocument& doc, const PromptTemplate& tmpl);

/// Chat-completion request body: {model, messages, temperature: 0}.
std::string build_request_body(const EmailDocument& doc, const PromptTemplate& tmpl, const BackendConfig& backend);

/// First structured object with a `verdict` field, tolerating prose and code
/// fences around it. Throws UnparseableResponse.
LlmVerdict parse_llm_response(std::string_view raw);

/// Keyword fallback used when structured parsing fails.
LlmVerdict fallback_verdict(std::string_view raw);

LlmVerdict classify_remote(const EmailDocument& doc, const PromptTemplate& tmpl, const BackendConfig& backend,
                           Transport& transport, const RetryHooks& hooks = {});

LlmVerdict mock_classify(const EmailDocument& doc, std::span<const BrandProfile> brands,
                         const DetectorConfig& config = DetectorConfig::defaults());

/// Remote backend shared across threads; at most max_concurrent_requests
/// calls are in flight at once.
class RemoteGateway {
public:
    RemoteGateway(BackendConfig backend, PromptTemplate tmpl, std::shared_ptr<Transport> transport,
                  RetryHooks hooks = {});

    LlmVerdict classify(const EmailDocument& doc);

    const BackendConfig& backend() const noexcept { return backend_; }

private:
    BackendConfig backend_;
    PromptTemplate template_;
    std::shared_ptr<Transport> transport_;
    RetryHooks hooks_;
    std::mutex mutex_;
    std::condition_variable slot_free_;
    int in_flight_ = 0;
};

}  // namespace scamlens
