#include "scamlens/llm_gateway.hpp"

#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

#include <json.hpp>

#include "scamlens/errors.hpp"
#include "text_util.hpp"

namespace scamlens {

using nlohmann::json;

PromptTemplate PromptTemplate::defaults() {
    PromptTemplate t;
    t.system_text =
        "You are an email security analyst. You decide whether an email is a scam "
        "(phishing, advance-fee fraud, impersonation and similar fraud) or legitimate, "
        "and you point to the concrete evidence in the message.";
    t.user_text_pattern =
        "Analyze the following email for signs of a scam.\n"
        "\n"
        "From: {sender}\n"
        "Subject: {subject}\n"
        "\n"
        "--- BEGIN EMAIL BODY ---\n"
        "{body}\n"
        "--- END EMAIL BODY ---\n"
        "\n"
        "When listing red flags, use only these categories: {categories}.";
    t.output_contract_text =
        "Respond with exactly one JSON object and nothing else, in this form:\n"
        "{\"verdict\": \"scam\" or \"legitimate\", "
        "\"confidence\": <probability from 0 to 1 that the email is a scam>, "
        "\"red_flags\": [{\"category\": \"<one of the categories>\", \"evidence\": \"<exact text from the email>\"}]}";
    return t;
}

BackendConfig BackendConfig::with_environment() const {
    BackendConfig c = *this;
    if (const char* url = std::getenv("SCAMLENS_API_URL"); url && *url) c.endpoint_url = url;
    return c;
}

namespace {

std::string truncate_body(std::string_view body, std::size_t max_chars) {
    if (body.size() <= max_chars) return std::string(body);
    std::size_t cut = max_chars;
    // do not split a UTF-8 sequence
    while (cut > 0 && (static_cast<unsigned char>(body[cut]) & 0xC0) == 0x80) --cut;
    std::string out(body.substr(0, cut));
    out += kTruncationMarker;
    return out;
}

std::string sender_text(const SenderIdentity& s) {
    if (s.display_name.empty()) return s.address;
    if (s.address.empty()) return s.display_name;
    return s.display_name + " <" + s.address + ">";
}

std::string category_list() {
    std::string out;
    for (auto c : kAllFlagCategories) {
        if (!out.empty()) out += ", ";
        out += to_string(c);
    }
    return out;
}

// End of the brace-balanced object starting at `open`, skipping string contents.
std::size_t matching_brace(std::string_view s, std::size_t open) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = open; i < s.size(); ++i) {
        char c = s[i];
        if (in_string) {
            if (c == '\\')
                ++i;
            else if (c == '"')
                in_string = false;
            continue;
        }
        if (c == '"')
            in_string = true;
        else if (c == '{')
            ++depth;
        else if (c == '}' && --depth == 0)
            return i;
    }
    return std::string_view::npos;
}

std::optional<Label> verdict_label(const json& v) {
    if (!v.is_string()) return std::nullopt;
    std::string s = text::to_lower(text::trim(v.get<std::string>()));
    if (s == "scam" || s == "phishing" || s == "fraud" || s == "malicious") return Label::scam;
    if (s == "legitimate" || s == "legit" || s == "safe" || s == "benign" || s == "ham") return Label::legitimate;
    return std::nullopt;
}

std::optional<LlmVerdict> verdict_from_object(const json& obj, std::string_view raw) {
    if (!obj.is_object() || !obj.contains("verdict")) return std::nullopt;
    auto label = verdict_label(obj["verdict"]);
    if (!label) return std::nullopt;

    LlmVerdict v;
    v.verdict = *label;
    v.raw_response = std::string(raw);
    double confidence = *label == Label::scam ? 1.0 : 0.0;
    if (auto it = obj.find("confidence"); it != obj.end()) {
        if (it->is_number()) {
            confidence = it->get<double>();
        } else if (it->is_string()) {
            char* end = nullptr;
            const std::string& s = it->get_ref<const std::string&>();
            double parsed = std::strtod(s.c_str(), &end);
            if (end != s.c_str()) confidence = parsed;
        }
    }
    if (std::isnan(confidence)) confidence = 0.5;
    v.confidence = std::clamp(confidence, 0.0, 1.0);

    if (auto it = obj.find("red_flags"); it != obj.end() && it->is_array()) {
        for (const auto& item : *it) {
            std::optional<FlagCategory> cat;
            std::string evidence;
            if (item.is_object()) {
                if (auto c = item.find("category"); c != item.end() && c->is_string())
                    cat = parse_flag_category(c->get<std::string>());
                if (auto e = item.find("evidence"); e != item.end() && e->is_string()) evidence = e->get<std::string>();
            } else if (item.is_string()) {
                cat = parse_flag_category(item.get<std::string>());
            }
            if (!cat) {
                ++v.dropped_flags;
                continue;
            }
            v.red_flags.push_back({*cat, std::move(evidence)});
        }
    }
    return v;
}

std::string response_content(const std::string& body) {
    json doc = json::parse(body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) return body;
    auto choices = doc.find("choices");
    if (choices == doc.end() || !choices->is_array() || choices->empty()) return body;
    const json& first = (*choices)[0];
    if (first.contains("message") && first["message"].is_object() && first["message"].contains("content") &&
        first["message"]["content"].is_string())
        return first["message"]["content"].get<std::string>();
    if (first.contains("text") && first["text"].is_string()) return first["text"].get<std::string>();
    return body;
}

}  // namespace

std::string build_prompt(const EmailDocument& doc, const PromptTemplate& tmpl) {
    const std::string& pattern = tmpl.user_text_pattern;
    std::string out;
    out.reserve(pattern.size() + doc.body.size());
    std::size_t i = 0;
    while (i < pattern.size()) {
        if (pattern[i] == '{') {
            auto close = pattern.find('}', i);
            if (close != std::string::npos) {
                std::string_view name(pattern.data() + i + 1, close - i - 1);
                bool known = true;
                if (name == "subject")
                    out += doc.subject;
                else if (name == "sender")
                    out += sender_text(doc.sender);
                else if (name == "body")
                    out += truncate_body(doc.body, tmpl.max_body_chars);
                else if (name == "categories")
                    out += category_list();
                else
                    known = false;
                if (known) {
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(pattern[i]);
        ++i;
    }
    if (!tmpl.output_contract_text.empty()) {
        out += "\n\n";
        out += tmpl.output_contract_text;
    }
    return out;
}

std::string build_request_body(const EmailDocument& doc, const PromptTemplate& tmpl, const BackendConfig& backend) {
    json messages = json::array();
    if (!tmpl.system_text.empty()) messages.push_back({{"role", "system"}, {"content", tmpl.system_text}});
    messages.push_back({{"role", "user"}, {"content", build_prompt(doc, tmpl)}});
    json body = {{"model", backend.model_name}, {"messages", std::move(messages)}, {"temperature", 0}};
    return body.dump();
}

LlmVerdict parse_llm_response(std::string_view raw) {
    for (std::size_t open = raw.find('{'); open != std::string_view::npos; open = raw.find('{', open + 1)) {
        std::size_t close = matching_brace(raw, open);
        if (close == std::string_view::npos) continue;
        json obj = json::parse(raw.substr(open, close - open + 1), nullptr, false);
        if (obj.is_discarded()) continue;
        if (auto v = verdict_from_object(obj, raw)) return *v;
    }
    throw UnparseableResponse("no structured verdict object in response");
}

LlmVerdict fallback_verdict(std::string_view raw) {
    LlmVerdict v;
    std::string lower = text::to_lower(raw);
    bool scam = lower.find("scam") != std::string::npos || lower.find("phishing") != std::string::npos;
    v.verdict = scam ? Label::scam : Label::legitimate;
    v.confidence = 0.5;
    v.raw_response = std::string(raw);
    v.degraded = true;
    return v;
}

LlmVerdict classify_remote(const EmailDocument& doc, const PromptTemplate& tmpl, const BackendConfig& backend,
                           Transport& transport, const RetryHooks& hooks) {
    if (!backend.valid()) throw ConfigError("invalid backend configuration");

    HttpRequest request;
    request.url = backend.endpoint_url;
    request.timeout = backend.timeout;
    request.body = build_request_body(doc, tmpl, backend);
    request.headers.emplace_back("Content-Type", "application/json");
    if (const char* key = std::getenv(backend.api_key_ref.c_str()); key && *key)
        request.headers.emplace_back("Authorization", std::string("Bearer ") + key);

    std::mt19937_64 rng(hooks.jitter_seed);
    bool last_timed_out = false;
    std::string last_problem;
    for (int attempt = 0; attempt <= backend.max_retries; ++attempt) {
        HttpResponse response = transport.send(request);
        if (response.timed_out) {
            last_timed_out = true;
            last_problem = "request timed out";
        } else if (response.status == 401 || response.status == 403) {
            throw AuthFailure("backend rejected credentials (HTTP " + std::to_string(response.status) + ")");
        } else if (response.status >= 200 && response.status < 300) {
            std::string content = response_content(response.body);
            try {
                return parse_llm_response(content);
            } catch (const UnparseableResponse&) {
                return fallback_verdict(content);
            }
        } else if (response.status == 0 || response.status == 429 || response.status >= 500) {
            last_timed_out = false;
            last_problem = response.status == 0 ? "no response" : "HTTP " + std::to_string(response.status);
        } else {
            throw BackendUnavailable("backend returned HTTP " + std::to_string(response.status));
        }

        if (attempt < backend.max_retries) {
            // full jitter: uniform in [0, base * 2^attempt]
            auto cap = backend.backoff_base.count() * (std::int64_t{1} << std::min(attempt, 20));
            std::uniform_int_distribution<std::int64_t> dist(0, cap);
            std::chrono::milliseconds delay(dist(rng));
            if (hooks.sleep)
                hooks.sleep(delay);
            else
                std::this_thread::sleep_for(delay);
        }
    }
    std::string message = "backend unavailable after " + std::to_string(backend.max_retries + 1) + " attempts: " + last_problem;
    if (last_timed_out) throw Timeout(message);
    throw BackendUnavailable(message);
}

LlmVerdict mock_classify(const EmailDocument& doc, std::span<const BrandProfile> brands, const DetectorConfig& config) {
    auto flags = detect_flags(doc, brands, config);
    LlmVerdict v;
    v.confidence = heuristic_score(flags);
    v.verdict = v.confidence > 0.5 ? Label::scam : Label::legitimate;
    for (const auto& f : flags) v.red_flags.push_back({f.category, f.evidence});
    json raw = {{"verdict", std::string(to_string(v.verdict))}, {"confidence", v.confidence}};
    v.raw_response = raw.dump();
    return v;
}

RemoteGateway::RemoteGateway(BackendConfig backend, PromptTemplate tmpl, std::shared_ptr<Transport> transport,
                             RetryHooks hooks)
    : backend_(std::move(backend)), template_(std::move(tmpl)), transport_(std::move(transport)), hooks_(std::move(hooks)) {
    if (!backend_.valid()) throw ConfigError("invalid backend configuration");
    if (!transport_) throw ConfigError("remote gateway needs a transport");
}

LlmVerdict RemoteGateway::classify(const EmailDocument& doc) {
    {
        std::unique_lock lock(mutex_);
        slot_free_.wait(lock, [&] { return in_flight_ < backend_.max_concurrent_requests; });
        ++in_flight_;
    }
    struct Release {
        RemoteGateway& g;
        ~Release() {
            {
                std::lock_guard lock(g.mutex_);
                --g.in_flight_;
            }
            g.slot_free_.notify_one();
        }
    } release{*this};
    return classify_remote(doc, template_, backend_, *transport_, hooks_);
}

}  // namespace scamlens
