#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "scamlens/config_file.hpp"
#include "scamlens/labels.hpp"
#include "scamlens/llm_gateway.hpp"

namespace testing {

inline std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(SCAMLENS_FIXTURE_DIR) / name; }

inline std::string read_fixture(const std::string& name) { return scamlens::read_file(fixture(name)); }

// FNV-1a, used to pin fixture bytes.
inline std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

/// Replays canned responses in order; the last one repeats. Records every request.
class ScriptedTransport : public scamlens::Transport {
public:
    explicit ScriptedTransport(std::vector<scamlens::HttpResponse> script) : script_(std::move(script)) {}

    scamlens::HttpResponse send(const scamlens::HttpRequest& request) override {
        std::lock_guard lock(mutex_);
        requests_.push_back(request);
        std::size_t i = std::min(requests_.size() - 1, script_.size() - 1);
        return script_[i];
    }

    std::size_t attempts() const {
        std::lock_guard lock(mutex_);
        return requests_.size();
    }
    std::vector<scamlens::HttpRequest> requests() const {
        std::lock_guard lock(mutex_);
        return requests_;
    }

private:
    std::vector<scamlens::HttpResponse> script_;
    mutable std::mutex mutex_;
    std::vector<scamlens::HttpRequest> requests_;
};

/// Wraps a verdict object in a chat-completion envelope.
inline scamlens::HttpResponse chat_ok(const std::string& content) {
    nlohmann::json body = {{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}};
    return {200, body.dump(), false};
}

inline scamlens::HttpResponse status(int code) { return {code, "{}", false}; }
inline scamlens::HttpResponse timed_out() { return {0, "", true}; }

// Oracles. Deliberately naive: O(n^2) pair counting and plain loops.

inline double brute_force_auc(const std::vector<double>& scores, const std::vector<scamlens::Label>& truth) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (truth[i] != scamlens::Label::scam) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (truth[j] != scamlens::Label::legitimate) continue;
            ++pairs;
            if (scores[i] > scores[j])
                wins += 1.0;
            else if (scores[i] == scores[j])
                wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

struct CountOracle {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    double precision = 0, recall = 0, f1 = 0, accuracy = 0;
    double f1_counts = 0;  // 2tp / (2tp + fp + fn); equals f1 up to rounding
};

inline CountOracle count_oracle(const std::vector<scamlens::Label>& predicted, const std::vector<scamlens::Label>& truth) {
    using scamlens::Label;
    CountOracle o;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] == Label::scam && truth[i] == Label::scam) o.tp++;
        if (predicted[i] == Label::scam && truth[i] == Label::legitimate) o.fp++;
        if (predicted[i] == Label::legitimate && truth[i] == Label::scam) o.fn++;
        if (predicted[i] == Label::legitimate && truth[i] == Label::legitimate) o.tn++;
    }
    double tp = static_cast<double>(o.tp);
    if (o.tp + o.fp > 0) o.precision = tp / static_cast<double>(o.tp + o.fp);
    if (o.tp + o.fn > 0) o.recall = tp / static_cast<double>(o.tp + o.fn);
    if (o.precision + o.recall > 0) o.f1 = 2.0 * o.precision * o.recall / (o.precision + o.recall);
    if (o.tp + o.fp + o.fn > 0) o.f1_counts = 2.0 * tp / static_cast<double>(2 * o.tp + o.fp + o.fn);
    o.accuracy = static_cast<double>(o.tp + o.tn) / static_cast<double>(predicted.size());
    return o;
}

}  // namespace testing
