#pragma once

// Append-only label log. Each record_label call writes one JSON line before
// touching memory, so reopening the log reproduces the in-memory state.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "scamlens/corpus.hpp"
#include "scamlens/labels.hpp"

namespace scamlens {

struct AnnotationEvent {
    std::uint64_t seq = 0;
    std::string example_id;
    std::string annotator_id;
    Label label = Label::legitimate;
    std::optional<std::string> note;
    std::chrono::system_clock::time_point timestamp;  // millisecond precision

    bool operator==(const AnnotationEvent&) const = default;
};

/// example id -> annotator id -> effective label
using LabelState = std::map<std::string, std::map<std::string, Label>, std::less<>>;

std::string format_timestamp(std::chrono::system_clock::time_point t);
std::optional<std::chrono::system_clock::time_point> parse_timestamp(std::string_view s);

std::string serialize_event(const AnnotationEvent& e);
AnnotationEvent parse_event(std::string_view line);

class AnnotationStore {
public:
    using Clock = std::function<std::chrono::system_clock::time_point()>;

    /// Starts from the corpus annotations and replays `log_path` if it exists.
    /// Without a log path events live in memory only.
    explicit AnnotationStore(Corpus base, std::optional<std::filesystem::path> log_path = std::nullopt, Clock clock = {});

    /// Ids outside the corpus (e.g. batch-classified messages) that may be labeled.
    void add_known_example(std::string id);
    bool is_known(std::string_view id) const;

    AnnotationEvent record_label(std::string_view example_id, std::string_view annotator_id, Label label,
                                 std::optional<std::string> note = std::nullopt);

    std::vector<AnnotatorLabel> effective_labels(std::string_view example_id) const;
    Consensus consensus(std::string_view example_id) const;
    LabelState state() const;
    std::vector<AnnotationEvent> events() const;

    /// The base corpus with every example's annotations replaced by the effective labels.
    Corpus export_corpus() const;

    /// Rebuilds the label state from a base corpus and an event list.
    static LabelState replay(const Corpus& base, const std::vector<AnnotationEvent>& events);
    static std::vector<AnnotationEvent> read_log(const std::filesystem::path& path);

private:
    void apply(const AnnotationEvent& e);

    Corpus base_;
    std::optional<std::filesystem::path> log_path_;
    Clock clock_;
    std::ofstream log_;

    mutable std::shared_mutex mutex_;
    std::set<std::string, std::less<>> known_;
    LabelState state_;
    std::vector<AnnotationEvent> events_;
};

}  // namespace scamlens
