#include "scamlens/annotation_store.hpp"

#include <cstdio>
#include <ctime>
#include <mutex>

#include <json.hpp>

#include "scamlens/config_file.hpp"
#include "scamlens/errors.hpp"
#include "text_util.hpp"

namespace scamlens {

using nlohmann::json;
using std::chrono::system_clock;

std::string format_timestamp(system_clock::time_point t) {
    auto ms = std::chrono::floor<std::chrono::milliseconds>(t).time_since_epoch().count();
    auto secs = static_cast<std::time_t>(ms >= 0 ? ms / 1000 : (ms - 999) / 1000);
    int frac = static_cast<int>(ms - static_cast<long long>(secs) * 1000);
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[96];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                  tm.tm_hour, tm.tm_min, tm.tm_sec, frac);
    return buf;
}

std::optional<system_clock::time_point> parse_timestamp(std::string_view s) {
    std::tm tm{};
    int ms = 0, consumed = 0;
    std::string str(s);
    if (std::sscanf(str.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d.%3dZ%n", &tm.tm_year, &tm.tm_mon, &tm.tm_mday, &tm.tm_hour,
                    &tm.tm_min, &tm.tm_sec, &ms, &consumed) != 7 ||
        static_cast<std::size_t>(consumed) != str.size())
        return std::nullopt;
    tm.tm_year -= 1900;
    tm.tm_mon -= 1;
    std::time_t secs = timegm(&tm);
    return system_clock::time_point(std::chrono::seconds(secs)) + std::chrono::milliseconds(ms);
}

std::string serialize_event(const AnnotationEvent& e) {
    json obj = {{"seq", e.seq},
                {"example_id", e.example_id},
                {"annotator_id", e.annotator_id},
                {"label", std::string(to_string(e.label))},
                {"timestamp", format_timestamp(e.timestamp)}};
    if (e.note) obj["note"] = *e.note;
    return obj.dump(-1, ' ', false, json::error_handler_t::replace);
}

AnnotationEvent parse_event(std::string_view line) {
    json obj = json::parse(line, nullptr, false);
    auto str = [&](const char* key) -> std::string {
        if (!obj.contains(key) || !obj[key].is_string()) throw Error(std::string("label event missing `") + key + "`");
        return obj[key].get<std::string>();
    };
    if (obj.is_discarded() || !obj.is_object()) throw Error("label event is not a JSON object");
    AnnotationEvent e;
    if (!obj.contains("seq") || !obj["seq"].is_number_unsigned()) throw Error("label event missing `seq`");
    e.seq = obj["seq"].get<std::uint64_t>();
    e.example_id = str("example_id");
    e.annotator_id = str("annotator_id");
    auto label = parse_label(str("label"));
    if (!label) throw Error("label event has an unknown label");
    e.label = *label;
    auto ts = parse_timestamp(str("timestamp"));
    if (!ts) throw Error("label event has a malformed timestamp");
    e.timestamp = *ts;
    if (obj.contains("note") && obj["note"].is_string()) e.note = obj["note"].get<std::string>();
    return e;
}

AnnotationStore::AnnotationStore(Corpus base, std::optional<std::filesystem::path> log_path, Clock clock)
    : base_(std::move(base)), log_path_(std::move(log_path)), clock_(std::move(clock)) {
    if (!clock_) clock_ = [] { return system_clock::now(); };
    for (const auto& ex : base_.examples) {
        known_.insert(ex.id);
        auto& labels = state_[ex.id];
        for (const auto& a : ex.annotations) labels[a.annotator_id] = a.label;
    }
    if (!log_path_) return;
    if (std::filesystem::exists(*log_path_)) {
        for (auto& e : read_log(*log_path_)) {
            known_.insert(e.example_id);
            apply(e);
        }
    }
    log_.open(*log_path_, std::ios::binary | std::ios::app);
    if (!log_) throw StoreWriteFailure("cannot open label log " + log_path_->string());
}

std::vector<AnnotationEvent> AnnotationStore::read_log(const std::filesystem::path& path) {
    std::vector<AnnotationEvent> events;
    std::size_t line_no = 0;
    std::uint64_t last_seq = 0;
    const std::string content = read_file(path);
    for (const auto& line : text::split_lines(content)) {
        ++line_no;
        if (text::trim(line.text).empty()) continue;
        try {
            events.push_back(parse_event(line.text));
        } catch (const Error& ex) {
            throw Error(path.string() + ":" + std::to_string(line_no) + ": " + ex.what());
        }
        if (events.back().seq <= last_seq)
            throw Error(path.string() + ":" + std::to_string(line_no) + ": seq is not increasing");
        last_seq = events.back().seq;
    }
    return events;
}

LabelState AnnotationStore::replay(const Corpus& base, const std::vector<AnnotationEvent>& events) {
    LabelState state;
    for (const auto& ex : base.examples) {
        auto& labels = state[ex.id];
        for (const auto& a : ex.annotations) labels[a.annotator_id] = a.label;
    }
    for (const auto& e : events) state[e.example_id][e.annotator_id] = e.label;
    return state;
}

void AnnotationStore::apply(const AnnotationEvent& e) {
    state_[e.example_id][e.annotator_id] = e.label;
    events_.push_back(e);
}

void AnnotationStore::add_known_example(std::string id) {
    std::unique_lock lock(mutex_);
    known_.insert(std::move(id));
}

bool AnnotationStore::is_known(std::string_view id) const {
    std::shared_lock lock(mutex_);
    return known_.find(id) != known_.end();
}

AnnotationEvent AnnotationStore::record_label(std::string_view example_id, std::string_view annotator_id, Label label,
                                              std::optional<std::string> note) {
    std::unique_lock lock(mutex_);
    if (known_.find(example_id) == known_.end()) throw UnknownExample(std::string(example_id));
    if (annotator_id.empty()) throw Error("annotator_id must not be empty");

    AnnotationEvent e;
    e.seq = events_.empty() ? 1 : events_.back().seq + 1;
    e.example_id = example_id;
    e.annotator_id = annotator_id;
    e.label = label;
    e.note = std::move(note);
    e.timestamp = std::chrono::floor<std::chrono::milliseconds>(clock_());

    if (log_path_) {
        log_ << serialize_event(e) << '\n';
        log_.flush();
        if (!log_) {
            log_.clear();
            throw StoreWriteFailure("cannot append to label log " + log_path_->string());
        }
    }
    apply(e);
    return e;
}

std::vector<AnnotatorLabel> AnnotationStore::effective_labels(std::string_view example_id) const {
    std::shared_lock lock(mutex_);
    std::vector<AnnotatorLabel> out;
    if (auto it = state_.find(example_id); it != state_.end()) {
        for (const auto& [annotator, label] : it->second) out.push_back({annotator, label});
    }
    return out;
}

Consensus AnnotationStore::consensus(std::string_view example_id) const { return aggregate_labels(effective_labels(example_id)); }

LabelState AnnotationStore::state() const {
    std::shared_lock lock(mutex_);
    return state_;
}

std::vector<AnnotationEvent> AnnotationStore::events() const {
    std::shared_lock lock(mutex_);
    return events_;
}

Corpus AnnotationStore::export_corpus() const {
    std::shared_lock lock(mutex_);
    Corpus out = base_;
    for (auto& ex : out.examples) {
        ex.annotations.clear();
        if (auto it = state_.find(ex.id); it != state_.end()) {
            for (const auto& [annotator, label] : it->second) ex.annotations.push_back({annotator, label});
        }
        ex.consensus = aggregate_labels(ex.annotations);
    }
    return out;
}

}  // namespace scamlens
