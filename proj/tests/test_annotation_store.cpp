#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include "scamlens/annotation_store.hpp"
#include "scamlens/errors.hpp"
#include "support.hpp"

using namespace scamlens;
using std::chrono::system_clock;

namespace {

struct TempLog {
    std::filesystem::path path;
    explicit TempLog(const std::string& name) : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove(path);
    }
    ~TempLog() { std::filesystem::remove(path); }
};

Corpus two_examples() {
    Corpus c;
    c.examples.push_back({"e1", std::string("one"), {}, {}, Consensus::disputed});
    c.examples.push_back({"e2", std::string("two"), {}, {{"annA", Label::scam}, {"annB", Label::scam}}, Consensus::scam});
    return c;
}

AnnotationStore::Clock fixed_clock() {
    return [] { return system_clock::time_point(std::chrono::milliseconds(1'700'000'000'123)); };
}

}  // namespace

TEST_CASE("timestamps format as UTC with milliseconds and parse back") {
    system_clock::time_point t(std::chrono::milliseconds(1'700'000'000'123));
    CHECK(format_timestamp(t) == "2023-11-14T22:13:20.123Z");
    CHECK(parse_timestamp("2023-11-14T22:13:20.123Z") == t);
    CHECK_FALSE(parse_timestamp("yesterday").has_value());
    CHECK_FALSE(parse_timestamp("2023-11-14T22:13:20.123Z trailing").has_value());
}

TEST_CASE("first label gets seq 1 and updates consensus") {
    AnnotationStore store(two_examples(), std::nullopt, fixed_clock());
    CHECK(store.consensus("e1") == Consensus::disputed);
    auto e = store.record_label("e1", "annA", Label::scam, "looks off");
    CHECK(e.seq == 1);
    CHECK(e.note == "looks off");
    CHECK(format_timestamp(e.timestamp) == "2023-11-14T22:13:20.123Z");
    CHECK(store.consensus("e1") == Consensus::scam);
}

TEST_CASE("last write wins per example and annotator") {
    AnnotationStore store(two_examples());
    store.record_label("e1", "annA", Label::scam);
    auto second = store.record_label("e1", "annA", Label::legitimate);
    CHECK(second.seq == 2);
    auto labels = store.effective_labels("e1");
    REQUIRE(labels.size() == 1);
    CHECK(labels[0].label == Label::legitimate);
    CHECK(store.consensus("e1") == Consensus::legitimate);

    // corpus annotations are the starting point and can be overridden
    store.record_label("e2", "annB", Label::legitimate);
    CHECK(store.consensus("e2") == Consensus::disputed);
}

TEST_CASE("unknown examples are rejected") {
    AnnotationStore store(two_examples());
    CHECK_THROWS_AS(store.record_label("nope", "annA", Label::scam), UnknownExample);
    CHECK(store.events().empty());
    store.add_known_example("batch-7");
    CHECK(store.record_label("batch-7", "annA", Label::scam).seq == 1);
}

TEST_CASE("the log replays to the same state") {
    TempLog log("scamlens_store_replay.jsonl");
    LabelState before;
    std::vector<AnnotationEvent> events;
    {
        AnnotationStore store(two_examples(), log.path);
        store.record_label("e1", "annA", Label::scam);
        store.record_label("e1", "annB", Label::legitimate, "newsletter");
        store.record_label("e1", "annA", Label::legitimate);
        before = store.state();
        events = store.events();
    }
    AnnotationStore reopened(two_examples(), log.path);
    CHECK(reopened.state() == before);
    CHECK(reopened.events() == events);
    CHECK(AnnotationStore::replay(two_examples(), events) == before);
    // numbering continues after a reopen
    CHECK(reopened.record_label("e2", "annC", Label::scam).seq == 4);
}

TEST_CASE("unwritable log raises StoreWriteFailure") {
    CHECK_THROWS_AS(AnnotationStore(two_examples(), std::filesystem::path("/nonexistent-dir/labels.jsonl")), StoreWriteFailure);
}

TEST_CASE("corrupt logs are reported with a line number") {
    TempLog log("scamlens_store_corrupt.jsonl");
    {
        std::ofstream f(log.path);
        f << serialize_event({1, "e1", "a", Label::scam, std::nullopt, {}}) << "\n{oops\n";
    }
    try {
        AnnotationStore store(two_examples(), log.path);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }
}

TEST_CASE("export carries the effective labels in corpus format") {
    AnnotationStore store(two_examples());
    store.record_label("e1", "annA", Label::scam);
    store.record_label("e1", "annB", Label::scam);
    auto exported = parse_corpus(serialize_corpus(store.export_corpus()));
    REQUIRE(exported.examples.size() == 2);
    CHECK(exported.examples[0].consensus == Consensus::scam);
    CHECK(exported.examples[0].annotations.size() == 2);
}

TEST_CASE("concurrent writers get distinct, dense sequence numbers") {
    AnnotationStore store(two_examples());
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t) {
        threads.emplace_back([&, t] {
            for (int i = 0; i < 25; ++i) store.record_label("e1", "ann" + std::to_string(t), i % 2 ? Label::scam : Label::legitimate);
        });
    }
    for (auto& th : threads) th.join();
    auto events = store.events();
    REQUIRE(events.size() == 100);
    for (std::size_t i = 0; i < events.size(); ++i) CHECK(events[i].seq == i + 1);
    CHECK(AnnotationStore::replay(two_examples(), events) == store.state());
}
