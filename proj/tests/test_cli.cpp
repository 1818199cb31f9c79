#include <doctest.h>

#include <filesystem>
#include <set>
#include <sstream>

#include "scamlens/cli.hpp"
#include "scamlens/config_file.hpp"
#include "scamlens/service.hpp"
#include "support.hpp"

using namespace scamlens;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path temp(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove(p);
    return p;
}

std::set<std::pair<std::string, std::string>> flag_set(const Json& verdict) {
    std::set<std::pair<std::string, std::string>> s;
    for (const auto& f : verdict["flags"]) s.emplace(f["category"].get<std::string>(), f["evidence"].get<std::string>());
    return s;
}

}  // namespace

TEST_CASE("scan exit codes") {
    auto scam = run({"scan", testing::fixture("rackspace_phish.eml").string()});
    CHECK(scam.code == 2);
    CHECK(scam.out.find("scam") != std::string::npos);
    CHECK(scam.out.find("suspicious_link") != std::string::npos);

    auto clean = run({"scan", testing::fixture("clean.eml").string()});
    CHECK(clean.code == 0);
    CHECK(clean.out.find("legitimate") != std::string::npos);

    auto missing = run({"scan", "/does/not/exist.eml"});
    CHECK(missing.code == 1);
    CHECK(missing.err.find("error:") != std::string::npos);
}

TEST_CASE("scan --json agrees with POST /classify") {
    auto scan = run({"scan", testing::fixture("rackspace_phish.eml").string(), "--json"});
    REQUIRE(scan.code == 2);
    auto cli = Json::parse(scan.out);

    Service service(ServiceOptions{});
    auto http = Json::parse(service.classify(dump({{"raw_email", testing::read_fixture("rackspace_phish.eml")}})).body);
    CHECK(cli["decision"] == http["decision"]);
    CHECK(std::abs(cli["confidence"].get<double>() - http["confidence"].get<double>()) < 1e-12);
    CHECK(flag_set(cli) == flag_set(http));
}

TEST_CASE("scan --threshold and --config") {
    CHECK(run({"scan", testing::fixture("rackspace_phish.eml").string(), "--threshold", "0.999"}).code == 0);
    CHECK(run({"scan", testing::fixture("rackspace_phish.eml").string(), "--config", testing::fixture("scamlens.conf").string()}).code == 2);
    CHECK(run({"scan", testing::fixture("rackspace_phish.eml").string(), "--threshold", "7"}).code == 1);
}

TEST_CASE("eval --json equals evaluate()") {
    auto res = run({"eval", "--corpus", testing::fixture("synthetic.corpus").string(), "--json"});
    REQUIRE(res.code == 0);
    auto cli = Json::parse(res.out);

    auto corpus = load_corpus(testing::fixture("synthetic.corpus"));
    Pipeline p{PipelineConfig{}};
    std::vector<double> scores;
    std::vector<Label> truth;
    for (const auto& ex : corpus.examples) {
        auto label = as_label(ex.consensus);
        if (!label) continue;
        scores.push_back(p.classify(ex.document()).confidence);
        truth.push_back(*label);
    }
    CHECK(cli == to_json(evaluate(scores, truth, 0.5)));
}

TEST_CASE("batch writes a score cache that eval can reuse") {
    auto cache = temp("scamlens_cli_scores.jsonl");
    auto corpus = testing::fixture("synthetic.corpus").string();
    auto batch = run({"batch", "--corpus", corpus, "--scores-out", cache.string()});
    REQUIRE(batch.code == 0);
    CHECK(batch.out.find("syn-s01\tscam\t") != std::string::npos);
    CHECK(load_score_cache(cache).size() == 21);

    auto live = run({"eval", "--corpus", corpus, "--json"});
    auto cached = run({"eval", "--corpus", corpus, "--scores", cache.string(), "--json"});
    CHECK(cached.code == 0);
    CHECK(Json::parse(live.out) == Json::parse(cached.out));
    std::filesystem::remove(cache);
}

TEST_CASE("eval writes a false-positive report") {
    auto md = temp("scamlens_cli_fp.md");
    auto res = run({"eval", "--corpus", testing::fixture("synthetic.corpus").string(), "--threshold", "0.1", "--fp-report", md.string()});
    CHECK(res.code == 0);
    auto text = read_file(md);
    CHECK(text.find("# False positives") != std::string::npos);
    CHECK(text.find("## syn-l10") != std::string::npos);
    std::filesystem::remove(md);
}

TEST_CASE("sweep and tune") {
    auto corpus = testing::fixture("synthetic.corpus").string();
    auto sweep = run({"sweep", "--corpus", corpus, "--grid", "0.1,0.5,0.9", "--json"});
    REQUIRE(sweep.code == 0);
    CHECK(Json::parse(sweep.out)["points"].size() == 3);
    CHECK(run({"sweep", "--corpus", corpus, "--grid", "0.5,0.1"}).code == 1);

    auto tune = run({"tune", "--corpus", corpus, "--json"});
    REQUIRE(tune.code == 0);
    auto j = Json::parse(tune.out);
    CHECK(j["report"]["f1"] == 1.0);
    CHECK(tune.out == run({"tune", "--corpus", corpus, "--json"}).out);

    CHECK(run({"tune", "--corpus", corpus, "--backend", "remote"}).code == 1);
}

TEST_CASE("export-labels applies the label log") {
    auto log = temp("scamlens_cli_labels.jsonl");
    {
        ServiceOptions o;
        o.corpus = load_corpus(testing::fixture("synthetic.corpus"));
        o.label_log = log;
        Service service(o);
        REQUIRE(service.post_label(R"({"example_id":"syn-d01","annotator_id":"ann_c","label":"scam"})").status == 200);
    }
    auto res = run({"export-labels", "--corpus", testing::fixture("synthetic.corpus").string(), "--labels-log", log.string()});
    REQUIRE(res.code == 0);
    CHECK(parse_corpus(res.out).find("syn-d01")->consensus == Consensus::scam);
    std::filesystem::remove(log);
}

TEST_CASE("usage errors exit 1") {
    CHECK(run({}).code == 1);
    CHECK(run({"frobnicate"}).code == 1);
    CHECK(run({"eval"}).code == 1);
    CHECK(run({"scan", testing::fixture("clean.eml").string(), "--backend", "carrier"}).code == 1);
    CHECK(run({"--help"}).code == 0);
}
