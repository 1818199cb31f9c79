#include <doctest.h>

#include <algorithm>
#include <set>

#include "scamlens/email.hpp"
#include "scamlens/errors.hpp"
#include "scamlens/redflags.hpp"
#include "support.hpp"

using namespace scamlens;

namespace {

std::set<FlagCategory> categories(const std::vector<RedFlag>& flags) {
    std::set<FlagCategory> out;
    for (const auto& f : flags) out.insert(f.category);
    return out;
}

const RedFlag* find(const std::vector<RedFlag>& flags, FlagCategory c, std::string_view evidence) {
    auto it = std::find_if(flags.begin(), flags.end(), [&](const RedFlag& f) { return f.category == c && f.evidence == evidence; });
    return it == flags.end() ? nullptr : &*it;
}

const BrandProfile& rackspace() {
    static const BrandProfile b{"Rackspace", {"rackspace.com"}};
    return b;
}

ExtractedUrl url_for(std::string_view text) {
    auto urls = extract_urls(text);
    REQUIRE(urls.size() == 1);
    return urls[0];
}

}  // namespace

TEST_CASE("phishing fixture raises the expected flags") {
    auto doc = parse_email(testing::read_fixture("rackspace_phish.eml"));
    auto flags = detect_flags(doc, DetectorConfig::defaults());
    auto cats = categories(flags);
    for (auto c : {FlagCategory::sender_brand_mismatch, FlagCategory::suspicious_link, FlagCategory::grammar_spelling,
                   FlagCategory::generic_salutation, FlagCategory::generic_signoff, FlagCategory::sender_name_mismatch})
        CHECK(cats.count(c) == 1);

    CHECK(find(flags, FlagCategory::sender_brand_mismatch, "inha.ac.kr"));
    CHECK(find(flags, FlagCategory::suspicious_link, "wwwthefitdollar.com/gabbyr"));
    CHECK(find(flags, FlagCategory::grammar_spelling, "have suspend"));
    CHECK(find(flags, FlagCategory::grammar_spelling, "access.Some"));
    CHECK(find(flags, FlagCategory::generic_salutation, "Dear Customer"));
    CHECK(find(flags, FlagCategory::generic_signoff, "Online Email Team"));
    CHECK(find(flags, FlagCategory::sender_name_mismatch, "Rackspace Support"));
    CHECK(find(flags, FlagCategory::no_reply_instruction, "Please do not reply"));

    // offsets point at the evidence
    for (const auto& f : flags) {
        if (f.offset) CHECK(doc.body.substr(*f.offset, f.evidence.size()) == f.evidence);
    }
}

TEST_CASE("clean and empty inputs raise nothing") {
    CHECK(detect_flags(parse_email(testing::read_fixture("clean.eml")), DetectorConfig::defaults()).empty());
    CHECK(detect_flags(EmailDocument{}, DetectorConfig::defaults()).empty());
    CHECK(detect_flags(parse_plaintext(""), DetectorConfig::defaults()).empty());
}

TEST_CASE("a lone generic salutation raises exactly two categories") {
    auto flags = detect_flags(parse_plaintext("Dear Customer,"), DetectorConfig::defaults());
    REQUIRE(flags.size() == 2);
    CHECK(flags[0].category == FlagCategory::generic_salutation);
    CHECK(flags[1].category == FlagCategory::lack_of_personalization);
}

TEST_CASE("output is sorted by category then offset") {
    auto flags = detect_flags(parse_email(testing::read_fixture("rackspace_phish.eml")), DetectorConfig::defaults());
    CHECK(std::is_sorted(flags.begin(), flags.end(), [](const RedFlag& a, const RedFlag& b) {
        if (a.category != b.category) return a.category < b.category;
        return a.offset < b.offset;
    }));
}

TEST_CASE("link_suspicion rule table") {
    auto cfg = DetectorConfig::defaults();
    auto glued = link_suspicion(url_for("wwwthefitdollar.com/gabbyr"), &rackspace(), cfg);
    REQUIRE(glued.has_value());
    CHECK(glued->evidence == "wwwthefitdollar.com/gabbyr");
    CHECK(glued->category == FlagCategory::suspicious_link);

    CHECK_FALSE(link_suspicion(url_for("https://rackspace.com/login"), &rackspace(), cfg).has_value());
    CHECK_FALSE(link_suspicion(url_for("https://login.rackspace.com/"), &rackspace(), cfg).has_value());
    CHECK(link_suspicion(url_for("http://rackspace-login.example/"), &rackspace(), cfg).has_value());
    CHECK(link_suspicion(url_for("http://10.0.0.7/reset"), nullptr, cfg).has_value());
    CHECK(link_suspicion(url_for("http://rackspaces.com/"), &rackspace(), cfg).has_value());
    // without a claimed brand an unrelated domain is fine
    CHECK_FALSE(link_suspicion(url_for("https://example.org/docs"), nullptr, cfg).has_value());
    // but a one-edit lookalike of a known brand domain is not
    CHECK(link_suspicion(url_for("https://paypa1.com/"), nullptr, cfg).has_value());
}

TEST_CASE("link weight is the max of the fired sub-rules") {
    auto cfg = DetectorConfig::defaults();
    cfg.link_rule_weights = {0.5, 0.9, 0.6, 0.6, 0.6};
    auto flag = link_suspicion(url_for("wwwthefitdollar.com/gabbyr"), &rackspace(), cfg);
    REQUIRE(flag.has_value());
    CHECK(flag->weight == doctest::Approx(0.9));
}

TEST_CASE("grammar_scan rules") {
    auto r1 = grammar_scan("we have suspend your login access");
    REQUIRE(r1.size() == 1);
    CHECK(r1[0].evidence == "have suspend");
    CHECK(r1[0].offset == 3u);

    auto r2 = grammar_scan("your login access.Some");
    REQUIRE(r2.size() == 1);
    CHECK(r2[0].evidence == "access.Some");

    CHECK(grammar_scan("We have suspended your account.").empty());
    CHECK(grammar_scan("Visit example.com or mail a.b@c.org, e.g. today.").empty());

    auto r3 = grammar_scan("please send the the file");
    REQUIRE(r3.size() == 1);
    CHECK(r3[0].evidence == "the the");

    auto r4 = grammar_scan("verify your acount");
    REQUIRE(r4.size() == 1);
    CHECK(r4[0].evidence == "acount");
}

TEST_CASE("urgency_scan needs two distinct phrases") {
    auto lex = DetectorConfig::defaults().urgency_phrases;
    auto hit = urgency_scan("your login access has been suspended and your emails may have been deleted", lex);
    REQUIRE(hit.has_value());
    CHECK(hit->evidence == "suspended");
    CHECK_FALSE(urgency_scan("weekly newsletter", lex).has_value());
    CHECK_FALSE(urgency_scan("your account was suspended", lex).has_value());
    CHECK_FALSE(urgency_scan("suspended, suspended, suspended", lex).has_value());
    CHECK(urgency_scan("your account was suspended", lex, 1).has_value());
}

TEST_CASE("heuristic_score is a noisy-or over category maxima") {
    CHECK(heuristic_score({}) == 0.0);
    std::vector<RedFlag> one{{FlagCategory::suspicious_link, "x", std::nullopt, 1.0}};
    CHECK(heuristic_score(one) == 1.0);
    std::vector<RedFlag> two{{FlagCategory::unusual_request, "a", 1, 0.4}, {FlagCategory::urgency_fear, "b", 2, 0.3}};
    CHECK(heuristic_score(two) == doctest::Approx(1.0 - 0.6 * 0.7).epsilon(1e-12));
    CHECK(std::abs(heuristic_score(two) - 0.58) < 1e-12);

    auto dup = two;
    dup.push_back({FlagCategory::urgency_fear, "c", 3, 0.1});
    CHECK(heuristic_score(dup) == heuristic_score(two));
}

TEST_CASE("brand attribution prefers the display name") {
    auto doc = parse_email("From: \"PayPal Service\" <x@evil.example>\nSubject: Your Amazon order\n\nNetflix Netflix");
    auto cfg = DetectorConfig::defaults();
    const BrandProfile* b = attribute_brand(doc, cfg.brands);
    REQUIRE(b);
    CHECK(b->brand_name == "PayPal");

    auto by_subject = parse_email("From: x@evil.example\nSubject: Your Amazon order\n\nNetflix Netflix");
    REQUIRE(attribute_brand(by_subject, cfg.brands));
    CHECK(attribute_brand(by_subject, cfg.brands)->brand_name == "Amazon");

    auto by_body = parse_email("From: x@evil.example\nSubject: hi\n\nNetflix renewal, Netflix billing, Amazon");
    REQUIRE(attribute_brand(by_body, cfg.brands));
    CHECK(attribute_brand(by_body, cfg.brands)->brand_name == "Netflix");
}

TEST_CASE("mail from the brand's own domain is not a mismatch") {
    auto doc = parse_email("From: \"Rackspace Support\" <support@rackspace.com>\n\nHello Jane,\nYour invoice is ready.\n");
    auto cats = categories(detect_flags(doc, DetectorConfig::defaults()));
    CHECK(cats.count(FlagCategory::sender_brand_mismatch) == 0);
    CHECK(cats.count(FlagCategory::sender_name_mismatch) == 0);
}

TEST_CASE("generic sign-off needs a team word and no person or contact") {
    auto cfg = DetectorConfig::defaults();
    auto cats = [&](const char* body) { return categories(detect_flags(parse_plaintext(body), cfg)); };
    CHECK(cats("Hi Ann,\nok\n\nRegards,\nSupport Team").count(FlagCategory::generic_signoff) == 1);
    CHECK(cats("Hi Ann,\nok\n\nRegards,\nJane Miller, Support Team").count(FlagCategory::generic_signoff) == 0);
    CHECK(cats("Hi Ann,\nok\n\nRegards,\nSupport Team, call 555-123-4567").count(FlagCategory::generic_signoff) == 0);
    CHECK(cats("Hi Ann,\nok\n\nRegards,\nJane").count(FlagCategory::generic_signoff) == 0);
}

TEST_CASE("detector configuration file") {
    auto cfg = parse_detector_config(
        "# tuned\n"
        "weight.urgency_fear = 0.5\n"
        "min_urgency_hits = 1\n"
        "lexicon.urgency = act now | final notice\n"
        "brand += Contoso: contoso.com, contoso.net\n");
    CHECK(cfg.weight(FlagCategory::urgency_fear) == 0.5);
    CHECK(cfg.min_urgency_hits == 1);
    CHECK(cfg.urgency_phrases == std::vector<std::string>{"act now", "final notice"});
    auto it = std::find_if(cfg.brands.begin(), cfg.brands.end(), [](const BrandProfile& b) { return b.brand_name == "Contoso"; });
    REQUIRE(it != cfg.brands.end());
    CHECK(it->legitimate_domains == std::set<std::string>{"contoso.com", "contoso.net"});
    CHECK(cfg.brands.size() == DetectorConfig::defaults().brands.size() + 1);

    CHECK_THROWS_AS(parse_detector_config("weight.nonsense = 0.2"), ConfigError);
    CHECK_THROWS_AS(parse_detector_config("weight.urgency_fear = 1.5"), ConfigError);
    CHECK_THROWS_AS(parse_detector_config("no equals sign"), ConfigError);
}

TEST_CASE("flag category names round-trip") {
    for (auto c : kAllFlagCategories) CHECK(parse_flag_category(to_string(c)) == c);
    CHECK(parse_flag_category("Suspicious Link") == FlagCategory::suspicious_link);
    CHECK_FALSE(parse_flag_category("made_up").has_value());
}
