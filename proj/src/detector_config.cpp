#include <map>

#include "scamlens/config_file.hpp"
#include "scamlens/errors.hpp"
#include "scamlens/redflags.hpp"
#include "text_util.hpp"

namespace scamlens {

namespace {

constexpr std::array<std::string_view, kLinkRuleCount> kLinkRuleNames = {
    "off_brand", "glued_www", "ip_host", "typosquat", "brand_in_domain",
};

std::vector<BrandProfile> default_brands() {
    return {
        {"Rackspace", {"rackspace.com", "rackspace.co.uk"}},
        {"PayPal", {"paypal.com", "paypal.me"}},
        {"Microsoft", {"microsoft.com", "outlook.com", "live.com", "office.com", "office365.com"}},
        {"Google", {"google.com", "gmail.com", "youtube.com"}},
        {"Apple", {"apple.com", "icloud.com"}},
        {"Amazon", {"amazon.com", "amazon.co.uk", "amazonaws.com"}},
        {"Netflix", {"netflix.com"}},
        {"Bank of America", {"bankofamerica.com", "bofa.com"}},
        {"Wells Fargo", {"wellsfargo.com"}},
        {"Chase", {"chase.com", "jpmorganchase.com"}},
        {"DHL", {"dhl.com"}},
        {"FedEx", {"fedex.com"}},
        {"IRS", {"irs.gov"}},
        {"DocuSign", {"docusign.com", "docusign.net"}},
        {"Dropbox", {"dropbox.com"}},
        {"LinkedIn", {"linkedin.com"}},
        {"Facebook", {"facebook.com", "facebookmail.com", "meta.com"}},
    };
}

// `Name: domain, domain`
BrandProfile parse_brand(const KeyValueEntry& e) {
    auto colon = e.value.find(':');
    if (colon == std::string::npos) throw ConfigError("config line " + std::to_string(e.line) + ": brand needs `Name: domains`");
    BrandProfile brand;
    brand.brand_name = std::string(text::trim(std::string_view(e.value).substr(0, colon)));
    for (auto& d : split_list(std::string_view(e.value).substr(colon + 1), ',')) brand.legitimate_domains.insert(text::to_lower(d));
    if (brand.brand_name.empty() || brand.legitimate_domains.empty())
        throw ConfigError("config line " + std::to_string(e.line) + ": brand needs a name and at least one domain");
    return brand;
}

double parse_weight(const KeyValueEntry& e) {
    double w = parse_number(e);
    if (!(w > 0.0 && w <= 1.0)) throw ConfigError("config line " + std::to_string(e.line) + ": weight must be in (0, 1]");
    return w;
}

}  // namespace

DetectorConfig DetectorConfig::defaults() {
    DetectorConfig c;
    auto set = [&](FlagCategory cat, double w) { c.weights[static_cast<std::size_t>(cat)] = w; };
    set(FlagCategory::sender_brand_mismatch, 0.6);
    set(FlagCategory::suspicious_link, 0.6);
    set(FlagCategory::grammar_spelling, 0.3);
    set(FlagCategory::urgency_fear, 0.3);
    set(FlagCategory::unusual_request, 0.4);
    set(FlagCategory::generic_salutation, 0.2);
    set(FlagCategory::lack_of_personalization, 0.15);
    set(FlagCategory::sender_name_mismatch, 0.4);
    set(FlagCategory::generic_signoff, 0.2);
    set(FlagCategory::no_reply_instruction, 0.3);
    c.link_rule_weights.fill(0.6);

    c.brands = default_brands();
    c.urgency_phrases = {"suspended", "immediately", "deleted", "within 24 hours", "account will be closed", "urgent"};
    c.no_reply_phrases = {"please do not reply", "do not reply", "don't reply", "do not respond", "don't respond",
                          "not monitored", "no-reply"};
    c.unusual_request_phrases = {
        "click the link",        "click on the link",     "click here",            "verify your account",
        "remove restrictions",   "remove the restrictions", "remove restriction",  "confirm your password",
        "enter your password",   "provide your password", "update your payment",   "update your billing",
        "verify your identity",  "confirm your identity", "confirm your account",  "validate your account",
        "unlock your account",   "restore your access",   "login to verify",       "wire transfer",
        "gift card",             "processing fee",        "bank details",          "social security number",
    };
    c.generic_salutations = {"Dear Customer",      "Dear User",         "Dear Sir/Madam", "Valued Customer",
                             "Dear Sir or Madam",  "Dear Client",       "Dear Member",    "Dear Account Holder",
                             "Dear Email User",    "Dear Account User", "Hello Customer", "Dear Friend",
                             "Dear Beneficiary",   "Hello User"};
    c.signoff_team_words = {"team", "support", "department"};
    c.generic_name_words = {
        "dear", "hello", "hi", "greetings", "customer", "customers", "user", "users", "client", "clients", "member",
        "members", "valued", "sir", "madam", "friend", "there", "all", "everyone", "account", "holder", "subscriber",
        "beneficiary", "colleague", "online", "email", "e-mail", "mail", "webmail", "mailbox", "service", "services",
        "security", "billing", "technical", "tech", "help", "helpdesk", "desk", "center", "centre", "web", "it",
        "admin", "administrator", "administration", "management", "verification", "notification", "operations",
        "fraud", "prevention", "compliance", "system", "systems", "server", "webmaster", "team", "support",
        "department", "the", "of", "and", "for", "your", "our", "inc", "ltd", "llc", "corp", "corporation",
        "company", "group", "global", "international", "official", "accounts", "office",
    };
    c.grammar_base_verbs = {"suspend", "delete", "remove", "restrict", "send", "receive", "verify", "disable",
                            "deactivate", "terminate", "cancel", "detect", "confirm", "lock", "expire"};
    c.misspellings = {
        "recieve",  "recieved",  "acount",   "accout",   "adress",    "verifiy",    "verfy",     "suspention",
        "immediatly", "imediately", "securty", "passwrod", "pasword", "informations", "acess",    "bussiness",
        "confirmaton", "untill",  "wich",     "seperate", "occured",   "garantee",   "beneficary", "transfered",
        "sucessful", "succesful", "credentails", "paymnet", "valdiate", "suspeneded", "activty",  "verifcation",
    };
    return c;
}

bool apply_detector_key(const KeyValueEntry& e, DetectorConfig& c) {
    std::string_view key = e.key;
    if (key.starts_with("weight.")) {
        auto cat = parse_flag_category(key.substr(7));
        if (!cat) throw ConfigError("config line " + std::to_string(e.line) + ": unknown flag category " + e.key);
        c.weights[static_cast<std::size_t>(*cat)] = parse_weight(e);
        return true;
    }
    if (key.starts_with("link_weight.")) {
        auto rule = key.substr(12);
        for (std::size_t i = 0; i < kLinkRuleNames.size(); ++i) {
            if (rule == kLinkRuleNames[i]) {
                c.link_rule_weights[i] = parse_weight(e);
                return true;
            }
        }
        throw ConfigError("config line " + std::to_string(e.line) + ": unknown link rule " + e.key);
    }
    if (key == "min_urgency_hits") {
        long v = parse_integer(e);
        if (v < 1) throw ConfigError("config line " + std::to_string(e.line) + ": min_urgency_hits must be >= 1");
        c.min_urgency_hits = static_cast<int>(v);
        return true;
    }
    if (key == "typosquat_max_distance") {
        long v = parse_integer(e);
        if (v < 0) throw ConfigError("config line " + std::to_string(e.line) + ": distance must be >= 0");
        c.typosquat_max_distance = static_cast<std::size_t>(v);
        return true;
    }
    if (key == "brand") {
        if (!e.append) c.brands.clear();
        c.brands.push_back(parse_brand(e));
        return true;
    }
    if (key.starts_with("lexicon.")) {
        static const std::map<std::string_view, std::vector<std::string> DetectorConfig::*> lists = {
            {"urgency", &DetectorConfig::urgency_phrases},
            {"no_reply", &DetectorConfig::no_reply_phrases},
            {"unusual_request", &DetectorConfig::unusual_request_phrases},
            {"generic_salutation", &DetectorConfig::generic_salutations},
            {"signoff_team_words", &DetectorConfig::signoff_team_words},
            {"generic_name_words", &DetectorConfig::generic_name_words},
            {"grammar_base_verbs", &DetectorConfig::grammar_base_verbs},
            {"misspellings", &DetectorConfig::misspellings},
        };
        auto it = lists.find(key.substr(8));
        if (it == lists.end()) throw ConfigError("config line " + std::to_string(e.line) + ": unknown lexicon " + e.key);
        auto& list = c.*(it->second);
        if (!e.append) list.clear();
        for (auto& item : split_list(e.value, '|')) list.push_back(std::move(item));
        if (list.empty()) throw ConfigError("config line " + std::to_string(e.line) + ": lexicon must not be empty");
        return true;
    }
    return false;
}

DetectorConfig parse_detector_config(std::string_view text) {
    DetectorConfig c = DetectorConfig::defaults();
    const KeyValueFile file = KeyValueFile::parse(text);
    for (const auto& e : file.entries()) {
        if (!apply_detector_key(e, c)) throw ConfigError("config line " + std::to_string(e.line) + ": unknown key " + e.key);
    }
    return c;
}

DetectorConfig load_detector_config(const std::filesystem::path& path) { return parse_detector_config(read_file(path)); }

}  // namespace scamlens
