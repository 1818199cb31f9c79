#include "scamlens/redflags.hpp"

#include <algorithm>
#include <map>

#include "text_util.hpp"

namespace scamlens {

namespace {

constexpr std::array<std::string_view, kFlagCategoryCount> kCategoryNames = {
    "sender_brand_mismatch", "sender_name_mismatch", "suspicious_link",    "grammar_spelling",
    "urgency_fear",          "unusual_request",      "generic_salutation", "generic_signoff",
    "no_reply_instruction",  "lack_of_personalization",
};

struct Word {
    std::string_view text;
    std::size_t offset;
};

std::vector<Word> words_of(std::string_view s) {
    std::vector<Word> words;
    std::size_t i = 0;
    while (i < s.size()) {
        if (!text::is_alpha(s[i])) {
            ++i;
            continue;
        }
        std::size_t start = i;
        while (i < s.size() && (text::is_alpha(s[i]) || (s[i] == '\'' && i + 1 < s.size() && text::is_alpha(s[i + 1]))))
            ++i;
        words.push_back({s.substr(start, i - start), start});
    }
    return words;
}

bool contains_ci(std::span<const std::string> list, std::string_view word) {
    return std::any_of(list.begin(), list.end(), [&](const std::string& w) { return text::iequals(w, word); });
}

bool mentions_brand(std::string_view s, const BrandProfile& brand) {
    return text::find_phrase(s, brand.brand_name) != std::string_view::npos;
}

std::size_t count_mentions(std::string_view s, const BrandProfile& brand) {
    std::size_t n = 0;
    for (std::size_t pos = text::find_phrase(s, brand.brand_name); pos != std::string_view::npos;
         pos = text::find_phrase(s, brand.brand_name, pos + brand.brand_name.size()))
        ++n;
    return n;
}

bool is_brand_word(std::span<const BrandProfile> brands, std::string_view word) {
    return std::any_of(brands.begin(), brands.end(), [&](const BrandProfile& b) {
        return text::find_phrase(b.brand_name, word) != std::string_view::npos;
    });
}

// Capitalized word that is neither a generic role word nor part of a brand name.
bool is_proper_name(std::string_view word, const DetectorConfig& config, std::span<const BrandProfile> brands) {
    return word.size() >= 2 && text::is_upper(word.front()) && !contains_ci(config.generic_name_words, word) &&
           !contains_ci(config.signoff_team_words, word) && !is_brand_word(brands, word);
}

struct PhraseHit {
    std::size_t offset;
    std::size_t length;
};

// First occurrence of each phrase; overlapping hits keep the earliest, longest one.
std::vector<PhraseHit> phrase_hits(std::string_view body, std::span<const std::string> phrases) {
    std::vector<PhraseHit> hits;
    for (const auto& p : phrases) {
        auto pos = text::find_phrase(body, p);
        if (pos != std::string_view::npos) hits.push_back({pos, p.size()});
    }
    std::sort(hits.begin(), hits.end(), [](const PhraseHit& a, const PhraseHit& b) {
        return a.offset != b.offset ? a.offset < b.offset : a.length > b.length;
    });
    std::vector<PhraseHit> kept;
    for (const auto& h : hits) {
        if (!kept.empty() && h.offset < kept.back().offset + kept.back().length) continue;
        kept.push_back(h);
    }
    return kept;
}

bool glued_www_host(std::string_view host) {
    return host.size() > 3 && host.starts_with("www") && text::is_alpha(host[3]);
}

// Splits "rackspace-login.example" into {"rackspace", "login", "example"}.
bool has_domain_piece(std::string_view domain, std::string_view token) {
    std::size_t start = 0;
    while (start <= domain.size()) {
        auto end = domain.find_first_of(".-", start);
        if (domain.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start) == token) return true;
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    return false;
}

RedFlag link_flag(const ExtractedUrl& url, double weight) {
    return RedFlag{FlagCategory::suspicious_link, url.raw, url.source_offset, weight};
}

// Lookalike check against every known brand, for messages with no claimed brand.
std::optional<RedFlag> unattributed_link_suspicion(const ExtractedUrl& url, std::span<const BrandProfile> brands,
                                                   const DetectorConfig& config) {
    double weight = 0.0;
    if (glued_www_host(url.host)) weight = std::max(weight, config.link_weight(LinkRule::glued_www));
    if (is_ip_literal(url.host)) weight = std::max(weight, config.link_weight(LinkRule::ip_host));
    const std::string& domain = url.registrable_domain;
    for (const auto& brand : brands) {
        if (brand.legitimate_domains.contains(domain)) continue;
        for (const auto& legit : brand.legitimate_domains) {
            // Stricter than the claimed-brand rule: one edit at most.
            std::size_t d = text::edit_distance(domain, legit);
            if (d > 0 && d <= std::min<std::size_t>(1, config.typosquat_max_distance))
                weight = std::max(weight, config.link_weight(LinkRule::typosquat));
        }
        std::string token = brand.token();
        if (token.size() >= 4 && has_domain_piece(domain, token))
            weight = std::max(weight, config.link_weight(LinkRule::brand_in_domain));
    }
    if (weight <= 0.0) return std::nullopt;
    return link_flag(url, weight);
}

}  // namespace

std::string_view to_string(FlagCategory c) { return kCategoryNames[static_cast<std::size_t>(c)]; }

std::optional<FlagCategory> parse_flag_category(std::string_view name) {
    std::string canonical;
    for (char c : text::trim(name)) canonical.push_back(c == ' ' || c == '-' ? '_' : text::lower(c));
    for (std::size_t i = 0; i < kCategoryNames.size(); ++i) {
        if (canonical == kCategoryNames[i]) return static_cast<FlagCategory>(i);
    }
    return std::nullopt;
}

std::string BrandProfile::token() const {
    std::string t;
    for (char c : brand_name) {
        if (text::is_alnum(c)) t.push_back(text::lower(c));
    }
    return t;
}

const BrandProfile* attribute_brand(const EmailDocument& doc, std::span<const BrandProfile> brands) {
    for (const auto& b : brands) {
        if (mentions_brand(doc.sender.display_name, b)) return &b;
    }
    for (const auto& b : brands) {
        if (mentions_brand(doc.subject, b)) return &b;
    }
    const BrandProfile* best = nullptr;
    std::size_t best_count = 0;
    for (const auto& b : brands) {
        std::size_t n = count_mentions(doc.body, b);
        if (n > best_count) {
            best = &b;
            best_count = n;
        }
    }
    return best;
}

std::optional<RedFlag> link_suspicion(const ExtractedUrl& url, const BrandProfile* claimed, const DetectorConfig& config) {
    if (!claimed) return unattributed_link_suspicion(url, config.brands, config);
    double weight = 0.0;
    auto fire = [&](LinkRule r) { weight = std::max(weight, config.link_weight(r)); };
    const std::string& domain = url.registrable_domain;

    if (glued_www_host(url.host)) fire(LinkRule::glued_www);
    if (is_ip_literal(url.host)) fire(LinkRule::ip_host);
    if (!claimed->legitimate_domains.contains(domain)) {
        fire(LinkRule::off_brand);
        for (const auto& legit : claimed->legitimate_domains) {
            std::size_t d = text::edit_distance(domain, legit);
            if (d > 0 && d <= config.typosquat_max_distance) fire(LinkRule::typosquat);
        }
        std::string token = claimed->token();
        if (!token.empty() && domain.find(token) != std::string::npos) fire(LinkRule::brand_in_domain);
    }
    if (weight <= 0.0) return std::nullopt;
    return link_flag(url, weight);
}

std::vector<RedFlag> grammar_scan(std::string_view body, const DetectorConfig& config) {
    const double weight = config.weight(FlagCategory::grammar_spelling);
    std::vector<RedFlag> flags;
    auto urls = extract_urls(body);
    auto in_url = [&](std::size_t pos) {
        return std::any_of(urls.begin(), urls.end(), [&](const ExtractedUrl& u) {
            return pos >= u.source_offset && pos < u.source_offset + u.raw.size();
        });
    };
    // Inside a whitespace-delimited chunk that holds an email address.
    auto in_address = [&](std::size_t pos) {
        std::size_t b = pos, e = pos;
        while (b > 0 && !text::is_space(body[b - 1])) --b;
        while (e < body.size() && !text::is_space(body[e])) ++e;
        return body.substr(b, e - b).find('@') != std::string_view::npos;
    };
    auto add = [&](std::size_t begin, std::size_t end) {
        flags.push_back({FlagCategory::grammar_spelling, std::string(body.substr(begin, end - begin)), begin, weight});
    };

    auto words = words_of(body);
    for (std::size_t i = 0; i < words.size(); ++i) {
        const Word& w = words[i];
        if (in_url(w.offset) || in_address(w.offset)) continue;
        if (i + 1 < words.size()) {
            const Word& next = words[i + 1];
            std::string_view gap = body.substr(w.offset + w.text.size(), next.offset - w.offset - w.text.size());
            bool adjacent = !gap.empty() && std::all_of(gap.begin(), gap.end(), [](char c) { return c == ' ' || c == '\t'; });
            if (adjacent && !in_url(next.offset)) {
                // R1: auxiliary followed by a bare base form
                if ((text::iequals(w.text, "have") || text::iequals(w.text, "has") || text::iequals(w.text, "had")) &&
                    contains_ci(config.grammar_base_verbs, next.text)) {
                    add(w.offset, next.offset + next.text.size());
                }
                // R3: doubled word
                if (w.text.size() >= 2 && text::iequals(w.text, next.text)) add(w.offset, next.offset + next.text.size());
            }
        }
        // R4: known misspelling
        if (contains_ci(config.misspellings, w.text)) add(w.offset, w.offset + w.text.size());
    }

    // R2: sentence punctuation glued to the next word
    for (std::size_t i = 1; i + 1 < body.size(); ++i) {
        char c = body[i];
        if (c != '.' && c != '!' && c != '?') continue;
        if (!text::is_alpha(body[i - 1]) || !text::is_alpha(body[i + 1])) continue;
        // Lowercase after a dot reads as a file or host name, not a sentence break.
        if (c == '.' && !text::is_upper(body[i + 1])) continue;
        if (in_url(i) || in_address(i)) continue;
        std::size_t begin = i, end = i + 1;
        while (begin > 0 && text::is_alpha(body[begin - 1])) --begin;
        while (end < body.size() && text::is_alpha(body[end])) ++end;
        if (i - begin < 2) continue;  // abbreviations such as "U.S"
        add(begin, end);
    }

    std::sort(flags.begin(), flags.end(), [](const RedFlag& a, const RedFlag& b) {
        return a.offset != b.offset ? a.offset < b.offset : a.evidence < b.evidence;
    });
    return flags;
}

std::optional<RedFlag> urgency_scan(std::string_view body, std::span<const std::string> lexicon, int min_hits,
                                    double weight) {
    std::optional<PhraseHit> first;
    int distinct = 0;
    for (const auto& phrase : lexicon) {
        auto pos = text::find_phrase(body, phrase);
        if (pos == std::string_view::npos) continue;
        ++distinct;
        if (!first || pos < first->offset) first = PhraseHit{pos, phrase.size()};
    }
    if (distinct < min_hits || !first) return std::nullopt;
    return RedFlag{FlagCategory::urgency_fear, std::string(body.substr(first->offset, first->length)), first->offset,
                   weight};
}

std::vector<RedFlag> detect_flags(const EmailDocument& doc, std::span<const BrandProfile> brands,
                                  const DetectorConfig& config) {
    std::vector<RedFlag> flags;
    const BrandProfile* claimed = attribute_brand(doc, brands);

    if (!doc.sender.malformed) {
        const std::string& sender_domain = doc.sender.registrable_domain;
        if (claimed && !claimed->legitimate_domains.contains(sender_domain)) {
            flags.push_back({FlagCategory::sender_brand_mismatch, doc.sender.domain, std::nullopt,
                             config.weight(FlagCategory::sender_brand_mismatch)});
        }
        for (const auto& b : brands) {
            if (mentions_brand(doc.sender.display_name, b) && !b.legitimate_domains.contains(sender_domain)) {
                flags.push_back({FlagCategory::sender_name_mismatch, doc.sender.display_name, std::nullopt,
                                 config.weight(FlagCategory::sender_name_mismatch)});
                break;
            }
        }
    }

    for (const auto& url : doc.urls) {
        auto flag = claimed ? link_suspicion(url, claimed, config) : unattributed_link_suspicion(url, brands, config);
        if (flag) {
            flag->weight = std::min(flag->weight, 1.0);
            flags.push_back(std::move(*flag));
        }
    }

    for (auto& f : grammar_scan(doc.body, config)) flags.push_back(std::move(f));

    if (auto f = urgency_scan(doc.body, config.urgency_phrases, config.min_urgency_hits,
                              config.weight(FlagCategory::urgency_fear)))
        flags.push_back(std::move(*f));

    for (const auto& hit : phrase_hits(doc.body, config.unusual_request_phrases)) {
        flags.push_back({FlagCategory::unusual_request, std::string(doc.body.substr(hit.offset, hit.length)), hit.offset,
                         config.weight(FlagCategory::unusual_request)});
    }
    for (const auto& hit : phrase_hits(doc.body, config.no_reply_phrases)) {
        flags.push_back({FlagCategory::no_reply_instruction, std::string(doc.body.substr(hit.offset, hit.length)),
                         hit.offset, config.weight(FlagCategory::no_reply_instruction)});
    }

    if (doc.salutation) {
        const TextSpan& sal = *doc.salutation;
        auto sal_words = words_of(sal.text);
        std::string joined;
        for (const auto& w : sal_words) {
            if (!joined.empty()) joined.push_back(' ');
            joined += w.text;
        }
        std::string tail;  // salutation without its greeting word
        for (std::size_t i = 1; i < sal_words.size(); ++i) {
            if (!tail.empty()) tail.push_back(' ');
            tail += sal_words[i].text;
        }
        bool generic = std::any_of(config.generic_salutations.begin(), config.generic_salutations.end(),
                                   [&](const std::string& g) {
                                       std::string gw;
                                       for (const auto& w : words_of(g)) {
                                           if (!gw.empty()) gw.push_back(' ');
                                           gw += w.text;
                                       }
                                       return text::iequals(gw, joined) || text::iequals(gw, tail);
                                   });
        if (generic) {
            flags.push_back({FlagCategory::generic_salutation, sal.text, sal.offset,
                             config.weight(FlagCategory::generic_salutation)});
        }
        bool personal = std::any_of(sal_words.begin() + (sal_words.empty() ? 0 : 1), sal_words.end(),
                                    [&](const Word& w) { return is_proper_name(w.text, config, brands); });
        if (!personal) {
            flags.push_back({FlagCategory::lack_of_personalization, sal.text, sal.offset,
                             config.weight(FlagCategory::lack_of_personalization)});
        }
    }

    if (doc.signoff) {
        const TextSpan& so = *doc.signoff;
        auto so_words = words_of(so.text);
        bool team = std::any_of(so_words.begin(), so_words.end(),
                                [&](const Word& w) { return contains_ci(config.signoff_team_words, w.text); });
        bool person = std::any_of(so_words.begin(), so_words.end(),
                                  [&](const Word& w) { return is_proper_name(w.text, config, brands); });
        auto digits = std::count_if(so.text.begin(), so.text.end(), text::is_digit);
        bool contact = digits >= 7 || so.text.find('@') != std::string::npos ||
                       std::any_of(so_words.begin(), so_words.end(), [](const Word& w) {
                           return text::iequals(w.text, "phone") || text::iequals(w.text, "tel") ||
                                  text::iequals(w.text, "call");
                       });
        if (team && !person && !contact) {
            flags.push_back(
                {FlagCategory::generic_signoff, so.text, so.offset, config.weight(FlagCategory::generic_signoff)});
        }
    }

    std::stable_sort(flags.begin(), flags.end(), [](const RedFlag& a, const RedFlag& b) {
        if (a.category != b.category) return a.category < b.category;
        return a.offset < b.offset;  // nullopt sorts first
    });
    return flags;
}

double heuristic_score(std::span<const RedFlag> flags) {
    std::array<double, kFlagCategoryCount> strongest{};
    for (const auto& f : flags) {
        auto& slot = strongest[static_cast<std::size_t>(f.category)];
        slot = std::max(slot, std::clamp(f.weight, 0.0, 1.0));
    }
    double keep = 1.0;
    for (double w : strongest) keep *= 1.0 - w;
    return 1.0 - keep;
}

}  // namespace scamlens
