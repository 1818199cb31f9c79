#include <array>
#include <set>

#include "scamlens/email.hpp"
#include "text_util.hpp"

namespace scamlens {

namespace {

// Multi-label public suffixes; the registrable domain keeps one more label.
const std::set<std::string, std::less<>>& multi_label_suffixes() {
    static const std::set<std::string, std::less<>> s = {
        "co.uk",  "org.uk", "ac.uk",  "gov.uk", "me.uk",  "ltd.uk", "plc.uk", "net.uk", "sch.uk", "co.jp",  "ne.jp",
        "or.jp",  "ac.jp",  "go.jp",  "co.kr",  "ac.kr",  "or.kr",  "go.kr",  "ne.kr",  "re.kr",  "com.au", "net.au",
        "org.au", "edu.au", "gov.au", "co.nz",  "org.nz", "ac.nz",  "govt.nz", "com.br", "net.br", "org.br", "gov.br",
        "com.cn", "net.cn", "org.cn", "edu.cn", "gov.cn", "ac.cn",  "co.in",  "net.in", "org.in", "ac.in",  "gov.in",
        "co.za",  "org.za", "ac.za",  "gov.za", "com.mx", "org.mx", "gob.mx", "com.tr", "org.tr", "gov.tr", "edu.tr",
        "co.il",  "org.il", "ac.il",  "gov.il", "com.sg", "edu.sg", "gov.sg", "com.hk", "org.hk", "edu.hk", "gov.hk",
        "com.tw", "org.tw", "edu.tw", "gov.tw", "com.ar", "com.co", "com.ru", "com.ua", "com.pl", "com.my", "com.ph",
        "com.vn", "com.pk", "com.ng", "com.eg", "com.sa", "co.id",  "ac.id",  "or.id",  "co.th",  "ac.th",
    };
    return s;
}

// TLDs accepted for scheme-less hosts. Scheme-prefixed URLs accept any host.
const std::set<std::string, std::less<>>& known_tlds() {
    static const std::set<std::string, std::less<>> s = {
        // generic
        "com", "net", "org", "edu", "gov", "mil", "int", "info", "biz", "io", "co", "ai", "app", "dev", "xyz", "online",
        "site", "top", "shop", "store", "club", "live", "link", "click", "email", "support", "help", "cloud", "tech",
        "website", "space", "fun", "icu", "vip", "win", "bid", "loan", "work", "page", "pro", "name", "mobi", "asia",
        "tel", "travel", "bank", "money", "finance", "services", "security", "digital", "network", "solutions",
        "today", "news", "blog", "me", "tv", "cc", "ws", "ly", "gl", "gd", "to",
        // reserved names used in examples and tests
        "example", "test", "invalid", "localhost",
        // country codes
        "ac", "ae", "ar", "at", "au", "be", "bg", "br", "by", "ca", "ch", "cl", "cn", "cz", "de", "dk", "ee", "eg",
        "es", "eu", "fi", "fr", "gr", "hk", "hr", "hu", "id", "ie", "il", "in", "ir", "is", "it", "jp", "ke", "kr",
        "kz", "lt", "lu", "lv", "ma", "mx", "my", "ng", "nl", "no", "nz", "pe", "ph", "pk", "pl", "pt", "ro", "rs",
        "ru", "sa", "se", "sg", "si", "sk", "th", "tk", "tr", "tw", "ua", "uk", "us", "uy", "ve", "vn", "za",
    };
    return s;
}

bool is_host_char(char c) { return text::is_alnum(c) || c == '.' || c == '-'; }

bool is_url_char(char c) {
    if (text::is_space(c)) return false;
    switch (c) {
        case '<': case '>': case '"': case '`': case '{': case '}': case '|': case '\\': case '^':
            return false;
        default:
            return true;
    }
}

// Bytes that, when directly preceding a candidate, mean it is the tail of a
// larger token (an email address, a longer host, a path segment).
bool blocks_start(char prev) {
    return text::is_word_byte(prev) || prev == '@' || prev == '.' || prev == '-' || prev == '_' || prev == '/' ||
           prev == ':' || prev == '%' || prev == '=';
}

std::size_t trim_trailing(std::string_view body, std::size_t start, std::size_t end) {
    while (end > start) {
        char c = body[end - 1];
        if (c == ')') {
            auto span = body.substr(start, end - start);
            auto opens = std::count(span.begin(), span.end(), '(');
            auto closes = std::count(span.begin(), span.end(), ')');
            if (opens >= closes) break;
            --end;
            continue;
        }
        if (c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?' || c == '\'' || c == ']' ||
            c == '*' || c == '}') {
            --end;
            continue;
        }
        break;
    }
    return end;
}

bool glued_www(std::string_view host) {
    return host.size() > 3 && text::istarts_with(host, "www") && text::is_alpha(host[3]);
}

ExtractedUrl make_url(std::string_view body, std::size_t start, std::size_t end, std::size_t host_begin,
                      std::size_t host_end) {
    ExtractedUrl url;
    url.raw = std::string(body.substr(start, end - start));
    url.host = text::to_lower(body.substr(host_begin, host_end - host_begin));
    url.registrable_domain = registrable_domain(url.host);
    std::size_t path_begin = host_end;
    if (path_begin < end && body[path_begin] == ':') {
        ++path_begin;
        while (path_begin < end && text::is_digit(body[path_begin])) ++path_begin;
    }
    url.path = std::string(body.substr(path_begin, end - path_begin));
    url.source_offset = start;
    return url;
}

std::optional<ExtractedUrl> match_scheme(std::string_view body, std::size_t start) {
    static constexpr std::array<std::string_view, 3> kSchemes = {"https://", "http://", "ftp://"};
    std::string_view rest = body.substr(start);
    for (auto scheme : kSchemes) {
        if (!text::istarts_with(rest, scheme)) continue;
        std::size_t end = start + scheme.size();
        while (end < body.size() && is_url_char(body[end])) ++end;
        end = trim_trailing(body, start, end);

        std::size_t authority = start + scheme.size();
        std::size_t authority_end = authority;
        while (authority_end < end && body[authority_end] != '/' && body[authority_end] != '?' &&
               body[authority_end] != '#')
            ++authority_end;
        std::size_t host_begin = authority;
        if (auto at = body.substr(authority, authority_end - authority).rfind('@'); at != std::string_view::npos)
            host_begin = authority + at + 1;
        std::size_t host_end = host_begin;
        if (host_end < authority_end && body[host_end] == '[') {
            while (host_end < authority_end && body[host_end] != ']') ++host_end;
            if (host_end < authority_end) ++host_end;
        } else {
            while (host_end < authority_end && body[host_end] != ':') ++host_end;
        }
        if (host_end == host_begin) return std::nullopt;
        return make_url(body, start, end, host_begin, host_end);
    }
    return std::nullopt;
}

// Scheme-less host with optional port and path. Returns the match and, on
// failure, how far scanning may skip.
std::optional<ExtractedUrl> match_bare(std::string_view body, std::size_t start, std::size_t& skip_to) {
    std::size_t host_end = start;
    while (host_end < body.size() && is_host_char(body[host_end])) ++host_end;
    skip_to = std::max(host_end, start + 1);
    while (host_end > start && (body[host_end - 1] == '.' || body[host_end - 1] == '-')) --host_end;
    if (host_end == start || !text::is_alnum(body[start])) return std::nullopt;

    std::string_view host = body.substr(start, host_end - start);
    bool dotted = false;
    auto last_dot = host.rfind('.');
    if (last_dot != std::string_view::npos) {
        if (host.find("..") != std::string_view::npos) return std::nullopt;
        std::string_view tld = host.substr(last_dot + 1);
        bool lower_tld = std::all_of(tld.begin(), tld.end(), text::is_lower);
        bool upper_host = std::none_of(host.begin(), host.end(), text::is_lower);
        if (!(lower_tld || upper_host) || !known_tlds().contains(text::to_lower(tld))) return std::nullopt;
        dotted = true;
    }
    // A dot-less host is only accepted in the glued-www shape with a path.
    if (!dotted && !(glued_www(host) && host_end < body.size() && body[host_end] == '/')) return std::nullopt;
    if (host_end < body.size() && (body[host_end] == '@' || text::is_word_byte(body[host_end]) || body[host_end] == '_'))
        return std::nullopt;

    std::size_t end = host_end;
    if (end + 1 < body.size() && body[end] == ':' && text::is_digit(body[end + 1])) {
        ++end;
        while (end < body.size() && text::is_digit(body[end])) ++end;
    }
    if (end < body.size() && (body[end] == '/' || body[end] == '?' || body[end] == '#')) {
        while (end < body.size() && is_url_char(body[end])) ++end;
        end = trim_trailing(body, start, end);
    }
    return make_url(body, start, end, start, host_end);
}

}  // namespace

bool is_ip_literal(std::string_view host) {
    if (host.size() >= 2 && host.front() == '[' && host.back() == ']') return true;
    int parts = 0;
    std::size_t i = 0;
    while (i <= host.size()) {
        std::size_t j = i;
        int value = 0;
        while (j < host.size() && text::is_digit(host[j])) {
            value = value * 10 + (host[j] - '0');
            if (value > 255 || j - i >= 3) return false;
            ++j;
        }
        if (j == i) return false;
        ++parts;
        if (j == host.size()) break;
        if (host[j] != '.') return false;
        i = j + 1;
    }
    return parts == 4;
}

std::string registrable_domain(std::string_view host) {
    std::string h = text::to_lower(host);
    if (is_ip_literal(h)) return h;
    auto last = h.rfind('.');
    if (last == std::string::npos || last == 0) return h;
    auto second = h.rfind('.', last - 1);
    if (second == std::string::npos) return h;
    if (multi_label_suffixes().contains(std::string_view(h).substr(second + 1))) {
        if (second == 0) return h;
        auto third = h.rfind('.', second - 1);
        return third == std::string::npos ? h : h.substr(third + 1);
    }
    return h.substr(second + 1);
}

std::vector<ExtractedUrl> extract_urls(std::string_view body) {
    std::vector<ExtractedUrl> urls;
    std::size_t i = 0;
    while (i < body.size()) {
        if (!text::is_alnum(body[i]) || (i > 0 && blocks_start(body[i - 1]))) {
            ++i;
            continue;
        }
        if (auto url = match_scheme(body, i)) {
            i = url->source_offset + url->raw.size();
            urls.push_back(std::move(*url));
            continue;
        }
        std::size_t skip_to = i + 1;
        if (auto url = match_bare(body, i, skip_to)) {
            i = url->source_offset + url->raw.size();
            urls.push_back(std::move(*url));
            continue;
        }
        i = skip_to;
    }
    return urls;
}

}  // namespace scamlens
