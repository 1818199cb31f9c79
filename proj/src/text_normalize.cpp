#include "scamlens/email.hpp"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include "text_util.hpp"

namespace scamlens {

namespace {

bool valid_utf8(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        auto c = static_cast<unsigned char>(s[i]);
        std::size_t len = 0;
        std::uint32_t cp = 0;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + len > s.size()) return false;
        for (std::size_t k = 1; k < len; ++k) {
            auto cc = static_cast<unsigned char>(s[i + k]);
            if ((cc & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        // overlong forms, surrogates, out of range
        if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) || cp > 0x10FFFF ||
            (cp >= 0xD800 && cp <= 0xDFFF))
            return false;
        i += len;
    }
    return true;
}

std::string latin1_to_utf8(std::string_view s) {
    std::string out;
    out.reserve(s.size() * 2);
    for (char ch : s) {
        auto c = static_cast<unsigned char>(ch);
        if (c < 0x80) {
            out.push_back(ch);
        } else {
            out.push_back(static_cast<char>(0xC0 | (c >> 6)));
            out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
        }
    }
    return out;
}

std::string nfc(const std::string& utf8) {
    bool ascii = std::all_of(utf8.begin(), utf8.end(), [](char c) { return static_cast<unsigned char>(c) < 0x80; });
    if (ascii) return utf8;
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* normalizer = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status)) return utf8;
    icu::UnicodeString source = icu::UnicodeString::fromUTF8(utf8);
    icu::UnicodeString composed = normalizer->normalize(source, status);
    if (U_FAILURE(status)) return utf8;
    std::string out;
    composed.toUTF8String(out);
    return out;
}

}  // namespace

std::string normalize_text(std::string_view text) {
    std::string decoded = valid_utf8(text) ? std::string(text) : latin1_to_utf8(text);
    std::string composed = nfc(decoded);

    std::string out;
    out.reserve(composed.size());
    bool in_blank_run = false;
    for (std::size_t i = 0; i < composed.size(); ++i) {
        char c = composed[i];
        if (c == '\r') {
            if (i + 1 < composed.size() && composed[i + 1] == '\n') continue;
            c = '\n';
        }
        if (c == ' ' || c == '\t') {
            if (!in_blank_run) out.push_back(' ');
            in_blank_run = true;
            continue;
        }
        in_blank_run = false;
        out.push_back(c);
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < s.size()) {
        char c = s[i];
        if (text::is_space(c)) {
            ++i;
            continue;
        }
        if (text::is_word_byte(c)) {
            std::size_t start = i;
            while (i < s.size()) {
                if (text::is_word_byte(s[i])) {
                    ++i;
                } else if ((s[i] == '\'' || s[i] == '-') && i + 1 < s.size() && text::is_word_byte(s[i + 1])) {
                    // internal apostrophe or hyphen joins two word runs
                    ++i;
                } else {
                    break;
                }
            }
            tokens.emplace_back(s.substr(start, i - start));
            continue;
        }
        tokens.emplace_back(1, c);
        ++i;
    }
    return tokens;
}

std::vector<std::string> lowercase_tokens(std::span<const std::string> tokens) {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(text::to_lower(t));
    return out;
}

namespace {

constexpr std::string_view kGreetings[] = {"dear", "hello", "hi", "greetings"};
constexpr std::string_view kClosingWords[] = {"sincerely", "regards", "best", "thanks"};
constexpr std::string_view kClosingQualifiers[] = {"kind", "best", "warm", "warmest", "many", "with", "yours"};

std::string_view first_word(std::string_view s) {
    std::size_t n = 0;
    while (n < s.size() && text::is_alpha(s[n])) ++n;
    return s.substr(0, n);
}

std::string_view strip_trailing_punct(std::string_view s) {
    while (!s.empty() && (s.back() == ',' || s.back() == ':' || s.back() == '!' || s.back() == ';' || s.back() == '.' ||
                          text::is_space(s.back())))
        s.remove_suffix(1);
    return s;
}

// Length of a closing phrase at the start of `line` ("Sincerely", "Kind regards",
// "Best"), or 0. The phrase must end the line or be followed by a comma.
std::size_t closing_phrase_length(std::string_view line) {
    auto is_closing = [](std::string_view word) {
        return std::any_of(std::begin(kClosingWords), std::end(kClosingWords),
                           [&](std::string_view c) { return text::iequals(word, c); });
    };
    auto is_qualifier = [](std::string_view word) {
        return std::any_of(std::begin(kClosingQualifiers), std::end(kClosingQualifiers),
                           [&](std::string_view q) { return text::iequals(word, q); });
    };
    std::string_view w = first_word(line);
    if (w.empty()) return 0;
    std::size_t pos = 0;
    if (is_qualifier(w)) {
        std::size_t after = w.size();
        while (after < line.size() && line[after] == ' ') ++after;
        std::string_view second = first_word(line.substr(after));
        if (!second.empty() && is_closing(second))
            pos = after + second.size();
        else if (is_closing(w))
            pos = w.size();
        else
            return 0;
    } else if (is_closing(w)) {
        pos = w.size();
    } else {
        return 0;
    }
    std::string_view rest = line.substr(pos);
    std::string_view rest_trimmed = text::trim(rest);
    if (rest_trimmed.empty()) return line.size();
    if (rest_trimmed.front() == ',') return pos;
    if (strip_trailing_punct(rest_trimmed).empty()) return line.size();
    return 0;
}

}  // namespace

std::optional<TextSpan> extract_salutation(std::string_view body) {
    auto lines = text::split_lines(body);
    for (std::size_t i = 0; i < lines.size() && i < 5; ++i) {
        std::string_view line = lines[i].text;
        std::size_t lead = 0;
        while (lead < line.size() && text::is_space(line[lead])) ++lead;
        std::string_view content = line.substr(lead);
        std::string_view w = first_word(content);
        if (w.empty() || (w.size() < content.size() && text::is_alnum(content[w.size()]))) continue;
        bool greeting = std::any_of(std::begin(kGreetings), std::end(kGreetings),
                                    [&](std::string_view g) { return text::iequals(w, g); });
        if (!greeting) continue;
        // The salutation ends at the first clause separator on its line.
        std::string_view span = text::trim(content.substr(0, content.find_first_of(",:;!")));
        return TextSpan{std::string(span), lines[i].offset + lead};
    }
    return std::nullopt;
}

std::optional<TextSpan> extract_signoff(std::string_view body) {
    auto lines = text::split_lines(body);
    std::size_t end = lines.size();
    while (end > 0 && text::trim(lines[end - 1].text).empty()) --end;
    std::size_t begin = end > 5 ? end - 5 : 0;

    std::optional<std::size_t> closing_line;
    std::size_t closing_len = 0;
    for (std::size_t i = begin; i < end; ++i) {
        std::string_view line = lines[i].text;
        std::size_t lead = 0;
        while (lead < line.size() && text::is_space(line[lead])) ++lead;
        std::size_t len = closing_phrase_length(line.substr(lead));
        if (len > 0) {
            closing_line = i;
            closing_len = lead + len;
        }
    }
    if (!closing_line) return std::nullopt;

    // Sign-off block: from the first non-blank byte after the closing phrase
    // to the end of the last non-blank line.
    std::size_t start = lines[*closing_line].offset + closing_len;
    std::size_t stop = lines[end - 1].offset + lines[end - 1].text.size();
    while (start < stop && (text::is_space(body[start]) || body[start] == ',')) ++start;
    while (stop > start && text::is_space(body[stop - 1])) --stop;
    if (start >= stop) return std::nullopt;
    return TextSpan{std::string(body.substr(start, stop - start)), start};
}

}  // namespace scamlens
