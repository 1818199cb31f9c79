#include <map>

#include "scamlens/email.hpp"
#include "scamlens/errors.hpp"
#include "text_util.hpp"

namespace scamlens {

namespace {

using HeaderMap = std::multimap<std::string, std::string>;  // lowercased name -> unfolded value

struct MimeEntity {
    HeaderMap headers;
    std::string_view body;
};

bool is_header_line(std::string_view line) {
    auto colon = line.find(':');
    if (colon == std::string_view::npos || colon == 0) return false;
    return std::all_of(line.begin(), line.begin() + static_cast<std::ptrdiff_t>(colon),
                       [](char c) { return text::is_alnum(c) || c == '-' || c == '_'; });
}

std::string header(const HeaderMap& headers, std::string_view name) {
    auto it = headers.find(std::string(name));
    return it == headers.end() ? std::string() : it->second;
}

// Splits `msg` into a header map and body. `strict` rejects input whose first
// line is not a header.
MimeEntity split_entity(std::string_view msg, bool strict) {
    MimeEntity entity;
    std::size_t pos = 0;
    if (text::istarts_with(msg, "From ")) {  // mbox envelope line
        auto nl = msg.find('\n');
        pos = nl == std::string_view::npos ? msg.size() : nl + 1;
    }
    std::string current_name;
    std::string current_value;
    bool any_header = false;
    auto flush = [&] {
        if (!current_name.empty()) entity.headers.emplace(current_name, std::string(text::trim(current_value)));
        current_name.clear();
        current_value.clear();
    };
    while (pos < msg.size()) {
        auto nl = msg.find('\n', pos);
        std::size_t line_end = nl == std::string_view::npos ? msg.size() : nl;
        std::string_view line = msg.substr(pos, line_end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        std::size_t next = nl == std::string_view::npos ? msg.size() : nl + 1;

        if (line.empty()) {
            pos = next;
            break;
        }
        if ((line.front() == ' ' || line.front() == '\t') && !current_name.empty()) {
            current_value += ' ';
            current_value += text::trim(line);
        } else if (is_header_line(line)) {
            flush();
            auto colon = line.find(':');
            current_name = text::to_lower(line.substr(0, colon));
            current_value = std::string(line.substr(colon + 1));
            any_header = true;
        } else {
            if (!any_header && strict) throw MalformedMessage("no recognizable header lines");
            // Lenient: a stray non-header line starts the body.
            break;
        }
        pos = next;
    }
    flush();
    if (!any_header && strict) throw MalformedMessage("no recognizable header lines");
    entity.body = pos < msg.size() ? msg.substr(pos) : std::string_view{};
    return entity;
}

int base64_value(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+' || c == '-') return 62;
    if (c == '/' || c == '_') return 63;
    return -1;
}

std::string decode_base64(std::string_view in) {
    std::string out;
    std::uint32_t acc = 0;
    int bits = 0;
    for (char c : in) {
        if (c == '=') break;
        int v = base64_value(c);
        if (v < 0) continue;
        acc = (acc << 6) | static_cast<std::uint32_t>(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<char>((acc >> bits) & 0xFF));
        }
    }
    return out;
}

int hex_value(char c) {
    if (text::is_digit(c)) return c - '0';
    c = text::lower(c);
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
}

std::string decode_quoted_printable(std::string_view in, bool underscore_is_space) {
    std::string out;
    out.reserve(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
        char c = in[i];
        if (c == '_' && underscore_is_space) {
            out.push_back(' ');
        } else if (c == '=' && i + 1 < in.size() && (in[i + 1] == '\n' || in[i + 1] == '\r')) {
            // soft line break
            ++i;
            if (in[i] == '\r' && i + 1 < in.size() && in[i + 1] == '\n') ++i;
        } else if (c == '=' && i + 2 < in.size() && hex_value(in[i + 1]) >= 0 && hex_value(in[i + 2]) >= 0) {
            out.push_back(static_cast<char>(hex_value(in[i + 1]) * 16 + hex_value(in[i + 2])));
            i += 2;
        } else {
            out.push_back(c);
        }
    }
    return out;
}

std::string latin1_to_utf8(std::string_view s) {
    std::string out;
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

bool is_latin1_charset(std::string_view charset) {
    return text::iequals(charset, "iso-8859-1") || text::iequals(charset, "latin1") ||
           text::iequals(charset, "iso-8859-15") || text::iequals(charset, "windows-1252") ||
           text::iequals(charset, "cp1252");
}

// RFC 2047 encoded words (=?charset?B|Q?text?=). Whitespace between adjacent
// encoded words is dropped.
std::string decode_encoded_words(std::string_view value) {
    std::string out;
    std::size_t i = 0;
    bool last_was_encoded = false;
    std::string pending_space;
    while (i < value.size()) {
        if (value.substr(i, 2) == "=?") {
            auto q1 = value.find('?', i + 2);
            auto q2 = q1 == std::string_view::npos ? q1 : value.find('?', q1 + 1);
            auto end = q2 == std::string_view::npos ? q2 : value.find("?=", q2 + 1);
            if (end != std::string_view::npos && q2 == q1 + 2) {
                std::string_view charset = value.substr(i + 2, q1 - i - 2);
                char enc = text::lower(value[q1 + 1]);
                std::string_view payload = value.substr(q2 + 1, end - q2 - 1);
                std::string decoded = enc == 'b' ? decode_base64(payload) : decode_quoted_printable(payload, true);
                if (is_latin1_charset(charset)) decoded = latin1_to_utf8(decoded);
                if (!last_was_encoded) out += pending_space;
                pending_space.clear();
                out += decoded;
                last_was_encoded = true;
                i = end + 2;
                continue;
            }
        }
        char c = value[i];
        if (c == ' ' || c == '\t') {
            pending_space.push_back(c);
        } else {
            out += pending_space;
            pending_space.clear();
            out.push_back(c);
            last_was_encoded = false;
        }
        ++i;
    }
    if (!last_was_encoded) out += pending_space;
    return out;
}

struct ContentType {
    std::string type = "text/plain";
    std::map<std::string, std::string> params;
};

ContentType parse_content_type(std::string_view value) {
    ContentType ct;
    if (text::trim(value).empty()) return ct;
    auto semi = value.find(';');
    ct.type = text::to_lower(text::trim(value.substr(0, semi)));
    while (semi != std::string_view::npos) {
        std::size_t start = semi + 1;
        // find the next ';' outside quotes
        bool quoted = false;
        std::size_t end = start;
        while (end < value.size() && (quoted || value[end] != ';')) {
            if (value[end] == '"') quoted = !quoted;
            ++end;
        }
        std::string_view param = text::trim(value.substr(start, end - start));
        auto eq = param.find('=');
        if (eq != std::string_view::npos) {
            std::string name = text::to_lower(text::trim(param.substr(0, eq)));
            std::string_view v = text::trim(param.substr(eq + 1));
            if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
            ct.params[name] = std::string(v);
        }
        semi = end < value.size() ? end : std::string_view::npos;
    }
    return ct;
}

std::string decode_transfer(const HeaderMap& headers, std::string_view body) {
    std::string encoding = text::to_lower(text::trim(header(headers, "content-transfer-encoding")));
    std::string decoded;
    if (encoding == "base64")
        decoded = decode_base64(body);
    else if (encoding == "quoted-printable")
        decoded = decode_quoted_printable(body, false);
    else
        decoded = std::string(body);
    auto ct = parse_content_type(header(headers, "content-type"));
    if (auto it = ct.params.find("charset"); it != ct.params.end() && is_latin1_charset(it->second))
        decoded = latin1_to_utf8(decoded);
    return decoded;
}

std::string decode_entity(std::string_view name) {
    static const std::map<std::string, std::string, std::less<>> named = {
        {"amp", "&"}, {"lt", "<"}, {"gt", ">"}, {"quot", "\""}, {"apos", "'"}, {"nbsp", " "}, {"copy", "\xC2\xA9"},
        {"reg", "\xC2\xAE"}, {"mdash", "\xE2\x80\x94"}, {"ndash", "\xE2\x80\x93"}, {"hellip", "\xE2\x80\xA6"},
    };
    if (!name.empty() && name.front() == '#') {
        std::uint32_t cp = 0;
        bool hex = name.size() > 1 && (name[1] == 'x' || name[1] == 'X');
        for (char c : name.substr(hex ? 2 : 1)) {
            int v = hex ? hex_value(c) : (text::is_digit(c) ? c - '0' : -1);
            if (v < 0) return {};
            cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(v);
            if (cp > 0x10FFFF) return {};
        }
        std::string out;
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
        return out;
    }
    auto it = named.find(text::to_lower(name));
    return it == named.end() ? std::string() : it->second;
}

std::string strip_markup(std::string_view html) {
    std::string out;
    std::size_t i = 0;
    while (i < html.size()) {
        char c = html[i];
        if (c == '<') {
            auto close = html.find('>', i);
            if (close == std::string_view::npos) break;
            std::string_view tag = html.substr(i + 1, close - i - 1);
            std::string name;
            for (char t : tag) {
                if (t == '/' && name.empty()) continue;
                if (!text::is_alnum(t)) break;
                name.push_back(text::lower(t));
            }
            if ((name == "script" || name == "style") && tag.front() != '/') {
                auto end_tag = text::to_lower(html.substr(close)).find("</" + name);
                i = end_tag == std::string::npos ? html.size() : close + end_tag;
                continue;
            }
            if (name == "br" || name == "p" || name == "div" || name == "tr" || name == "li" || name == "h1" ||
                name == "h2" || name == "h3" || name == "table") {
                if (!out.empty() && out.back() != '\n') out.push_back('\n');
            }
            i = close + 1;
            continue;
        }
        if (c == '&') {
            auto semi = html.find(';', i);
            if (semi != std::string_view::npos && semi - i <= 10) {
                std::string decoded = decode_entity(html.substr(i + 1, semi - i - 1));
                if (!decoded.empty()) {
                    out += decoded;
                    i = semi + 1;
                    continue;
                }
            }
        }
        out.push_back(c);
        ++i;
    }
    // Drop blank lines produced by markup layout.
    std::string compact;
    for (const auto& line : text::split_lines(out)) {
        std::string_view t = text::trim(line.text);
        if (t.empty()) continue;
        compact += t;
        compact.push_back('\n');
    }
    return compact;
}

std::vector<std::string_view> split_multipart(std::string_view body, const std::string& boundary) {
    std::vector<std::string_view> parts;
    std::string delimiter = "--" + boundary;
    std::size_t pos = 0;
    std::optional<std::size_t> part_start;
    while (pos <= body.size()) {
        auto nl = body.find('\n', pos);
        std::size_t line_end = nl == std::string_view::npos ? body.size() : nl;
        std::string_view line = body.substr(pos, line_end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (text::trim(line) == delimiter || text::trim(line) == delimiter + "--") {
            if (part_start) {
                std::size_t part_end = pos > *part_start ? pos - 1 : pos;  // drop the CRLF before the delimiter
                if (part_end > *part_start && body[part_end - 1] == '\r') --part_end;
                parts.push_back(body.substr(*part_start, part_end - *part_start));
            }
            if (text::trim(line) == delimiter + "--") break;
            part_start = nl == std::string_view::npos ? body.size() : nl + 1;
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return parts;
}

struct TextPart {
    std::string text;
    bool markup = false;
};

// Plain text preferred; markup only when no plain part exists at any depth.
std::optional<TextPart> find_text(const MimeEntity& entity, int depth) {
    auto ct = parse_content_type(header(entity.headers, "content-type"));
    if (ct.type.starts_with("multipart/")) {
        auto boundary = ct.params.find("boundary");
        if (boundary == ct.params.end() || depth >= 2) return std::nullopt;
        std::optional<TextPart> markup;
        for (auto part : split_multipart(entity.body, boundary->second)) {
            MimeEntity child = split_entity(part, false);
            auto found = find_text(child, depth + 1);
            if (!found) continue;
            if (!found->markup) return found;
            if (!markup) markup = std::move(found);
        }
        return markup;
    }
    if (ct.type == "text/plain" || ct.type == "text") return TextPart{decode_transfer(entity.headers, entity.body), false};
    if (ct.type == "text/html" || ct.type == "application/xhtml+xml")
        return TextPart{strip_markup(decode_transfer(entity.headers, entity.body)), true};
    return std::nullopt;
}

void populate_derived(EmailDocument& doc) {
    doc.urls = extract_urls(doc.body);
    doc.salutation = extract_salutation(doc.body);
    doc.signoff = extract_signoff(doc.body);
    doc.tokens = tokenize(doc.body);
}

std::string unquote_display_name(std::string_view s) {
    s = text::trim(s);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        std::string out;
        for (std::size_t i = 1; i + 1 < s.size(); ++i) {
            if (s[i] == '\\' && i + 2 < s.size()) ++i;
            out.push_back(s[i]);
        }
        return out;
    }
    return std::string(s);
}

std::string_view first_mailbox(std::string_view value) {
    bool quoted = false;
    int angle = 0;
    for (std::size_t i = 0; i < value.size(); ++i) {
        char c = value[i];
        if (c == '"' && (i == 0 || value[i - 1] != '\\')) quoted = !quoted;
        if (quoted) continue;
        if (c == '<') ++angle;
        if (c == '>') --angle;
        if (c == ',' && angle == 0) return value.substr(0, i);
    }
    return value;
}

}  // namespace

SenderIdentity parse_address(std::string_view header_value) {
    SenderIdentity id;
    std::string decoded = normalize_text(decode_encoded_words(first_mailbox(header_value)));
    std::string_view v = text::trim(decoded);

    std::string address;
    if (auto lt = v.rfind('<'); lt != std::string_view::npos) {
        auto gt = v.find('>', lt);
        address = std::string(text::trim(v.substr(lt + 1, gt == std::string_view::npos ? std::string_view::npos : gt - lt - 1)));
        id.display_name = unquote_display_name(v.substr(0, lt));
    } else if (auto paren = v.find('('); paren != std::string_view::npos) {
        address = std::string(text::trim(v.substr(0, paren)));
        auto close = v.find(')', paren);
        id.display_name =
            std::string(text::trim(v.substr(paren + 1, close == std::string_view::npos ? std::string_view::npos : close - paren - 1)));
    } else {
        address = std::string(v);
    }
    id.address = address;

    auto at = address.rfind('@');
    bool well_formed = at != std::string::npos && at > 0 && at + 1 < address.size() &&
                       std::none_of(address.begin(), address.end(), [](char c) { return text::is_space(c); });
    if (well_formed) {
        std::string domain = text::to_lower(std::string_view(address).substr(at + 1));
        well_formed = (domain.find('.') != std::string::npos || is_ip_literal(domain)) && domain.front() != '.' &&
                      domain.back() != '.' && domain.find('@') == std::string::npos;
        if (well_formed) {
            id.local_part = address.substr(0, at);
            id.domain = domain;
            id.registrable_domain = registrable_domain(domain);
            id.address = id.local_part + "@" + id.domain;
            id.malformed = false;
        }
    }
    return id;
}

EmailDocument parse_email(std::string_view raw_message) {
    if (raw_message.empty()) throw MalformedMessage("empty message");
    MimeEntity top = split_entity(raw_message, true);

    EmailDocument doc;
    doc.raw_size_bytes = raw_message.size();
    doc.sender = parse_address(header(top.headers, "from"));
    if (std::string reply = header(top.headers, "reply-to"); !text::trim(reply).empty()) doc.reply_to = parse_address(reply);
    doc.subject = normalize_text(decode_encoded_words(header(top.headers, "subject")));

    auto part = find_text(top, 0);
    doc.body = normalize_text(part ? part->text : std::string());
    populate_derived(doc);
    return doc;
}

EmailDocument parse_plaintext(std::string_view input) {
    EmailDocument doc;
    doc.raw_size_bytes = input.size();
    doc.body = normalize_text(input);
    populate_derived(doc);
    return doc;
}

EmailDocument parse_any(std::string_view input) {
    try {
        return parse_email(input);
    } catch (const MalformedMessage&) {
        return parse_plaintext(input);
    }
}

}  // namespace scamlens
