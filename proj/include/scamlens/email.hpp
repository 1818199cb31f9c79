#pragma once

// Email ingestion: RFC 5322 framing, minimal MIME, text normalization,
// URL / salutation / sign-off extraction and tokenization.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace scamlens {

struct SenderIdentity {
    std::string display_name;
    std::string address;
    std::string local_part;
    std::string domain;               // lowercased
    std::string registrable_domain;   // lowercased, suffix of domain
    bool malformed = true;

    bool operator==(const SenderIdentity&) const = default;
};

struct ExtractedUrl {
    std::string raw;                 // exact matched span of the body
    std::string host;                // lowercased
    std::string registrable_domain;  // suffix of host
    std::string path;                // everything after host[:port], may be empty
    std::size_t source_offset = 0;   // byte offset into the normalized body

    bool operator==(const ExtractedUrl&) const = default;
};

/// A verbatim slice of the body together with its byte offset.
struct TextSpan {
    std::string text;
    std::size_t offset = 0;

    bool operator==(const TextSpan&) const = default;
};

struct EmailDocument {
    SenderIdentity sender;
    std::optional<SenderIdentity> reply_to;
    std::string subject;
    std::string body;
    std::vector<ExtractedUrl> urls;
    std::optional<TextSpan> salutation;
    std::optional<TextSpan> signoff;
    std::vector<std::string> tokens;
    std::size_t raw_size_bytes = 0;

    bool operator==(const EmailDocument&) const = default;
};

/// Parses an RFC 5322 message (header block, blank line, body). Throws
/// MalformedMessage on empty input or when no header line can be recognized.
EmailDocument parse_email(std::string_view raw_message);

/// Total: treats the whole input as a body with no sender.
EmailDocument parse_plaintext(std::string_view text);

/// Tries parse_email and falls back to parse_plaintext on MalformedMessage.
EmailDocument parse_any(std::string_view input);

/// Unicode NFC, CRLF/CR to LF, runs of spaces/tabs collapsed to one space.
/// Invalid UTF-8 is reinterpreted as Latin-1 first.
std::string normalize_text(std::string_view text);

std::vector<ExtractedUrl> extract_urls(std::string_view body);

std::optional<TextSpan> extract_salutation(std::string_view body);
std::optional<TextSpan> extract_signoff(std::string_view body);

/// Word runs and single punctuation characters; whitespace is dropped.
std::vector<std::string> tokenize(std::string_view text);

/// ASCII-lowercased copy of tokens, used by detectors.
std::vector<std::string> lowercase_tokens(std::span<const std::string> tokens);

/// Parses a single address such as `"Name" <user@host>` or `user@host`.
SenderIdentity parse_address(std::string_view header_value);

/// Last two labels of the host, or three when the last two form a known
/// multi-label public suffix (co.uk, ac.kr, ...). IP literals are returned as is.
std::string registrable_domain(std::string_view host);

bool is_ip_literal(std::string_view host);

}  // namespace scamlens
