#pragma once

// Deterministic red-flag detectors and the combined heuristic score.

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scamlens/email.hpp"

namespace scamlens {

class KeyValueFile;
struct KeyValueEntry;

enum class FlagCategory {
    sender_brand_mismatch,
    sender_name_mismatch,
    suspicious_link,
    grammar_spelling,
    urgency_fear,
    unusual_request,
    generic_salutation,
    generic_signoff,
    no_reply_instruction,
    lack_of_personalization,
};

inline constexpr std::size_t kFlagCategoryCount = 10;

inline constexpr std::array<FlagCategory, kFlagCategoryCount> kAllFlagCategories = {
    FlagCategory::sender_brand_mismatch, FlagCategory::sender_name_mismatch, FlagCategory::suspicious_link,
    FlagCategory::grammar_spelling,      FlagCategory::urgency_fear,         FlagCategory::unusual_request,
    FlagCategory::generic_salutation,    FlagCategory::generic_signoff,      FlagCategory::no_reply_instruction,
    FlagCategory::lack_of_personalization,
};

std::string_view to_string(FlagCategory c);

/// Accepts the canonical snake_case names, case-insensitively, with spaces or
/// hyphens in place of underscores.
std::optional<FlagCategory> parse_flag_category(std::string_view name);

struct RedFlag {
    FlagCategory category = FlagCategory::grammar_spelling;
    std::string evidence;               // verbatim body span or header value
    std::optional<std::size_t> offset;  // byte offset into the body, absent for header evidence
    double weight = 0.0;                // (0, 1]

    bool operator==(const RedFlag&) const = default;
};

struct BrandProfile {
    std::string brand_name;
    std::set<std::string> legitimate_domains;  // registrable domains, lowercase

    /// Lowercased brand name with non-alphanumerics removed ("Bank of America" -> "bankofamerica").
    std::string token() const;

    bool operator==(const BrandProfile&) const = default;
};

enum class LinkRule { off_brand, glued_www, ip_host, typosquat, brand_in_domain };
inline constexpr std::size_t kLinkRuleCount = 5;

struct DetectorConfig {
    std::array<double, kFlagCategoryCount> weights{};
    std::array<double, kLinkRuleCount> link_rule_weights{};
    int min_urgency_hits = 2;
    std::size_t typosquat_max_distance = 2;
    std::vector<BrandProfile> brands;

    std::vector<std::string> urgency_phrases;
    std::vector<std::string> no_reply_phrases;
    std::vector<std::string> unusual_request_phrases;
    std::vector<std::string> generic_salutations;
    std::vector<std::string> signoff_team_words;
    std::vector<std::string> generic_name_words;  // words that never count as a person's name
    std::vector<std::string> grammar_base_verbs;  // R1: "have <base verb>"
    std::vector<std::string> misspellings;        // R4

    double weight(FlagCategory c) const { return weights[static_cast<std::size_t>(c)]; }
    double link_weight(LinkRule r) const { return link_rule_weights[static_cast<std::size_t>(r)]; }

    static DetectorConfig defaults();

    bool operator==(const DetectorConfig&) const = default;
};

/// Applies one detector key (weight.*, link_weight.*, lexicon.*, brand, ...).
/// Returns false for keys this module does not own.
bool apply_detector_key(const KeyValueEntry& entry, DetectorConfig& config);

/// Defaults overlaid with the file. Unknown keys raise ConfigError.
DetectorConfig load_detector_config(const std::filesystem::path& path);
DetectorConfig parse_detector_config(std::string_view text);

/// Brand the message claims to come from: display name, then subject, then
/// the most mentioned brand in the body.
const BrandProfile* attribute_brand(const EmailDocument& doc, std::span<const BrandProfile> brands);

std::vector<RedFlag> detect_flags(const EmailDocument& doc, std::span<const BrandProfile> brands,
                                  const DetectorConfig& config);

inline std::vector<RedFlag> detect_flags(const EmailDocument& doc, const DetectorConfig& config) {
    return detect_flags(doc, config.brands, config);
}

/// With no claimed brand, only glued-www, IP hosts and one-edit lookalikes of config.brands fire.
std::optional<RedFlag> link_suspicion(const ExtractedUrl& url, const BrandProfile* claimed_brand,
                                      const DetectorConfig& config = DetectorConfig::defaults());

std::vector<RedFlag> grammar_scan(std::string_view body, const DetectorConfig& config = DetectorConfig::defaults());

std::optional<RedFlag> urgency_scan(std::string_view body, std::span<const std::string> lexicon, int min_hits = 2,
                                    double weight = 0.3);

/// Noisy-or over the strongest flag of each category: 1 - prod(1 - w).
double heuristic_score(std::span<const RedFlag> flags);

}  // namespace scamlens
