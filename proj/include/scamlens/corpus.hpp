#pragma once

// Labeled corpora: loading, label aggregation, agreement and stratified folds.
//
// File format: UTF-8, one JSON object per line.
//   {"manifest": "free-form provenance text"}                  (optional, first line)
//   {"id": "e1", "text": "...", "scam_type": "phishing",
//    "annotations": [{"annotator_id": "a", "label": "scam"}]}
//   {"id": "e2", "eml_path": "mail/e2.eml", "annotations": [...]}
// `eml_path` is resolved relative to the corpus file.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "scamlens/email.hpp"
#include "scamlens/labels.hpp"

namespace scamlens {

enum class ScamType {
    phishing,
    advance_fee,
    romance,
    investment,
    tech_support,
    online_shopping,
    lottery_prize,
    irs_impersonation,
    charity,
};

std::string_view to_string(ScamType t);
std::optional<ScamType> parse_scam_type(std::string_view s);

struct AnnotatorLabel {
    std::string annotator_id;
    Label label = Label::legitimate;

    bool operator==(const AnnotatorLabel&) const = default;
};

struct RawEmail {
    std::string path;   // as written in the corpus file
    std::string bytes;  // file contents

    bool operator==(const RawEmail&) const = default;
};

struct LabeledExample {
    std::string id;
    std::variant<std::string, RawEmail> payload;  // bare text or raw message
    std::optional<ScamType> scam_type;
    std::vector<AnnotatorLabel> annotations;
    Consensus consensus = Consensus::disputed;

    /// Routes the payload through email ingestion.
    EmailDocument document() const;

    bool operator==(const LabeledExample&) const = default;
};

struct Corpus {
    std::vector<LabeledExample> examples;
    std::string source_manifest;

    const LabeledExample* find(std::string_view id) const;

    bool operator==(const Corpus&) const = default;
};

Corpus load_corpus(const std::filesystem::path& path);

/// Parses corpus text; `base_dir` resolves eml_path entries.
Corpus parse_corpus(std::string_view text, const std::filesystem::path& base_dir = {});

std::string serialize_corpus(const Corpus& corpus);

/// Strict majority; ties and the empty list are disputed.
Consensus aggregate_labels(std::span<const AnnotatorLabel> annotations);

/// Cohen's kappa for two annotators over the same items.
double cohen_kappa(std::span<const Label> labels_a, std::span<const Label> labels_b);

/// Mean kappa over every annotator pair that shares at least one item;
/// nullopt when no pair does.
std::optional<double> mean_pairwise_kappa(const Corpus& corpus);

struct FoldSplit {
    std::vector<std::vector<std::string>> folds;
    std::vector<std::string> excluded_disputed;
};

/// Partitions non-disputed examples into k folds whose scam counts differ by
/// at most one. Throws TooFewExamples.
FoldSplit split_stratified(const Corpus& corpus, std::size_t k, std::uint64_t seed);

}  // namespace scamlens
