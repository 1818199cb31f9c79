#pragma once

// Confusion-matrix metrics, ROC AUC, threshold sweeps, cross-validated grid
// tuning and false-positive review reports. Scam is the positive class.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "scamlens/classifier.hpp"
#include "scamlens/corpus.hpp"
#include "scamlens/labels.hpp"

namespace scamlens {

struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;

    std::size_t total() const noexcept { return tp + fp + fn + tn; }
    ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        tn += o.tn;
        return *this;
    }
    bool operator==(const ConfusionMatrix&) const = default;
};

// Markers for metrics whose denominator was zero; the metric is reported as 0.
inline constexpr const char* kNoPredictedPositives = "no_predicted_positives";
inline constexpr const char* kNoActualPositives = "no_actual_positives";
inline constexpr const char* kAucUndefined = "auc_undefined";

struct EvalReport {
    ConfusionMatrix matrix;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
    double auc = 0.0;
    double threshold = 0.0;
    std::set<std::string> degenerate_flags;

    bool operator==(const EvalReport&) const = default;
};

ConfusionMatrix confusion(std::span<const Label> predicted, std::span<const Label> truth);

/// Precision, recall, F1 and accuracy; auc and threshold are left at 0.
EvalReport metrics(const ConfusionMatrix& cm);

/// Mann-Whitney: P(score_pos > score_neg) with ties counted one half.
double auc(std::span<const double> scores, std::span<const Label> truth);

/// Full report at one threshold. AUC is 0 with kAucUndefined when one class is absent.
EvalReport evaluate(std::span<const double> scores, std::span<const Label> truth, double threshold);

struct SweepPoint {
    double threshold = 0.0;
    ConfusionMatrix matrix;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    bool operator==(const SweepPoint&) const = default;
};

struct SweepCurve {
    std::vector<SweepPoint> points;

    bool operator==(const SweepCurve&) const = default;
};

/// `grid` must be strictly ascending.
SweepCurve threshold_sweep(std::span<const double> scores, std::span<const Label> truth, std::span<const double> grid);

/// 0.05, 0.10, ..., 0.95
std::vector<double> default_threshold_grid();

/// w_llm = 0.0, 0.1, ..., 1.0
std::vector<FusionWeights> default_weight_grid();

/// Per-example signals feeding the fusion. `llm` is absent for heuristic-only runs.
struct ScoreRecord {
    double heuristic = 0.0;
    std::optional<double> llm;
    std::optional<Label> llm_verdict;
    bool degraded = false;

    bool operator==(const ScoreRecord&) const = default;
};

using ScoreTable = std::map<std::string, ScoreRecord, std::less<>>;

/// Heuristic and mock-backend scores for every example.
ScoreTable score_with_mock(const Corpus& corpus, const DetectorConfig& config);

/// One JSON object per line: {id, heuristic, llm_confidence?, llm_verdict?, degraded}.
void save_score_cache(const ScoreTable& table, const std::filesystem::path& path);
ScoreTable load_score_cache(const std::filesystem::path& path);

struct TuneResult {
    FusionWeights weights;
    double threshold = 0.0;
    EvalReport report;  // fold-mean precision/recall/f1/accuracy, summed matrix, pooled AUC
    std::vector<double> fold_f1;

    bool operator==(const TuneResult&) const = default;
};

/// Exhaustive grid search scored by mean F1 over stratified folds. Ties go to
/// higher mean precision, then the lower threshold, then the lower LLM weight.
TuneResult tune(const Corpus& corpus, const ScoreTable& scores, std::span<const FusionWeights> weight_grid,
                std::span<const double> threshold_grid, std::size_t k, std::uint64_t seed);

struct FalsePositiveEntry {
    std::string example_id;
    double confidence = 0.0;
    std::vector<RedFlag> flags;
    std::string llm_summary;
};

struct FalsePositiveReport {
    std::vector<FalsePositiveEntry> entries;  // confidence descending
};

struct ResultRow {
    std::string example_id;
    Verdict verdict;
    std::optional<Label> truth;  // absent for disputed examples
};

FalsePositiveReport false_positive_report(std::span<const ResultRow> results);

}  // namespace scamlens
