#include "scamlens/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "scamlens/config_file.hpp"
#include "scamlens/errors.hpp"
#include "text_util.hpp"

namespace scamlens {

using nlohmann::json;

namespace {

void require_same_length(std::size_t a, std::size_t b) {
    if (a != b) throw LengthMismatch("prediction and truth lengths differ");
    if (a == 0) throw EmptyInput("no predictions");
}

void require_both_classes(std::span<const Label> truth) {
    bool pos = std::find(truth.begin(), truth.end(), Label::scam) != truth.end();
    bool neg = std::find(truth.begin(), truth.end(), Label::legitimate) != truth.end();
    if (!pos || !neg) throw OneClassOnly("both scam and legitimate examples are required");
}

ConfusionMatrix confusion_at(std::span<const double> scores, std::span<const Label> truth, double threshold) {
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        bool predicted = decide(scores[i], threshold) == Label::scam;
        bool actual = truth[i] == Label::scam;
        if (predicted && actual)
            ++cm.tp;
        else if (predicted)
            ++cm.fp;
        else if (actual)
            ++cm.fn;
        else
            ++cm.tn;
    }
    return cm;
}

std::string llm_summary(const std::optional<LlmVerdict>& llm) {
    if (!llm) return "none";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s (%.2f%s)", std::string(to_string(llm->verdict)).c_str(), llm->confidence,
                  llm->degraded ? ", degraded" : "");
    return buf;
}

}  // namespace

ConfusionMatrix confusion(std::span<const Label> predicted, std::span<const Label> truth) {
    require_same_length(predicted.size(), truth.size());
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        bool p = predicted[i] == Label::scam, t = truth[i] == Label::scam;
        if (p && t)
            ++cm.tp;
        else if (p)
            ++cm.fp;
        else if (t)
            ++cm.fn;
        else
            ++cm.tn;
    }
    return cm;
}

EvalReport metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw EmptyInput("empty confusion matrix");
    EvalReport r;
    r.matrix = cm;
    const auto tp = static_cast<double>(cm.tp);
    if (cm.tp + cm.fp == 0)
        r.degenerate_flags.insert(kNoPredictedPositives);
    else
        r.precision = tp / static_cast<double>(cm.tp + cm.fp);
    if (cm.tp + cm.fn == 0)
        r.degenerate_flags.insert(kNoActualPositives);
    else
        r.recall = tp / static_cast<double>(cm.tp + cm.fn);
    // F1 from counts: 2tp / (2tp + fp + fn), equal to the harmonic mean
    if (cm.tp > 0) r.f1 = 2.0 * tp / static_cast<double>(2 * cm.tp + cm.fp + cm.fn);
    r.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
    return r;
}

double auc(std::span<const double> scores, std::span<const Label> truth) {
    require_same_length(scores.size(), truth.size());
    require_both_classes(truth);
    if (std::any_of(scores.begin(), scores.end(), [](double s) { return std::isnan(s); }))
        throw std::invalid_argument("scores must not be NaN");

    // Rank-sum form of the Mann-Whitney statistic with mid-ranks for ties.
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double positive_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        double mid_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) {
            if (truth[order[k]] == Label::scam) positive_rank_sum += mid_rank;
        }
        i = j + 1;
    }
    auto n_pos = static_cast<double>(std::count(truth.begin(), truth.end(), Label::scam));
    auto n_neg = static_cast<double>(truth.size()) - n_pos;
    double u = positive_rank_sum - n_pos * (n_pos + 1.0) / 2.0;
    return u / (n_pos * n_neg);
}

EvalReport evaluate(std::span<const double> scores, std::span<const Label> truth, double threshold) {
    require_same_length(scores.size(), truth.size());
    EvalReport r = metrics(confusion_at(scores, truth, threshold));
    r.threshold = threshold;
    try {
        r.auc = auc(scores, truth);
    } catch (const OneClassOnly&) {
        r.auc = 0.0;
        r.degenerate_flags.insert(kAucUndefined);
    }
    return r;
}

SweepCurve threshold_sweep(std::span<const double> scores, std::span<const Label> truth, std::span<const double> grid) {
    require_same_length(scores.size(), truth.size());
    require_both_classes(truth);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("threshold grid must be strictly ascending");
    }
    SweepCurve curve;
    for (double t : grid) {
        SweepPoint p;
        p.threshold = t;
        p.matrix = confusion_at(scores, truth, t);
        EvalReport m = metrics(p.matrix);
        p.precision = m.precision;
        p.recall = m.recall;
        p.f1 = m.f1;
        curve.points.push_back(p);
    }
    return curve;
}

std::vector<double> default_threshold_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 19; ++i) grid.push_back(i / 20.0);
    return grid;
}

std::vector<FusionWeights> default_weight_grid() {
    std::vector<FusionWeights> grid;
    for (int i = 0; i <= 10; ++i) grid.emplace_back(1.0 - i / 10.0, i / 10.0);
    return grid;
}

ScoreTable score_with_mock(const Corpus& corpus, const DetectorConfig& config) {
    ScoreTable table;
    for (const auto& ex : corpus.examples) {
        EmailDocument doc = ex.document();
        auto flags = detect_flags(doc, config);
        LlmVerdict llm = mock_classify(doc, config.brands, config);
        table[ex.id] = ScoreRecord{heuristic_score(flags), llm.confidence, llm.verdict, llm.degraded};
    }
    return table;
}

void save_score_cache(const ScoreTable& table, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& [id, rec] : table) {
        json obj = {{"id", id}, {"heuristic", rec.heuristic}, {"degraded", rec.degraded}};
        if (rec.llm) obj["llm_confidence"] = *rec.llm;
        if (rec.llm_verdict) obj["llm_verdict"] = std::string(to_string(*rec.llm_verdict));
        out << obj.dump() << '\n';
    }
    if (!out) throw Error("cannot write " + path.string());
}

ScoreTable load_score_cache(const std::filesystem::path& path) {
    ScoreTable table;
    std::size_t line_no = 0;
    const std::string content = read_file(path);
    for (const auto& line : text::split_lines(content)) {
        ++line_no;
        if (text::trim(line.text).empty()) continue;
        json obj = json::parse(line.text, nullptr, false);
        if (obj.is_discarded() || !obj.is_object() || !obj.contains("id") || !obj["id"].is_string() ||
            !obj.contains("heuristic") || !obj["heuristic"].is_number())
            throw Error("score cache line " + std::to_string(line_no) + ": expected {id, heuristic, ...}");
        ScoreRecord rec;
        rec.heuristic = obj["heuristic"].get<double>();
        if (obj.contains("llm_confidence") && obj["llm_confidence"].is_number()) rec.llm = obj["llm_confidence"].get<double>();
        if (obj.contains("llm_verdict") && obj["llm_verdict"].is_string())
            rec.llm_verdict = parse_label(obj["llm_verdict"].get<std::string>());
        rec.degraded = obj.value("degraded", false);
        table[obj["id"].get<std::string>()] = rec;
    }
    return table;
}

TuneResult tune(const Corpus& corpus, const ScoreTable& scores, std::span<const FusionWeights> weight_grid,
                std::span<const double> threshold_grid, std::size_t k, std::uint64_t seed) {
    if (weight_grid.empty() || threshold_grid.empty()) throw std::invalid_argument("tuning grids must not be empty");
    FoldSplit split = split_stratified(corpus, k, seed);

    struct Row {
        const ScoreRecord* score;
        Label truth;
    };
    std::vector<std::vector<Row>> folds;
    std::vector<Label> all_truth;
    for (const auto& ids : split.folds) {
        auto& fold = folds.emplace_back();
        for (const auto& id : ids) {
            auto it = scores.find(id);
            if (it == scores.end()) throw Error("no score recorded for example " + id);
            Label truth = *as_label(corpus.find(id)->consensus);
            fold.push_back({&it->second, truth});
            all_truth.push_back(truth);
        }
    }
    require_both_classes(all_truth);

    struct Candidate {
        double mean_f1 = -1.0;
        double mean_precision = -1.0;
        double threshold = 0.0;
        std::size_t weight_index = 0;
    };
    std::optional<Candidate> best;
    auto better = [&](const Candidate& c) {
        if (!best) return true;
        if (c.mean_f1 != best->mean_f1) return c.mean_f1 > best->mean_f1;
        if (c.mean_precision != best->mean_precision) return c.mean_precision > best->mean_precision;
        if (c.threshold != best->threshold) return c.threshold < best->threshold;
        return weight_grid[c.weight_index].llm() < weight_grid[best->weight_index].llm();
    };

    const double n_folds = static_cast<double>(folds.size());
    for (std::size_t w = 0; w < weight_grid.size(); ++w) {
        for (double t : threshold_grid) {
            Candidate c{0.0, 0.0, t, w};
            for (const auto& fold : folds) {
                ConfusionMatrix cm;
                for (const auto& row : fold) {
                    double s = fuse(row.score->heuristic, row.score->llm, weight_grid[w]);
                    bool p = decide(s, t) == Label::scam, a = row.truth == Label::scam;
                    cm += ConfusionMatrix{p && a ? 1u : 0u, p && !a ? 1u : 0u, !p && a ? 1u : 0u, !p && !a ? 1u : 0u};
                }
                EvalReport m = metrics(cm);
                c.mean_f1 += m.f1;
                c.mean_precision += m.precision;
            }
            c.mean_f1 /= n_folds;
            c.mean_precision /= n_folds;
            if (better(c)) best = c;
        }
    }

    TuneResult result;
    result.weights = weight_grid[best->weight_index];
    result.threshold = best->threshold;
    std::vector<double> pooled_scores;
    double recall_sum = 0.0, accuracy_sum = 0.0;
    for (const auto& fold : folds) {
        std::vector<double> fs;
        std::vector<Label> ft;
        for (const auto& row : fold) {
            fs.push_back(fuse(row.score->heuristic, row.score->llm, result.weights));
            ft.push_back(row.truth);
        }
        EvalReport m = metrics(confusion_at(fs, ft, result.threshold));
        result.report.matrix += m.matrix;
        result.fold_f1.push_back(m.f1);
        recall_sum += m.recall;
        accuracy_sum += m.accuracy;
        pooled_scores.insert(pooled_scores.end(), fs.begin(), fs.end());
    }
    result.report.precision = best->mean_precision;
    result.report.recall = recall_sum / n_folds;
    result.report.f1 = best->mean_f1;
    result.report.accuracy = accuracy_sum / n_folds;
    result.report.threshold = result.threshold;
    result.report.auc = auc(pooled_scores, all_truth);
    result.report.degenerate_flags = metrics(result.report.matrix).degenerate_flags;
    return result;
}

FalsePositiveReport false_positive_report(std::span<const ResultRow> results) {
    FalsePositiveReport report;
    for (const auto& r : results) {
        if (r.verdict.decision != Label::scam || r.truth != Label::legitimate) continue;
        report.entries.push_back({r.example_id, r.verdict.confidence, r.verdict.flags, llm_summary(r.verdict.llm)});
    }
    std::stable_sort(report.entries.begin(), report.entries.end(),
                     [](const FalsePositiveEntry& a, const FalsePositiveEntry& b) { return a.confidence > b.confidence; });
    return report;
}

}  // namespace scamlens
