#include "scamlens/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>

#include "scamlens/annotation_store.hpp"
#include "scamlens/classifier.hpp"
#include "scamlens/config_file.hpp"
#include "scamlens/corpus.hpp"
#include "scamlens/errors.hpp"
#include "scamlens/evaluation.hpp"
#include "scamlens/json_codec.hpp"
#include "scamlens/service.hpp"

namespace scamlens {

namespace {

struct Options {
    std::string config_path;
    std::string backend;
    std::optional<double> threshold;
    bool json = false;

    std::string input;
    bool plain = false;
    std::string corpus_path;
    std::string scores_path;
    std::string scores_out;
    std::string out_path;
    std::string fp_report;
    std::string grid;
    std::size_t k = 5;
    std::uint64_t seed = 1;
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string labels_log;
};

PipelineConfig load_config(const Options& o) {
    PipelineConfig c = o.config_path.empty() ? PipelineConfig{} : load_pipeline_config(o.config_path);
    if (o.backend == "mock")
        c.backend = BackendKind::mock;
    else if (o.backend == "remote")
        c.backend = BackendKind::remote;
    if (o.threshold) c.threshold = *o.threshold;
    return c;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!(f << content)) throw Error("cannot write " + path);
}

/// Emits to --out when given, otherwise to stdout.
void emit(const Options& o, std::ostream& out, const std::string& content) {
    if (o.out_path.empty())
        out << content;
    else
        write_file(o.out_path, content);
}

struct Scored {
    std::vector<std::string> ids;
    std::vector<double> scores;
    std::vector<Label> truth;
    std::vector<ResultRow> rows;  // empty when scores came from a cache
};

/// Fused confidences for the non-disputed examples, from a live pipeline run or a score cache.
Scored score_corpus(const Corpus& corpus, const PipelineConfig& config, const Options& o) {
    Scored s;
    std::optional<ScoreTable> cache;
    std::optional<Pipeline> pipeline;
    if (!o.scores_path.empty())
        cache = load_score_cache(o.scores_path);
    else
        pipeline.emplace(config);
    for (const auto& ex : corpus.examples) {
        auto truth = as_label(ex.consensus);
        if (!truth) continue;
        double confidence = 0.0;
        if (cache) {
            auto it = cache->find(ex.id);
            if (it == cache->end()) throw Error("score cache has no entry for " + ex.id);
            confidence = fuse(it->second.heuristic, it->second.llm, config.weights);
        } else {
            Verdict v = pipeline->classify(ex.document());
            confidence = v.confidence;
            s.rows.push_back({ex.id, std::move(v), truth});
        }
        s.ids.push_back(ex.id);
        s.scores.push_back(confidence);
        s.truth.push_back(*truth);
    }
    if (s.scores.empty()) throw EmptyInput("corpus has no examples with a consensus label");
    return s;
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> grid;
    for (const auto& item : split_list(text, ',')) {
        try {
            std::size_t used = 0;
            grid.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("bad threshold in grid: " + item);
        }
    }
    return grid;
}

int cmd_scan(const Options& o, std::ostream& out) {
    std::string raw;
    if (o.input == "-")
        raw.assign(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
    else
        raw = read_file(o.input);
    EmailDocument doc = o.plain ? parse_plaintext(raw) : parse_any(raw);
    Verdict v = Pipeline(load_config(o)).classify(doc);
    out << (o.json ? dump(to_json(v)) + "\n" : render_text(v));
    return v.decision == Label::scam ? 2 : 0;
}

int cmd_batch(const Options& o, std::ostream& out) {
    Corpus corpus = load_corpus(o.corpus_path);
    PipelineConfig config = load_config(o);
    Pipeline pipeline(config);
    std::string report;
    ScoreTable table;
    for (const auto& ex : corpus.examples) {
        Verdict v = pipeline.classify(ex.document());
        if (o.json) {
            Json line = to_json(v);
            line["example_id"] = ex.id;
            report += dump(line) + "\n";
        } else {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.4f", v.confidence);
            report += ex.id + "\t" + std::string(to_string(v.decision)) + "\t" + buf + "\t" + std::to_string(v.flags.size()) + " flags\n";
        }
        std::optional<double> llm = v.llm ? std::optional(v.llm->confidence) : std::nullopt;
        std::optional<Label> llm_verdict = v.llm ? std::optional(v.llm->verdict) : std::nullopt;
        table[ex.id] = ScoreRecord{v.heuristic_score, llm, llm_verdict, v.degraded};
    }
    emit(o, out, report);
    if (!o.scores_out.empty()) save_score_cache(table, o.scores_out);
    return 0;
}

int cmd_eval(const Options& o, std::ostream& out) {
    Corpus corpus = load_corpus(o.corpus_path);
    PipelineConfig config = load_config(o);
    Scored s = score_corpus(corpus, config, o);
    EvalReport report = evaluate(s.scores, s.truth, config.threshold);
    emit(o, out, o.json ? dump(to_json(report)) + "\n" : render_text(report));
    if (!o.fp_report.empty()) {
        if (s.rows.empty()) throw Error("--fp-report needs live classification, not --scores");
        FalsePositiveReport fp = false_positive_report(s.rows);
        write_file(o.fp_report, o.fp_report.ends_with(".json") ? dump(to_json(fp)) + "\n" : render_markdown(fp));
    }
    return 0;
}

int cmd_sweep(const Options& o, std::ostream& out) {
    Corpus corpus = load_corpus(o.corpus_path);
    Scored s = score_corpus(corpus, load_config(o), o);
    std::vector<double> grid = o.grid.empty() ? default_threshold_grid() : parse_grid(o.grid);
    SweepCurve curve = threshold_sweep(s.scores, s.truth, grid);
    emit(o, out, o.json ? dump(to_json(curve)) + "\n" : render_text(curve));
    return 0;
}

int cmd_tune(const Options& o, std::ostream& out) {
    Corpus corpus = load_corpus(o.corpus_path);
    PipelineConfig config = load_config(o);
    ScoreTable scores;
    if (!o.scores_path.empty()) {
        scores = load_score_cache(o.scores_path);
    } else if (config.backend == BackendKind::mock) {
        scores = score_with_mock(corpus, config.detector);
    } else {
        throw Error("tune with the remote backend needs --scores from `batch --scores-out`");
    }
    std::vector<double> grid = o.grid.empty() ? default_threshold_grid() : parse_grid(o.grid);
    auto weights = default_weight_grid();
    TuneResult result = tune(corpus, scores, weights, grid, o.k, o.seed);
    emit(o, out, o.json ? dump(to_json(result)) + "\n" : render_text(result));
    return 0;
}

int cmd_serve(const Options& o, std::ostream& out) {
    ServiceOptions so;
    so.pipeline = load_config(o);
    if (!o.corpus_path.empty()) so.corpus = load_corpus(o.corpus_path);
    if (!o.labels_log.empty()) so.label_log = o.labels_log;
    Service service(std::move(so));
    return serve_until_signal(service, o.host, o.port, out);
}

int cmd_export_labels(const Options& o, std::ostream& out) {
    Corpus corpus = load_corpus(o.corpus_path);
    AnnotationStore store(std::move(corpus), o.labels_log.empty() ? std::nullopt : std::optional<std::filesystem::path>(o.labels_log));
    emit(o, out, serialize_corpus(store.export_corpus()));
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Scam and phishing email detector", "scamlens"};
    app.require_subcommand(1);
    Options o;

    auto add_pipeline_flags = [&](CLI::App* cmd) {
        cmd->add_option("--config", o.config_path, "Pipeline configuration file")->check(CLI::ExistingFile);
        cmd->add_option("--backend", o.backend, "LLM backend")->check(CLI::IsMember({"mock", "remote"}));
        cmd->add_option("--threshold", o.threshold, "Decision threshold")->check(CLI::Range(0.0, 1.0));
    };
    auto add_corpus = [&](CLI::App* cmd, bool required) {
        auto* opt = cmd->add_option("--corpus", o.corpus_path, "Corpus JSONL")->check(CLI::ExistingFile);
        if (required) opt->required();
    };

    auto* scan = app.add_subcommand("scan", "Classify one message");
    scan->add_option("input", o.input, "Message file, or - for stdin")->required();
    scan->add_flag("--plain", o.plain, "Treat input as plain text rather than RFC 5322");
    scan->add_flag("--json", o.json, "Print the verdict as JSON");
    add_pipeline_flags(scan);

    auto* batch = app.add_subcommand("batch", "Classify every message in a corpus");
    add_corpus(batch, true);
    add_pipeline_flags(batch);
    batch->add_flag("--json", o.json, "One JSON verdict per line");
    batch->add_option("--out", o.out_path, "Write results here instead of stdout");
    batch->add_option("--scores-out", o.scores_out, "Write a score cache for eval/sweep/tune");

    auto* eval = app.add_subcommand("eval", "Evaluate on a labeled corpus");
    add_corpus(eval, true);
    add_pipeline_flags(eval);
    eval->add_flag("--json", o.json, "Print the report as JSON");
    eval->add_option("--scores", o.scores_path, "Score cache from batch --scores-out")->check(CLI::ExistingFile);
    eval->add_option("--out", o.out_path, "Write the report here");
    eval->add_option("--fp-report", o.fp_report, "Write the false-positive review (.md or .json)");

    auto* sweep = app.add_subcommand("sweep", "Metrics across a threshold grid");
    add_corpus(sweep, true);
    add_pipeline_flags(sweep);
    sweep->add_flag("--json", o.json, "Print the curve as JSON");
    sweep->add_option("--scores", o.scores_path, "Score cache")->check(CLI::ExistingFile);
    sweep->add_option("--grid", o.grid, "Comma-separated ascending thresholds");
    sweep->add_option("--out", o.out_path, "Write the curve here");

    auto* tune_cmd = app.add_subcommand("tune", "Cross-validated search over fusion weights and threshold");
    add_corpus(tune_cmd, true);
    add_pipeline_flags(tune_cmd);
    tune_cmd->add_flag("--json", o.json, "Print the result as JSON");
    tune_cmd->add_option("--scores", o.scores_path, "Score cache")->check(CLI::ExistingFile);
    tune_cmd->add_option("--grid", o.grid, "Comma-separated ascending thresholds");
    tune_cmd->add_option("--k", o.k, "Folds")->check(CLI::Range(2, 1000));
    tune_cmd->add_option("--seed", o.seed, "Fold shuffle seed");
    tune_cmd->add_option("--out", o.out_path, "Write the result here");

    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    add_corpus(serve, false);
    add_pipeline_flags(serve);
    serve->add_option("--host", o.host, "Bind address");
    serve->add_option("--port", o.port, "Port, 0 for any")->check(CLI::Range(0, 65535));
    serve->add_option("--labels-log", o.labels_log, "Append-only label event log");

    auto* export_cmd = app.add_subcommand("export-labels", "Corpus JSONL with the effective labels");
    add_corpus(export_cmd, true);
    export_cmd->add_option("--labels-log", o.labels_log, "Label event log to replay");
    export_cmd->add_option("--out", o.out_path, "Write here instead of stdout");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*scan) return cmd_scan(o, out);
        if (*batch) return cmd_batch(o, out);
        if (*eval) return cmd_eval(o, out);
        if (*sweep) return cmd_sweep(o, out);
        if (*tune_cmd) return cmd_tune(o, out);
        if (*serve) return cmd_serve(o, out);
        if (*export_cmd) return cmd_export_labels(o, out);
    } catch (const CorpusFormatError& e) {
        err << "error: " << o.corpus_path << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace scamlens
