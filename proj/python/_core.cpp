#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "scamlens/classifier.hpp"
#include "scamlens/corpus.hpp"
#include "scamlens/errors.hpp"
#include "scamlens/evaluation.hpp"
#include "scamlens/json_codec.hpp"

namespace py = pybind11;
using namespace scamlens;

namespace {

py::object to_py(const Json& j) {
    switch (j.type()) {
        case Json::value_t::null:
            return py::none();
        case Json::value_t::boolean:
            return py::bool_(j.get<bool>());
        case Json::value_t::number_integer:
            return py::int_(j.get<std::int64_t>());
        case Json::value_t::number_unsigned:
            return py::int_(j.get<std::uint64_t>());
        case Json::value_t::number_float:
            return py::float_(j.get<double>());
        case Json::value_t::string:
            return py::str(j.get_ref<const std::string&>());
        case Json::value_t::array: {
            py::list out;
            for (const auto& v : j) out.append(to_py(v));
            return out;
        }
        case Json::value_t::object: {
            py::dict out;
            for (const auto& [k, v] : j.items()) out[py::str(k)] = to_py(v);
            return out;
        }
        default:
            return py::none();
    }
}

Json url_json(const ExtractedUrl& u) {
    return {{"raw", u.raw}, {"host", u.host}, {"registrable_domain", u.registrable_domain}, {"path", u.path}, {"offset", u.source_offset}};
}

Json span_json(const std::optional<TextSpan>& s) {
    if (!s) return nullptr;
    return {{"text", s->text}, {"offset", s->offset}};
}

Json sender_json(const SenderIdentity& s) {
    return {{"display_name", s.display_name}, {"address", s.address}, {"domain", s.domain},
            {"registrable_domain", s.registrable_domain}, {"malformed", s.malformed}};
}

Json document_json(const EmailDocument& d) {
    Json urls = Json::array();
    for (const auto& u : d.urls) urls.push_back(url_json(u));
    return {{"sender", sender_json(d.sender)},
            {"reply_to", d.reply_to ? sender_json(*d.reply_to) : Json(nullptr)},
            {"subject", d.subject},
            {"body", d.body},
            {"urls", urls},
            {"salutation", span_json(d.salutation)},
            {"signoff", span_json(d.signoff)},
            {"tokens", d.tokens}};
}

std::vector<Label> labels(const std::vector<std::string>& names) {
    std::vector<Label> out;
    out.reserve(names.size());
    for (const auto& n : names) {
        auto l = parse_label(n);
        if (!l) throw py::value_error("unknown label: " + n + " (expected scam or legitimate)");
        out.push_back(*l);
    }
    return out;
}

EmailDocument ingest(const std::string& input, bool plain) { return plain ? parse_plaintext(input) : parse_any(input); }

PipelineConfig pipeline_config(const std::optional<std::string>& config_path, std::optional<double> threshold) {
    PipelineConfig cfg = config_path ? load_pipeline_config(*config_path) : PipelineConfig{};
    if (cfg.backend != BackendKind::mock) throw py::value_error("only the mock backend is available from Python");
    if (threshold) {
        if (!(*threshold >= 0.0 && *threshold <= 1.0)) throw py::value_error("threshold must be in [0, 1]");
        cfg.threshold = *threshold;
    }
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "scamlens native core";

    static py::exception<Error> base(m, "ScamlensError");
    py::register_exception<MalformedMessage>(m, "MalformedMessage", base.ptr());
    py::register_exception<EmptyInput>(m, "EmptyInput", base.ptr());
    py::register_exception<LengthMismatch>(m, "LengthMismatch", base.ptr());
    py::register_exception<OneClassOnly>(m, "OneClassOnly", base.ptr());
    py::register_exception<TooFewExamples>(m, "TooFewExamples", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<CorpusFormatError>(m, "CorpusFormatError", base.ptr());

    m.def("parse_email", [](const std::string& raw) { return to_py(document_json(parse_email(raw))); }, py::arg("raw"),
          "Parse an RFC 5322 message. Raises MalformedMessage.");
    m.def("parse_plaintext", [](const std::string& text) { return to_py(document_json(parse_plaintext(text))); }, py::arg("text"));
    m.def("extract_urls", [](const std::string& body) {
        Json out = Json::array();
        for (const auto& u : extract_urls(body)) out.push_back(url_json(u));
        return to_py(out);
    }, py::arg("body"));
    m.def("tokenize", &tokenize, py::arg("text"));

    m.def("detect_flags", [](const std::string& input, bool plain, std::optional<std::string> config_path) {
        auto cfg = pipeline_config(config_path, std::nullopt);
        Json out = Json::array();
        for (const auto& f : detect_flags(ingest(input, plain), cfg.detector)) out.push_back(to_json(f));
        return to_py(out);
    }, py::arg("input"), py::kw_only(), py::arg("plain") = false, py::arg("config_path") = py::none());

    m.def("heuristic_score", [](const std::vector<std::pair<std::string, double>>& flags) {
        std::vector<RedFlag> parsed;
        for (const auto& [name, weight] : flags) {
            auto c = parse_flag_category(name);
            if (!c) throw py::value_error("unknown flag category: " + name);
            parsed.push_back({*c, "", std::nullopt, weight});
        }
        return heuristic_score(parsed);
    }, py::arg("flags"), "Noisy-or over per-category maxima of (category, weight) pairs.");

    m.def("classify", [](const std::string& input, bool plain, std::optional<double> threshold, std::optional<std::string> config_path) {
        auto cfg = pipeline_config(config_path, threshold);
        Verdict v;
        {
            py::gil_scoped_release release;
            v = classify(ingest(input, plain), cfg);
        }
        return to_py(to_json(v));
    }, py::arg("input"), py::kw_only(), py::arg("plain") = false, py::arg("threshold") = py::none(),
          py::arg("config_path") = py::none(), "Full pipeline with the mock backend.");

    m.def("decide", [](double confidence, double threshold) { return std::string(to_string(decide(confidence, threshold))); },
          py::arg("confidence"), py::arg("threshold"));

    m.def("confusion", [](const std::vector<std::string>& predicted, const std::vector<std::string>& truth) {
        auto p = labels(predicted), t = labels(truth);
        return to_py(to_json(confusion(p, t)));
    }, py::arg("predicted"), py::arg("truth"));
    m.def("metrics", [](std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
        return to_py(to_json(metrics({tp, fp, fn, tn})));
    }, py::arg("tp"), py::arg("fp"), py::arg("fn"), py::arg("tn"));
    m.def("auc", [](const std::vector<double>& scores, const std::vector<std::string>& truth) {
        auto t = labels(truth);
        return auc(scores, t);
    }, py::arg("scores"), py::arg("truth"));
    m.def("evaluate", [](const std::vector<double>& scores, const std::vector<std::string>& truth, double threshold) {
        auto t = labels(truth);
        return to_py(to_json(evaluate(scores, t, threshold)));
    }, py::arg("scores"), py::arg("truth"), py::arg("threshold"));
    m.def("threshold_sweep", [](const std::vector<double>& scores, const std::vector<std::string>& truth,
                                std::optional<std::vector<double>> grid) {
        auto t = labels(truth);
        auto g = grid ? *grid : default_threshold_grid();
        return to_py(to_json(threshold_sweep(scores, t, g)));
    }, py::arg("scores"), py::arg("truth"), py::arg("grid") = py::none());
    m.def("cohen_kappa", [](const std::vector<std::string>& a, const std::vector<std::string>& b) {
        auto la = labels(a), lb = labels(b);
        return cohen_kappa(la, lb);
    }, py::arg("a"), py::arg("b"));

    m.def("tune_corpus", [](const std::string& path, std::size_t k, std::uint64_t seed) {
        auto corpus = load_corpus(path);
        auto scores = score_with_mock(corpus, DetectorConfig::defaults());
        auto weights = default_weight_grid();
        auto grid = default_threshold_grid();
        return to_py(to_json(tune(corpus, scores, weights, grid, k, seed)));
    }, py::arg("path"), py::kw_only(), py::arg("k") = 5, py::arg("seed") = 1,
          "Cross-validated grid search over a corpus file using mock-backend scores.");
}
