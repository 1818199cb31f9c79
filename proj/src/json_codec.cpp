#include "scamlens/json_codec.hpp"

#include <cstdio>

namespace scamlens {

namespace {

std::string fixed(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.insert(0, width - s.size(), ' ');
    return s;
}

std::string name(Label l) { return std::string(to_string(l)); }
std::string name(FlagCategory c) { return std::string(to_string(c)); }

}  // namespace

Json to_json(const RedFlag& flag) {
    Json j = {{"category", name(flag.category)}, {"evidence", flag.evidence}, {"weight", flag.weight}};
    j["offset"] = flag.offset ? Json(*flag.offset) : Json(nullptr);
    return j;
}

Json to_json(const LlmVerdict& v) {
    Json flags = Json::array();
    for (const auto& f : v.red_flags) flags.push_back({{"category", name(f.category)}, {"evidence", f.evidence}});
    return {{"verdict", name(v.verdict)},
            {"confidence", v.confidence},
            {"red_flags", std::move(flags)},
            {"degraded", v.degraded},
            {"dropped_flags", v.dropped_flags}};
}

Json to_json(const Verdict& v) {
    Json flags = Json::array();
    for (const auto& f : v.flags) flags.push_back(to_json(f));
    Json j = {{"decision", name(v.decision)},
              {"confidence", v.confidence},
              {"threshold", v.threshold_used},
              {"heuristic_score", v.heuristic_score},
              {"flags", std::move(flags)},
              {"degraded", v.degraded}};
    if (v.llm) j["llm"] = to_json(*v.llm);
    if (!v.degraded_reason.empty()) j["degraded_reason"] = v.degraded_reason;
    return j;
}

Json to_json(const ConfusionMatrix& cm) { return {{"tp", cm.tp}, {"fp", cm.fp}, {"fn", cm.fn}, {"tn", cm.tn}}; }

Json to_json(const EvalReport& r) {
    return {{"matrix", to_json(r.matrix)},   {"precision", r.precision}, {"recall", r.recall},
            {"f1", r.f1},                    {"accuracy", r.accuracy},   {"auc", r.auc},
            {"threshold", r.threshold},      {"degenerate_flags", r.degenerate_flags}};
}

Json to_json(const SweepCurve& curve) {
    Json points = Json::array();
    for (const auto& p : curve.points) {
        points.push_back({{"threshold", p.threshold},
                          {"matrix", to_json(p.matrix)},
                          {"precision", p.precision},
                          {"recall", p.recall},
                          {"f1", p.f1}});
    }
    return {{"points", std::move(points)}};
}

Json to_json(const TuneResult& t) {
    return {{"weights", {{"heuristic", t.weights.heuristic()}, {"llm", t.weights.llm()}}},
            {"threshold", t.threshold},
            {"report", to_json(t.report)},
            {"fold_f1", t.fold_f1}};
}

Json to_json(const FalsePositiveReport& report) {
    Json entries = Json::array();
    for (const auto& e : report.entries) {
        Json flags = Json::array();
        for (const auto& f : e.flags) flags.push_back(to_json(f));
        entries.push_back({{"example_id", e.example_id},
                           {"confidence", e.confidence},
                           {"flags", std::move(flags)},
                           {"llm", e.llm_summary}});
    }
    return {{"entries", std::move(entries)}};
}

std::string dump(const Json& j) { return j.dump(-1, ' ', false, Json::error_handler_t::replace); }

std::string render_text(const Verdict& v) {
    std::string out = "decision:   " + name(v.decision) + "\n";
    out += "confidence: " + fixed(v.confidence) + " (threshold " + fixed(v.threshold_used, 2) + ")\n";
    out += "heuristic:  " + fixed(v.heuristic_score) + "\n";
    if (v.llm) out += "llm:        " + name(v.llm->verdict) + " " + fixed(v.llm->confidence) + (v.llm->degraded ? " (keyword fallback)" : "") + "\n";
    if (v.degraded) out += "degraded:   " + v.degraded_reason + "\n";
    if (v.flags.empty()) {
        out += "flags:      none\n";
        return out;
    }
    out += "flags:\n";
    for (const auto& f : v.flags) {
        out += "  " + name(f.category) + "  \"" + f.evidence + "\"";
        if (f.offset) out += " @" + std::to_string(*f.offset);
        out += "\n";
    }
    return out;
}

std::string render_text(const EvalReport& r) {
    std::string out;
    out += "threshold  " + fixed(r.threshold, 2) + "\n";
    out += "           predicted scam  predicted legit\n";
    out += "scam       " + pad(std::to_string(r.matrix.tp), 14) + "  " + pad(std::to_string(r.matrix.fn), 15) + "\n";
    out += "legit      " + pad(std::to_string(r.matrix.fp), 14) + "  " + pad(std::to_string(r.matrix.tn), 15) + "\n";
    out += "precision  " + fixed(r.precision) + "\n";
    out += "recall     " + fixed(r.recall) + "\n";
    out += "f1         " + fixed(r.f1) + "\n";
    out += "accuracy   " + fixed(r.accuracy) + "\n";
    out += "auc        " + fixed(r.auc) + "\n";
    for (const auto& flag : r.degenerate_flags) out += "note       " + flag + "\n";
    return out;
}

std::string render_text(const SweepCurve& curve) {
    std::string out = "threshold     tp     fp     fn     tn  precision  recall      f1\n";
    for (const auto& p : curve.points) {
        out += pad(fixed(p.threshold, 2), 9) + pad(std::to_string(p.matrix.tp), 7) + pad(std::to_string(p.matrix.fp), 7) +
               pad(std::to_string(p.matrix.fn), 7) + pad(std::to_string(p.matrix.tn), 7) + pad(fixed(p.precision), 11) +
               pad(fixed(p.recall), 8) + pad(fixed(p.f1), 8) + "\n";
    }
    return out;
}

std::string render_text(const TuneResult& t) {
    std::string out = "weights    heuristic " + fixed(t.weights.heuristic(), 2) + ", llm " + fixed(t.weights.llm(), 2) + "\n";
    out += "fold f1   ";
    for (double f : t.fold_f1) out += " " + fixed(f);
    out += "\n";
    return out + render_text(t.report);
}

std::string render_markdown(const FalsePositiveReport& report) {
    std::string out = "# False positives\n\n";
    if (report.entries.empty()) return out + "None.\n";
    for (const auto& e : report.entries) {
        out += "## " + e.example_id + "\n\n";
        out += "- confidence: " + fixed(e.confidence) + "\n";
        out += "- llm: " + e.llm_summary + "\n";
        if (e.flags.empty()) out += "- flags: none\n";
        for (const auto& f : e.flags) out += "- " + name(f.category) + ": `" + f.evidence + "`\n";
        out += "\n";
    }
    return out;
}

}  // namespace scamlens
