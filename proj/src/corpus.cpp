#include "scamlens/corpus.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <random>
#include <set>

#include <json.hpp>

#include "scamlens/config_file.hpp"
#include "scamlens/errors.hpp"
#include "text_util.hpp"

namespace scamlens {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 9> kScamTypeNames = {
    "phishing",        "advance_fee",   "romance",           "investment", "tech_support",
    "online_shopping", "lottery_prize", "irs_impersonation", "charity",
};

LabeledExample parse_record(const json& obj, std::size_t line, const std::filesystem::path& base_dir) {
    auto string_field = [&](const char* name) -> std::optional<std::string> {
        auto it = obj.find(name);
        if (it == obj.end() || it->is_null()) return std::nullopt;
        if (!it->is_string()) throw CorpusFormatError(line, std::string("field `") + name + "` must be a string");
        return it->get<std::string>();
    };

    LabeledExample ex;
    auto id = string_field("id");
    if (!id || id->empty()) throw CorpusFormatError(line, "missing `id`");
    ex.id = *id;

    auto text = string_field("text");
    auto eml = string_field("eml_path");
    if (text.has_value() == eml.has_value()) throw CorpusFormatError(line, "exactly one of `text` or `eml_path` is required");
    if (text) {
        ex.payload = *text;
    } else {
        RawEmail raw;
        raw.path = *eml;
        try {
            raw.bytes = read_file(base_dir / *eml);
        } catch (const Error& e) {
            throw CorpusFormatError(line, e.what());
        }
        ex.payload = std::move(raw);
    }

    if (auto st = string_field("scam_type")) {
        ex.scam_type = parse_scam_type(*st);
        if (!ex.scam_type) throw CorpusFormatError(line, "unknown scam_type `" + *st + "`");
    }

    if (auto it = obj.find("annotations"); it != obj.end() && !it->is_null()) {
        if (!it->is_array()) throw CorpusFormatError(line, "`annotations` must be an array");
        for (const auto& a : *it) {
            if (!a.is_object() || !a.contains("annotator_id") || !a.contains("label") || !a["annotator_id"].is_string() ||
                !a["label"].is_string())
                throw CorpusFormatError(line, "annotation needs string `annotator_id` and `label`");
            AnnotatorLabel label;
            label.annotator_id = a["annotator_id"].get<std::string>();
            if (label.annotator_id.empty()) throw CorpusFormatError(line, "empty annotator_id");
            auto l = parse_label(a["label"].get<std::string>());
            if (!l) throw CorpusFormatError(line, "label must be `scam` or `legitimate`");
            label.label = *l;
            ex.annotations.push_back(std::move(label));
        }
    }
    ex.consensus = aggregate_labels(ex.annotations);
    return ex;
}

}  // namespace

std::string_view to_string(ScamType t) { return kScamTypeNames[static_cast<std::size_t>(t)]; }

std::optional<ScamType> parse_scam_type(std::string_view s) {
    for (std::size_t i = 0; i < kScamTypeNames.size(); ++i) {
        if (s == kScamTypeNames[i]) return static_cast<ScamType>(i);
    }
    return std::nullopt;
}

EmailDocument LabeledExample::document() const {
    if (const auto* text = std::get_if<std::string>(&payload)) return parse_plaintext(*text);
    return parse_any(std::get<RawEmail>(payload).bytes);
}

const LabeledExample* Corpus::find(std::string_view id) const {
    auto it = std::find_if(examples.begin(), examples.end(), [&](const LabeledExample& e) { return e.id == id; });
    return it == examples.end() ? nullptr : &*it;
}

Corpus parse_corpus(std::string_view text, const std::filesystem::path& base_dir) {
    Corpus corpus;
    std::set<std::string, std::less<>> seen;
    std::size_t line_no = 0;
    for (const auto& line : text::split_lines(text)) {
        ++line_no;
        std::string_view l = text::trim(line.text);
        if (l.empty()) continue;
        json obj = json::parse(l, nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) throw CorpusFormatError(line_no, "not a JSON object");
        if (obj.contains("manifest") && !obj.contains("id")) {
            if (!obj["manifest"].is_string()) throw CorpusFormatError(line_no, "`manifest` must be a string");
            if (!corpus.source_manifest.empty()) corpus.source_manifest += '\n';
            corpus.source_manifest += obj["manifest"].get<std::string>();
            continue;
        }
        LabeledExample ex = parse_record(obj, line_no, base_dir);
        if (!seen.insert(ex.id).second) throw DuplicateId(ex.id);
        corpus.examples.push_back(std::move(ex));
    }
    return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) { return parse_corpus(read_file(path), path.parent_path()); }

std::string serialize_corpus(const Corpus& corpus) {
    std::string out;
    if (!corpus.source_manifest.empty()) out += json{{"manifest", corpus.source_manifest}}.dump() + "\n";
    for (const auto& ex : corpus.examples) {
        json obj = json::object();
        obj["id"] = ex.id;
        if (const auto* text = std::get_if<std::string>(&ex.payload))
            obj["text"] = *text;
        else
            obj["eml_path"] = std::get<RawEmail>(ex.payload).path;
        if (ex.scam_type) obj["scam_type"] = std::string(to_string(*ex.scam_type));
        json annotations = json::array();
        for (const auto& a : ex.annotations)
            annotations.push_back({{"annotator_id", a.annotator_id}, {"label", std::string(to_string(a.label))}});
        obj["annotations"] = std::move(annotations);
        obj["consensus"] = std::string(to_string(ex.consensus));
        out += obj.dump(-1, ' ', false, json::error_handler_t::replace) + "\n";
    }
    return out;
}

Consensus aggregate_labels(std::span<const AnnotatorLabel> annotations) {
    std::size_t scam = 0;
    for (const auto& a : annotations) scam += a.label == Label::scam ? 1 : 0;
    std::size_t legit = annotations.size() - scam;
    if (scam > legit) return Consensus::scam;
    if (legit > scam) return Consensus::legitimate;
    return Consensus::disputed;
}

double cohen_kappa(std::span<const Label> a, std::span<const Label> b) {
    if (a.size() != b.size()) throw LengthMismatch("label vectors differ in length");
    if (a.empty()) throw EmptyInput("no labels");
    const double n = static_cast<double>(a.size());
    std::size_t agree = 0, a_scam = 0, b_scam = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        agree += a[i] == b[i] ? 1 : 0;
        a_scam += a[i] == Label::scam ? 1 : 0;
        b_scam += b[i] == Label::scam ? 1 : 0;
    }
    double p_o = static_cast<double>(agree) / n;
    double pa = static_cast<double>(a_scam) / n, pb = static_cast<double>(b_scam) / n;
    double p_e = pa * pb + (1.0 - pa) * (1.0 - pb);
    if (p_e >= 1.0) return p_o >= 1.0 ? 1.0 : 0.0;
    return (p_o - p_e) / (1.0 - p_e);
}

std::optional<double> mean_pairwise_kappa(const Corpus& corpus) {
    // annotator -> example index -> last label
    std::map<std::string, std::map<std::size_t, Label>> by_annotator;
    for (std::size_t i = 0; i < corpus.examples.size(); ++i) {
        for (const auto& a : corpus.examples[i].annotations) by_annotator[a.annotator_id][i] = a.label;
    }
    double sum = 0.0;
    std::size_t pairs = 0;
    for (auto x = by_annotator.begin(); x != by_annotator.end(); ++x) {
        for (auto y = std::next(x); y != by_annotator.end(); ++y) {
            std::vector<Label> la, lb;
            for (const auto& [idx, label] : x->second) {
                if (auto it = y->second.find(idx); it != y->second.end()) {
                    la.push_back(label);
                    lb.push_back(it->second);
                }
            }
            if (la.empty()) continue;
            sum += cohen_kappa(la, lb);
            ++pairs;
        }
    }
    if (pairs == 0) return std::nullopt;
    return sum / static_cast<double>(pairs);
}

FoldSplit split_stratified(const Corpus& corpus, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw TooFewExamples("k must be at least 2");
    FoldSplit split;
    std::vector<std::string> scams, legits;
    for (const auto& ex : corpus.examples) {
        switch (ex.consensus) {
            case Consensus::scam: scams.push_back(ex.id); break;
            case Consensus::legitimate: legits.push_back(ex.id); break;
            case Consensus::disputed: split.excluded_disputed.push_back(ex.id); break;
        }
    }
    if (scams.size() + legits.size() < k)
        throw TooFewExamples("need at least " + std::to_string(k) + " non-disputed examples");

    // Fisher-Yates on the raw engine output, which the standard pins down;
    // std::shuffle's algorithm is implementation-defined.
    std::mt19937_64 rng(seed);
    auto shuffle = [&](std::vector<std::string>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
    };
    shuffle(scams);
    shuffle(legits);

    split.folds.resize(k);
    std::size_t position = 0;
    for (auto* group : {&scams, &legits}) {
        for (auto& id : *group) split.folds[position++ % k].push_back(std::move(id));
    }
    return split;
}

}  // namespace scamlens
