#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace scamlens {

/// Binary class; scam is the positive class everywhere.
enum class Label { scam, legitimate };

/// Aggregated annotator opinion.
enum class Consensus { scam, legitimate, disputed };

inline std::string_view to_string(Label l) { return l == Label::scam ? "scam" : "legitimate"; }

inline std::string_view to_string(Consensus c) {
    switch (c) {
        case Consensus::scam: return "scam";
        case Consensus::legitimate: return "legitimate";
        default: return "disputed";
    }
}

inline std::optional<Label> parse_label(std::string_view s) {
    if (s == "scam") return Label::scam;
    if (s == "legitimate") return Label::legitimate;
    return std::nullopt;
}

inline std::optional<Label> as_label(Consensus c) {
    if (c == Consensus::scam) return Label::scam;
    if (c == Consensus::legitimate) return Label::legitimate;
    return std::nullopt;
}

}  // namespace scamlens
