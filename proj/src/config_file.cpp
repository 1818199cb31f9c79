#include "scamlens/config_file.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "scamlens/errors.hpp"
#include "text_util.hpp"

namespace scamlens {

namespace {

[[noreturn]] void fail(const KeyValueEntry& e, const std::string& what) {
    throw ConfigError("config line " + std::to_string(e.line) + " (" + e.key + "): " + what);
}

}  // namespace

KeyValueFile KeyValueFile::parse(std::string_view text) {
    KeyValueFile file;
    std::size_t line_no = 0;
    for (const auto& line : text::split_lines(text)) {
        ++line_no;
        std::string_view l = text::trim(line.text);
        if (l.empty() || l.front() == '#') continue;
        auto eq = l.find('=');
        if (eq == std::string_view::npos || eq == 0)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected `key = value`");
        KeyValueEntry entry;
        entry.line = line_no;
        std::string_view key = l.substr(0, eq);
        if (key.back() == '+') {
            entry.append = true;
            key.remove_suffix(1);
        }
        entry.key = std::string(text::trim(key));
        entry.value = std::string(text::trim(l.substr(eq + 1)));
        if (entry.key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        file.entries_.push_back(std::move(entry));
    }
    return file;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) { return parse(read_file(path)); }

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double parse_number(const KeyValueEntry& e) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
    if (ec != std::errc() || ptr != e.value.data() + e.value.size()) fail(e, "expected a number");
    return v;
}

long parse_integer(const KeyValueEntry& e) {
    long v = 0;
    auto [ptr, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
    if (ec != std::errc() || ptr != e.value.data() + e.value.size()) fail(e, "expected an integer");
    return v;
}

bool parse_bool(const KeyValueEntry& e) {
    std::string v = text::to_lower(e.value);
    if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
    if (v == "false" || v == "no" || v == "0" || v == "off") return false;
    fail(e, "expected true or false");
}

std::vector<std::string> split_list(std::string_view value, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= value.size()) {
        auto end = value.find(sep, start);
        std::string_view item = text::trim(value.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
        if (!item.empty()) out.emplace_back(item);
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    return out;
}

}  // namespace scamlens
