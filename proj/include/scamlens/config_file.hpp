#pragma once

// Line-oriented `key = value` configuration files.
//
//   # comment
//   threshold = 0.5
//   lexicon.urgency += act now | final notice
//   brand = Rackspace: rackspace.com, rackspace.co.uk
//
// `=` replaces a value (or a whole list), `+=` appends to a list.

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace scamlens {

struct KeyValueEntry {
    std::string key;
    std::string value;
    bool append = false;
    std::size_t line = 0;
};

class KeyValueFile {
public:
    static KeyValueFile parse(std::string_view text);
    static KeyValueFile load(const std::filesystem::path& path);

    const std::vector<KeyValueEntry>& entries() const noexcept { return entries_; }

private:
    std::vector<KeyValueEntry> entries_;
};

double parse_number(const KeyValueEntry& entry);
long parse_integer(const KeyValueEntry& entry);
bool parse_bool(const KeyValueEntry& entry);

/// Splits on `sep`, trimming items and dropping empty ones.
std::vector<std::string> split_list(std::string_view value, char sep);

std::string read_file(const std::filesystem::path& path);

}  // namespace scamlens
