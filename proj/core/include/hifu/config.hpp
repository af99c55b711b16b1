#pragma once

// Reader for the line-oriented `key = value` configuration format, a subset
// of TOML: `[section]` headers, dotted keys, `#` comments, and values that
// are numbers, booleans, double-quoted strings or flat numeric arrays.

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hifu {

using ConfigValue = std::variant<bool, double, std::string, std::vector<double>>;

struct ConfigEntry {
    std::string key;  // fully qualified, e.g. "time.dt"
    ConfigValue value;
    std::size_t line = 0;
};

/// Entries in document order. Throws ParseError (with the 1-based line) on
/// malformed lines and on keys assigned twice.
[[nodiscard]] std::vector<ConfigEntry> parse_document(std::string_view text);

/// Parses one value. With `allow_bare`, an unquoted token that is not a
/// number or boolean is read as a string (command-line overrides).
[[nodiscard]] ConfigValue parse_value(std::string_view text, std::size_t line, bool allow_bare = false);

[[nodiscard]] std::string_view type_name(const ConfigValue& v);

}  // namespace hifu
