#include "hifu/config.hpp"

#include "hifu/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

namespace hifu {

namespace {

std::string_view trim(std::string_view s) {
    const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
    while (!s.empty() && ws(s.front())) s.remove_prefix(1);
    while (!s.empty() && ws(s.back())) s.remove_suffix(1);
    return s;
}

bool valid_key(std::string_view k) {
    if (k.empty() || k.front() == '.' || k.back() == '.') return false;
    char prev = 0;
    for (char c : k) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                        c == '-' || c == '.';
        if (!ok || (c == '.' && prev == '.')) return false;
        prev = c;
    }
    return true;
}

// Drops a trailing comment that is not inside a string.
std::string_view strip_comment(std::string_view s, std::size_t line) {
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (in_str) {
            if (c == '\\') ++i;
            else if (c == '"') in_str = false;
        } else if (c == '"') {
            in_str = true;
        } else if (c == '#') {
            return s.substr(0, i);
        }
    }
    if (in_str) throw ParseError("unterminated string", line);
    return s;
}

bool parse_number(std::string_view s, double& out) {
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    if (s == "inf" || s == "-inf" || s == "nan" || s == "-nan") return false;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

std::string parse_string(std::string_view s, std::size_t line) {
    std::string out;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        char c = s[i];
        if (c == '"') throw ParseError("unexpected quote inside string", line);
        if (c == '\\') {
            if (i + 2 >= s.size()) throw ParseError("dangling escape in string", line);
            switch (s[++i]) {
                case '"': c = '"'; break;
                case '\\': c = '\\'; break;
                case 'n': c = '\n'; break;
                case 't': c = '\t'; break;
                default: throw ParseError(fmt::format("unsupported escape '\\{}'", s[i]), line);
            }
        }
        out.push_back(c);
    }
    return out;
}

}  // namespace

ConfigValue parse_value(std::string_view text, std::size_t line, bool allow_bare) {
    const std::string_view s = trim(text);
    if (s.empty()) throw ParseError("missing value", line);
    if (s == "true") return true;
    if (s == "false") return false;
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"') throw ParseError("unterminated string", line);
        return parse_string(s, line);
    }
    if (s.front() == '[') {
        if (s.back() != ']') throw ParseError("unterminated array", line);
        std::vector<double> out;
        std::string_view body = trim(s.substr(1, s.size() - 2));
        if (body.empty()) return out;
        if (body.back() == ',') body = trim(body.substr(0, body.size() - 1));
        while (true) {
            const auto comma = body.find(',');
            const std::string_view item = trim(body.substr(0, comma));
            double v = 0.0;
            if (!parse_number(item, v))
                throw ParseError(fmt::format("array element '{}' is not a number", item), line);
            out.push_back(v);
            if (comma == std::string_view::npos) break;
            body = body.substr(comma + 1);
        }
        return out;
    }
    double v = 0.0;
    if (parse_number(s, v)) return v;
    if (allow_bare) return std::string(s);
    throw ParseError(fmt::format("cannot parse value '{}'", s), line);
}

std::vector<ConfigEntry> parse_document(std::string_view text) {
    std::vector<ConfigEntry> out;
    std::set<std::string, std::less<>> seen;
    std::set<std::string, std::less<>> sections;
    std::string section;
    std::size_t line = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line;
        const std::string_view s = trim(strip_comment(raw, line));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.size() < 3 || s.back() != ']') throw ParseError("malformed section header", line);
            const std::string_view name = trim(s.substr(1, s.size() - 2));
            if (!valid_key(name)) throw ParseError(fmt::format("invalid section name '{}'", name), line);
            if (!sections.insert(std::string(name)).second)
                throw ParseError(fmt::format("section [{}] appears twice", name), line);
            section = std::string(name);
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line);
        const std::string_view key = trim(s.substr(0, eq));
        if (!valid_key(key)) throw ParseError(fmt::format("invalid key '{}'", key), line);
        std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
        if (!seen.insert(full).second) throw ParseError(fmt::format("key '{}' assigned twice", full), line);
        out.push_back({std::move(full), parse_value(s.substr(eq + 1), line), line});
    }
    return out;
}

std::string_view type_name(const ConfigValue& v) {
    switch (v.index()) {
        case 0: return "boolean";
        case 1: return "number";
        case 2: return "string";
        default: return "array";
    }
}

}  // namespace hifu
