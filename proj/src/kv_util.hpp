#pragma once

// Shared bits for the flat "key = value" text files (configs, synth specs)
// and the x,y,w,h rectangle lines. Internal to src/.

#include <charconv>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace convtrack::kv {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

// Calls fn(key, value, line_no) for every "key = value" line; blank lines and
// '#' comments are skipped. Malformed lines throw with the line number.
inline void for_each_line(const std::string& text,
                          const std::function<void(std::string_view, std::string_view, int)>& fn) {
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line(text.data() + pos,
                              (eol == std::string::npos ? text.size() : eol) - pos);
        pos = (eol == std::string::npos) ? text.size() + 1 : eol + 1;
        ++line_no;
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw std::runtime_error("line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string_view key = trim(line.substr(0, eq));
        const std::string_view value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw std::runtime_error("line " + std::to_string(line_no) + ": empty key");
        }
        fn(key, value, line_no);
    }
}

inline double to_double(std::string_view s, const std::string& what) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
        throw std::runtime_error(what + ": not a number: '" + std::string(s) + "'");
    }
    return v;
}

inline long long to_int(std::string_view s, const std::string& what) {
    long long v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
        throw std::runtime_error(what + ": not an integer: '" + std::string(s) + "'");
    }
    return v;
}

inline std::uint64_t to_u64(std::string_view s, const std::string& what) {
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
        throw std::runtime_error(what + ": not an unsigned integer: '" + std::string(s) + "'");
    }
    return v;
}

inline bool to_bool(std::string_view s, const std::string& what) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw std::runtime_error(what + ": expected true or false, got '" + std::string(s) + "'");
}

} // namespace convtrack::kv
