#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>

namespace shapereg {

/// Shortest decimal form that round-trips binary64; keeps repeated runs of
/// the same experiment byte-identical.
inline std::string format_double(double v) {
    char buf[40];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, end);
}

inline std::string format_u64(std::uint64_t v) {
    char buf[24];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, end);
}

/// RFC 4180 quoting: fields holding commas, quotes or newlines get wrapped,
/// inner quotes doubled.
inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

} // namespace shapereg
