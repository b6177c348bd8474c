// Text formatting helpers shared by the CSV writers and reports.
#pragma once

#include <charconv>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fanet {

// Shortest decimal string that parses back to exactly the same double.
// Plain decimal notation is preferred; scientific output from to_chars is
// re-rendered in fixed notation at increasing precision until it round-trips.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    std::string s(buf, res.ptr);
    if (s.find('e') == std::string::npos && s.find('E') == std::string::npos) return s;
    for (int prec = 0; prec <= 40; ++prec) {
        char fixed[80];
        int n = std::snprintf(fixed, sizeof(fixed), "%.*f", prec, v);
        if (n <= 0 || n >= static_cast<int>(sizeof(fixed))) break;
        double back = 0.0;
        auto r = std::from_chars(fixed, fixed + n, back);
        if (r.ec == std::errc() && back == v) return std::string(fixed, n);
    }
    return s;  // extreme magnitudes keep the scientific form
}

// CSV cell form: round-trip exact, padded with trailing zeros to at least
// nine significant digits so files are stable under tools that re-round.
inline std::string format_csv_value(double v) {
    std::string s = format_double(v);
    if (s.find('e') != std::string::npos || s.find('E') != std::string::npos) return s;
    std::size_t begin = (!s.empty() && s[0] == '-') ? 1 : 0;
    int significant = 0;
    bool leading = true;
    bool has_point = false;
    for (std::size_t i = begin; i < s.size(); ++i) {
        if (s[i] == '.') {
            has_point = true;
            continue;
        }
        if (leading && s[i] == '0') continue;
        leading = false;
        ++significant;
    }
    if (significant == 0) significant = 1;  // "0" and "0.0"
    if (significant >= 9) return s;
    if (!has_point) s += '.';
    s.append(static_cast<std::size_t>(9 - significant), '0');
    return s;
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw std::runtime_error("bad numeric field: '" + std::string(s) + "'");
    return v;
}

inline long long parse_int(std::string_view s) {
    long long v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw std::runtime_error("bad integer field: '" + std::string(s) + "'");
    return v;
}

// "98.33%" style used by the human-readable summaries.
inline std::string format_percent(double frac) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f%%", frac * 100.0);
    return buf;
}

inline std::string format_fixed(double v, int prec) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
    return buf;
}

}  // namespace fanet
