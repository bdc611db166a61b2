#pragma once

#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

namespace hazmat::text {

// Fixed-point rendering used by every line-oriented log, so output bytes do
// not depend on stream state or locale.
inline std::string fixed(double value, int precision = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, value);
    return buf;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

}  // namespace hazmat::text
