#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace volq {

// Shortest-faithful decimal at the given number of significant digits.
// Non-finite values print as nan / inf / -inf; negative zero prints as 0.
inline std::string format_sig(double x, int digits = 12) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (x == 0.0) x = 0.0;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, x);
    return buf;
}

// Nearest double with the given significant decimal digits; used before JSON
// serialization so emitted numbers match the text formatting.
inline double round_sig(double x, int digits = 12) {
    if (!std::isfinite(x)) return x;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, x);
    return std::strtod(buf, nullptr);
}

} // namespace volq
