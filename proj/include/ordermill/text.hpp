#pragma once

#include <charconv>
#include <string>

namespace ordermill {

// Shortest decimal that round-trips the exact double; integral values
// print without a trailing ".0" (std::to_chars general form).
inline std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

}  // namespace ordermill
