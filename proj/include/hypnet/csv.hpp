#pragma once

#include <cstdio>
#include <fstream>
#include <string>

#include "hypnet/errors.hpp"

namespace hypnet::csv {

/// Round-trip formatting with '.' as decimal separator.
inline std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Shorter formatting for human-facing summaries.
inline std::string short_num(double v, int digits = 6) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

/// Opens a file for writing in binary mode (LF newlines on every platform).
inline std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw Error("cannot open '" + path + "' for writing");
    return f;
}

} // namespace hypnet::csv
