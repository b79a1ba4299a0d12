// Plain-text number formatting shared by every CSV writer.
#pragma once

#include <cstdio>
#include <string>

namespace bubble::csv {

/// 17 significant digits, '.' decimal separator regardless of locale.
inline std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace bubble::csv
