#include "piid/format.hpp"

#include <cstdio>

namespace piid {

std::string fmt_double(double x) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", x);
    return buffer;
}

}  // namespace piid
