#pragma once

#include <string>

namespace piid {

/// Render a double with 17 significant digits ('%.17g'): round-trip safe and
/// byte-stable across runs. All CSV output goes through this.
std::string fmt_double(double x);

}  // namespace piid
