#pragma once

namespace leafdiff {
inline constexpr const char* version_string = "leafdiff 0.1.0";
}
