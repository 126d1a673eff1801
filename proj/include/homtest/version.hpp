#pragma once

namespace homtest {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace homtest
