#pragma once

namespace statecap {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace statecap
