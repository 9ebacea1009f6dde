#pragma once

#include <string_view>

#ifndef BGLR_VERSION
#define BGLR_VERSION "0.0.0"
#endif

namespace bglr {

inline constexpr std::string_view kVersion = BGLR_VERSION;

}  // namespace bglr
