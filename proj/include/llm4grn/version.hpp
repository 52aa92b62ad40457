#pragma once

namespace llm4grn {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace llm4grn
