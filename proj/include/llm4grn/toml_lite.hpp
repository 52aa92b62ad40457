#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "llm4grn/common.hpp"

namespace llm4grn {

// Minimal TOML reader covering what run configs use: [table] and
// [[array-of-tables]] headers with dotted names, bare or quoted keys,
// strings with the common escapes, integers, floats, booleans, and
// single-line arrays of those scalars. Comments start with '#' outside
// strings. Everything else is rejected with a line-numbered ParseError.
nlohmann::json parse_toml_lite(const std::string& text);

nlohmann::json load_toml_file(const std::filesystem::path& path);

}  // namespace llm4grn
