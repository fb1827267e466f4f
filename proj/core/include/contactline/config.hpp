#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "contactline/pde_stepper.hpp"

namespace contactline {

std::string_view to_string(Scheme scheme) noexcept;
std::string_view to_string(InitialData initial) noexcept;
std::string_view to_string(ThirdBcMode mode) noexcept;

/// Parses a JSON object of RunConfig keys; missing keys keep their defaults
/// and an empty document is the default configuration. Unknown keys, type
/// mismatches and constraint violations raise ParseError naming the key.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Every key, defaults included. parse_config(emit_config(c)) == c.
std::string emit_config(const RunConfig& config);

}  // namespace contactline
