// SPDX-FileCopyrightText: © 2026 The stsa Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "stsa/array.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace stsa::cli {

inline constexpr int kExitClean = 0;
inline constexpr int kExitDetected = 1;
inline constexpr int kExitUsage = 2;

/// Flat `key = value` settings; '#' starts a comment.
using Settings = std::map<std::string, std::string, std::less<>>;

Settings parse_settings(std::string_view text);
Settings read_settings(const std::filesystem::path& path);

/// Parses "N:M" into n/m/mode: "2:4" keeps both slots, "1:4" gates slot 1
/// off while the array still has `physical_n` slots.
void apply_mode(ArrayConfig& config, std::string_view mode, unsigned physical_n);

/// Entry point shared by the `stsa` binary and the tests. `args` excludes
/// the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stsa::cli
