// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

namespace layoutprior {

/// Reads a whole file. Paths ending in ".gz" are gunzipped transparently.
std::string read_text_file(const std::filesystem::path& path);

/// Writes a whole file, gzip-compressing when the path ends in ".gz".
void write_text_file(const std::filesystem::path& path, const std::string& content);

/// Parses JSON from a (possibly gzipped) file; syntax errors become ParseError.
nlohmann::json read_json_file(const std::filesystem::path& path);

/// Canonical serialization: sorted keys, two-space indent, trailing newline.
std::string canonical_json(const nlohmann::json& j);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace layoutprior
