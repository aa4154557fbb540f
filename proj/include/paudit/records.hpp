#pragma once

// Line-delimited JSON record framing shared by every file interface:
// one JSON object per line, UTF-8, blank lines ignored.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace paudit {

using Json = nlohmann::json;

/// A parsed record plus the 1-based line it came from, for error context.
struct Record {
    Json value;
    std::size_t line = 0;
};

/// Reads every record of a line-delimited file. Throws IOError when the file
/// cannot be opened and ParseError ("<file>:<line>: ...") on malformed lines.
std::vector<Record> read_records(const std::filesystem::path& path);

/// Writes records one per line. The file is written to a sibling temporary
/// and renamed into place, so readers never see a half-written artifact.
void write_records(const std::filesystem::path& path, const std::vector<Json>& records);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

/// Field accessors that raise ParseError naming the field and record context.
std::string required_string(const Json& rec, std::string_view field, std::string_view context);
std::vector<std::string> required_string_list(const Json& rec, std::string_view field,
                                              std::string_view context);
std::optional<std::string> optional_string(const Json& rec, std::string_view field,
                                           std::string_view context);

std::string record_context(const std::filesystem::path& path, std::size_t line);

/// 64-bit FNV-1a over raw bytes. Stable across platforms.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

}  // namespace paudit
