#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace rrpipe::io {

std::ifstream open_input(const std::filesystem::path& path, bool binary = false);

/// Calls `fn(line_number, line)` for each line, 1-based, with any trailing
/// '\r' stripped.
void for_each_line(const std::filesystem::path& path,
                   const std::function<void(std::size_t, std::string_view)>& fn);

/// Writes to a sibling temporary and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

std::string_view trim(std::string_view s);

/// Parses one JSONL line into an object or throws MalformedRecord.
nlohmann::json parse_record(std::size_t line_no, std::string_view line);

/// Required non-empty string field of a JSONL record.
std::string string_field(const nlohmann::json& record, std::size_t line_no, const char* name,
                         bool allow_empty = false);

}  // namespace rrpipe::io
