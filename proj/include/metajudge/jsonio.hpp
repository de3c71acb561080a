#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace metajudge::jsonio {

enum class RecordFormat { LinesOfRecords, SingleArray, Auto };

RecordFormat format_from_string(const std::string& text);
const char* to_string(RecordFormat format);

/// Reads a record file: one JSON object per line, or one top-level array of
/// objects. Throws DataError("malformed_record", ...) with the offending
/// line/index on any parse failure.
std::vector<nlohmann::json> read_records(const std::filesystem::path& path,
                                         RecordFormat format = RecordFormat::Auto);

/// Writes records as UTF-8 JSON lines (one object per line).
void write_records_lines(const std::filesystem::path& path,
                         const std::vector<nlohmann::json>& records);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace metajudge::jsonio
