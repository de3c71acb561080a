#include "metajudge/jsonio.hpp"

#include <fstream>
#include <sstream>

#include "metajudge/errors.hpp"

namespace metajudge::jsonio {

RecordFormat format_from_string(const std::string& text) {
  if (text == "lines-of-records" || text == "jsonl") return RecordFormat::LinesOfRecords;
  if (text == "single-array" || text == "json") return RecordFormat::SingleArray;
  if (text == "auto" || text.empty()) return RecordFormat::Auto;
  throw DataError("malformed_record", "unknown record format '" + text + "'");
}

const char* to_string(RecordFormat format) {
  switch (format) {
    case RecordFormat::LinesOfRecords:
      return "lines-of-records";
    case RecordFormat::SingleArray:
      return "single-array";
    default:
      return "auto";
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("malformed_record", "cannot open file: " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("malformed_record", "cannot write file: " + path.string());
  out << content;
  if (!out) throw DataError("malformed_record", "write failed: " + path.string());
}

static std::vector<nlohmann::json> parse_lines(const std::string& content,
                                               const std::filesystem::path& path) {
  std::vector<nlohmann::json> records;
  std::istringstream in(content);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    nlohmann::json record = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (record.is_discarded() || !record.is_object())
      throw DataError("malformed_record",
                      path.string() + ":" + std::to_string(line_no) + ": not a JSON object");
    records.push_back(std::move(record));
  }
  return records;
}

static std::vector<nlohmann::json> parse_array(const std::string& content,
                                               const std::filesystem::path& path) {
  nlohmann::json root = nlohmann::json::parse(content, nullptr, /*allow_exceptions=*/false);
  if (root.is_discarded() || !root.is_array())
    throw DataError("malformed_record", path.string() + ": not a JSON array");
  std::vector<nlohmann::json> records;
  records.reserve(root.size());
  for (size_t i = 0; i < root.size(); ++i) {
    if (!root[i].is_object())
      throw DataError("malformed_record",
                      path.string() + ": element " + std::to_string(i) + " is not an object");
    records.push_back(std::move(root[i]));
  }
  return records;
}

std::vector<nlohmann::json> read_records(const std::filesystem::path& path, RecordFormat format) {
  std::string content = read_file(path);
  if (format == RecordFormat::Auto) {
    auto first = content.find_first_not_of(" \t\r\n");
    format = (first != std::string::npos && content[first] == '[') ? RecordFormat::SingleArray
                                                                   : RecordFormat::LinesOfRecords;
  }
  return format == RecordFormat::SingleArray ? parse_array(content, path)
                                             : parse_lines(content, path);
}

void write_records_lines(const std::filesystem::path& path,
                         const std::vector<nlohmann::json>& records) {
  std::ostringstream out;
  for (const auto& record : records) out << record.dump() << "\n";
  write_file(path, out.str());
}

}  // namespace metajudge::jsonio
