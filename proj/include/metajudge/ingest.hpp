#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "metajudge/core.hpp"
#include "metajudge/jsonio.hpp"

namespace metajudge::ingest {

// One entry of a dataset catalog (datasets.json): where the records live and
// how the dataset behaves. A dataset may span several record files; they load
// in the listed order into one sample sequence.
struct DatasetSpec {
  std::string name;
  std::vector<std::filesystem::path> records_paths;  // resolved against the catalog's directory
  jsonio::RecordFormat format = jsonio::RecordFormat::Auto;
  bool tie_allowed = false;
  bool rules_injection = false;

  DatasetKind kind() const { return DatasetKind{name, tie_allowed, rules_injection}; }
};

struct Dataset {
  DatasetKind kind;
  std::vector<EvalSample> samples;

  // Sample count per subset key; untagged samples group under "(none)".
  // The counts always sum to samples.size().
  std::map<std::string, std::size_t> subset_census() const;
};

// Accepts the label aliases "A"/"a"/"1", "B"/"b"/"2", "tie"/"Tie"/"0", as
// strings or bare numbers. Throws DataError("malformed_record") otherwise.
PreferenceLabel parse_label(const nlohmann::json& value);

// Canonical record form: id, instruction, output_a, output_b, label
// ("A"/"B"/"Tie"), and subset when tagged.
nlohmann::json sample_to_json(const EvalSample& sample);
EvalSample sample_from_json(const nlohmann::json& record, const DatasetKind& kind);

// Loads and validates every record; throws DataError with the file and record
// index on malformed records, illegal ties, or duplicate ids.
Dataset load_records(const std::filesystem::path& records_path, const DatasetKind& kind,
                     jsonio::RecordFormat format = jsonio::RecordFormat::Auto);

// Serializes as JSON lines in canonical record form; load_records round-trips.
void write_records(const std::filesystem::path& path, const Dataset& dataset);

// Loads every file of the spec in order; duplicate ids across files are
// rejected like duplicates within one file.
Dataset load_spec(const DatasetSpec& spec);

// datasets.json: {"datasets": [ {name, path | paths, format?, tie_allowed?,
// rules_injection?} ... ]} (or a bare top-level array). `path` is a single
// string, `paths` an array of strings.
std::vector<DatasetSpec> read_catalog(const std::filesystem::path& catalog_path);
const DatasetSpec& find_spec(const std::vector<DatasetSpec>& specs, const std::string& name);
Dataset load_from_catalog(const std::filesystem::path& catalog_path, const std::string& name);

}  // namespace metajudge::ingest
