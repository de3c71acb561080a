#include "metajudge/ingest.hpp"

#include <set>

#include "metajudge/errors.hpp"

namespace metajudge::ingest {

using nlohmann::json;
namespace fs = std::filesystem;

std::map<std::string, std::size_t> Dataset::subset_census() const {
  std::map<std::string, std::size_t> census;
  for (const auto& sample : samples) ++census[sample.subset_key()];
  return census;
}

PreferenceLabel parse_label(const json& value) {
  if (value.is_string()) {
    const std::string& text = value.get_ref<const std::string&>();
    if (text == "A" || text == "a" || text == "1") return PreferenceLabel::A;
    if (text == "B" || text == "b" || text == "2") return PreferenceLabel::B;
    if (text == "tie" || text == "Tie" || text == "0") return PreferenceLabel::Tie;
    throw DataError("malformed_record", "unrecognized label '" + text + "'");
  }
  if (value.is_number_integer()) {
    switch (value.get<int>()) {
      case 1:
        return PreferenceLabel::A;
      case 2:
        return PreferenceLabel::B;
      case 0:
        return PreferenceLabel::Tie;
      default:
        break;
    }
    throw DataError("malformed_record",
                    "unrecognized label " + std::to_string(value.get<int>()));
  }
  throw DataError("malformed_record", "label must be a string or an integer");
}

json sample_to_json(const EvalSample& sample) {
  json record{{"id", sample.id},
              {"instruction", sample.instruction},
              {"output_a", sample.output_a},
              {"output_b", sample.output_b},
              {"label", to_string(sample.label)}};
  if (sample.subset) record["subset"] = *sample.subset;
  return record;
}

EvalSample sample_from_json(const json& record, const DatasetKind& kind) {
  if (!record.is_object()) throw DataError("malformed_record", "record is not a JSON object");

  auto required_string = [&](const char* field) -> std::string {
    auto it = record.find(field);
    if (it == record.end())
      throw DataError("malformed_record", std::string("missing field '") + field + "'");
    if (!it->is_string())
      throw DataError("malformed_record", std::string("field '") + field + "' is not a string");
    return it->get<std::string>();
  };

  EvalSample sample;
  sample.id = required_string("id");
  sample.instruction = required_string("instruction");
  sample.output_a = required_string("output_a");
  sample.output_b = required_string("output_b");

  auto label_it = record.find("label");
  if (label_it == record.end())
    throw DataError("malformed_record", "missing field 'label'");
  sample.label = parse_label(*label_it);

  auto subset_it = record.find("subset");
  if (subset_it != record.end() && !subset_it->is_null()) {
    if (!subset_it->is_string())
      throw DataError("malformed_record", "field 'subset' is not a string");
    sample.subset = subset_it->get<std::string>();
  }

  sample.dataset = kind;
  sample.validate();
  return sample;
}

namespace {

void append_records(Dataset& dataset, std::set<std::string>& seen_ids,
                    const fs::path& records_path, const DatasetKind& kind,
                    jsonio::RecordFormat format) {
  auto records = jsonio::read_records(records_path, format);
  for (std::size_t i = 0; i < records.size(); ++i) {
    EvalSample sample;
    try {
      sample = sample_from_json(records[i], kind);
    } catch (const DataError& e) {
      throw DataError(e.code(), records_path.string() + " record #" + std::to_string(i + 1) +
                                    ": " + e.what());
    }
    if (!seen_ids.insert(sample.id).second)
      throw DataError("duplicate_id", records_path.string() + " record #" +
                                          std::to_string(i + 1) + ": duplicate id '" +
                                          sample.id + "'");
    dataset.samples.push_back(std::move(sample));
  }
}

}  // namespace

Dataset load_records(const fs::path& records_path, const DatasetKind& kind,
                     jsonio::RecordFormat format) {
  Dataset dataset;
  dataset.kind = kind;
  std::set<std::string> seen_ids;
  append_records(dataset, seen_ids, records_path, kind, format);
  return dataset;
}

Dataset load_spec(const DatasetSpec& spec) {
  Dataset dataset;
  dataset.kind = spec.kind();
  std::set<std::string> seen_ids;
  for (const auto& path : spec.records_paths)
    append_records(dataset, seen_ids, path, dataset.kind, spec.format);
  return dataset;
}

void write_records(const fs::path& path, const Dataset& dataset) {
  std::vector<json> records;
  records.reserve(dataset.samples.size());
  for (const auto& sample : dataset.samples) records.push_back(sample_to_json(sample));
  jsonio::write_records_lines(path, records);
}

std::vector<DatasetSpec> read_catalog(const fs::path& catalog_path) {
  json doc;
  try {
    doc = json::parse(jsonio::read_file(catalog_path));
  } catch (const json::exception& e) {
    throw ConfigError(catalog_path.string() + ": " + e.what(), "bad_catalog");
  }

  const json* list = nullptr;
  if (doc.is_array()) {
    list = &doc;
  } else if (doc.is_object() && doc.contains("datasets") && doc["datasets"].is_array()) {
    list = &doc["datasets"];
  } else {
    throw ConfigError(catalog_path.string() + ": expected {\"datasets\": [...]} or an array",
                      "bad_catalog");
  }

  std::vector<DatasetSpec> specs;
  std::set<std::string> names;
  for (const json& entry : *list) {
    if (!entry.is_object() || !entry.contains("name") || !entry["name"].is_string())
      throw ConfigError(catalog_path.string() + ": each dataset needs a string name",
                        "bad_catalog");
    DatasetSpec spec;
    spec.name = entry["name"].get<std::string>();

    auto resolve = [&](const fs::path& rel) {
      return rel.is_absolute() ? rel : catalog_path.parent_path() / rel;
    };
    if (entry.contains("path") && entry["path"].is_string()) {
      spec.records_paths.push_back(resolve(entry["path"].get<std::string>()));
    } else if (entry.contains("paths") && entry["paths"].is_array()) {
      for (const json& item : entry["paths"]) {
        if (!item.is_string())
          throw ConfigError(catalog_path.string() + ": dataset '" + spec.name +
                                "' has a non-string entry in paths",
                            "bad_catalog");
        spec.records_paths.push_back(resolve(item.get<std::string>()));
      }
    }
    if (spec.records_paths.empty())
      throw ConfigError(catalog_path.string() + ": dataset '" + spec.name +
                            "' needs a string path or a non-empty paths array",
                        "bad_catalog");
    if (entry.contains("format"))
      spec.format = jsonio::format_from_string(entry["format"].get<std::string>());
    spec.tie_allowed = entry.value("tie_allowed", false);
    spec.rules_injection = entry.value("rules_injection", false);
    if (!names.insert(spec.name).second)
      throw ConfigError(catalog_path.string() + ": duplicate dataset name '" + spec.name + "'",
                        "bad_catalog");
    specs.push_back(std::move(spec));
  }
  return specs;
}

const DatasetSpec& find_spec(const std::vector<DatasetSpec>& specs, const std::string& name) {
  for (const auto& spec : specs)
    if (spec.name == name) return spec;
  std::string known;
  for (const auto& spec : specs) known += (known.empty() ? "" : ", ") + spec.name;
  throw ConfigError("unknown dataset '" + name + "' (known: " + known + ")", "bad_catalog");
}

Dataset load_from_catalog(const fs::path& catalog_path, const std::string& name) {
  auto specs = read_catalog(catalog_path);
  return load_spec(find_spec(specs, name));
}

}  // namespace metajudge::ingest
