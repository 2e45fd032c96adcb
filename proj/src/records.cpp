#include "zpd/records.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "zpd/difficulty.hpp"
#include "zpd/error.hpp"

namespace zpd {
namespace {

std::string at_line(std::size_t line) {
  return line == 0 ? std::string{} : "line " + std::to_string(line) + ": ";
}

[[noreturn]] void field_error(std::size_t line, const std::string& field,
                              const std::string& what) {
  std::vector<std::size_t> lines;
  if (line != 0) lines.push_back(line);
  throw ValidationError(at_line(line) + "field '" + field + "' " + what,
                        std::move(lines), field);
}

double finite_number(const nlohmann::json& value, std::size_t line,
                     const std::string& field) {
  if (!value.is_number()) field_error(line, field, "must be a number");
  const double x = value.get<double>();
  if (!std::isfinite(x)) field_error(line, field, "must be finite");
  return x;
}

}  // namespace

SampleRecord record_from_json(const nlohmann::json& object, std::size_t line) {
  if (!object.is_object()) {
    std::vector<std::size_t> lines;
    if (line != 0) lines.push_back(line);
    throw ValidationError(at_line(line) + "expected a JSON object", std::move(lines));
  }
  SampleRecord record;
  bool has_raw = false;
  bool has_count = false;
  bool has_correct = false;
  for (const auto& [key, value] : object.items()) {
    if (key == "id") {
      if (!value.is_string()) field_error(line, key, "must be a string");
      record.id = value.get<std::string>();
    } else if (key == "raw_nll") {
      if (value.is_null()) continue;
      record.raw_nll = finite_number(value, line, key);
      has_raw = true;
    } else if (key == "token_logprobs") {
      if (value.is_null()) continue;
      if (!value.is_array()) field_error(line, key, "must be an array of numbers");
      std::vector<double> logprobs;
      logprobs.reserve(value.size());
      for (const auto& lp : value) logprobs.push_back(finite_number(lp, line, key));
      record.token_logprobs = std::move(logprobs);
    } else if (key == "token_count") {
      if (!value.is_number_integer()) field_error(line, key, "must be a positive integer");
      const auto n = value.get<std::int64_t>();
      if (n < 1) field_error(line, key, "must be a positive integer");
      record.token_count = static_cast<std::size_t>(n);
      has_count = true;
    } else if (key == "correct") {
      if (!value.is_number_integer()) field_error(line, key, "must be 0 or 1");
      const auto r = value.get<std::int64_t>();
      if (r != 0 && r != 1) field_error(line, key, "must be 0 or 1");
      record.correct = (r == 1);
      has_correct = true;
    } else if (key == "tags") {
      if (!value.is_array()) field_error(line, key, "must be an array of strings");
      for (const auto& tag : value) {
        if (!tag.is_string()) field_error(line, key, "must be an array of strings");
        record.tags.push_back(tag.get<std::string>());
      }
    } else {
      record.extra[key] = value;
    }
  }
  if (!object.contains("id")) field_error(line, "id", "is required");
  if (!has_count) field_error(line, "token_count", "is required");
  if (!has_correct) field_error(line, "correct", "is required");
  if (!has_raw && !record.token_logprobs) {
    std::vector<std::size_t> lines;
    if (line != 0) lines.push_back(line);
    throw ValidationError(at_line(line) + "one of 'raw_nll' or 'token_logprobs' is required",
                          std::move(lines), "raw_nll");
  }
  if (!has_raw) record.raw_nll = std::nan("");
  return record;
}

void validate_record(SampleRecord& record, std::size_t line) {
  if (record.id.empty()) field_error(line, "id", "must be non-empty");
  if (record.token_count < 1) field_error(line, "token_count", "must be a positive integer");
  const bool has_raw = !std::isnan(record.raw_nll);
  if (!has_raw && !record.token_logprobs) {
    field_error(line, "raw_nll", "is required when token_logprobs is absent");
  }
  if (has_raw && (!std::isfinite(record.raw_nll) || record.raw_nll < 0.0)) {
    field_error(line, "raw_nll", "must be finite and >= 0");
  }
  if (record.token_logprobs) {
    const auto& lps = *record.token_logprobs;
    if (lps.size() != record.token_count) {
      field_error(line, "token_logprobs",
                  "has length " + std::to_string(lps.size()) +
                      " but token_count is " + std::to_string(record.token_count));
    }
    for (double lp : lps) {
      if (!std::isfinite(lp) || lp > 0.0) {
        field_error(line, "token_logprobs", "entries must be finite and <= 0");
      }
    }
    const double derived = raw_difficulty(lps);
    if (has_raw && std::abs(derived - record.raw_nll) > kRawNllConsistencyTolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "is " << record.raw_nll << " but token_logprobs give " << derived;
      field_error(line, "raw_nll", msg.str());
    }
    record.raw_nll = derived;
  }
}

nlohmann::ordered_json record_to_json(const SampleRecord& record) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  out["id"] = record.id;
  out["raw_nll"] = record.raw_nll;
  if (record.token_logprobs) out["token_logprobs"] = *record.token_logprobs;
  out["token_count"] = record.token_count;
  out["correct"] = record.correct ? 1 : 0;
  if (!record.tags.empty()) out["tags"] = record.tags;
  for (const auto& [key, value] : record.extra.items()) {
    if (!out.contains(key)) out[key] = value;
  }
  return out;
}

RecordSet RecordSet::from_records(std::vector<SampleRecord> records,
                                  std::string source) {
  if (records.empty()) throw ValidationError("record set is empty");
  RecordSet set;
  set.source_ = std::move(source);
  set.index_.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    validate_record(records[i]);
    auto [it, inserted] = set.index_.emplace(records[i].id, i);
    if (!inserted) {
      throw ValidationError("duplicate id '" + records[i].id + "' at records " +
                                std::to_string(it->second + 1) + " and " +
                                std::to_string(i + 1),
                            {}, "id");
    }
  }
  set.records_ = std::move(records);
  return set;
}

std::optional<std::size_t> RecordSet::index_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

RecordSet parse_records(std::istream& input, std::string source) {
  std::vector<SampleRecord> records;
  std::unordered_map<std::string, std::size_t> first_line;
  std::string text;
  std::size_t line = 0;
  while (std::getline(input, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json object;
    try {
      object = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      // out_of_range here means a number literal overflowed a double.
      throw ValidationError(at_line(line) + "malformed JSON: " + e.what(), {line});
    }
    SampleRecord record = record_from_json(object, line);
    validate_record(record, line);
    auto [it, inserted] = first_line.emplace(record.id, line);
    if (!inserted) {
      throw ValidationError("duplicate id '" + record.id + "' on lines " +
                                std::to_string(it->second) + " and " +
                                std::to_string(line),
                            {it->second, line}, "id");
    }
    records.push_back(std::move(record));
  }
  if (input.bad()) throw ValidationError("read failure on " + source);
  if (records.empty()) throw ValidationError("no records in input " + source);
  return RecordSet::from_records(std::move(records), std::move(source));
}

RecordSet load_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open record file " + path);
  return parse_records(in, path);
}

void write_records(const RecordSet& records, std::ostream& output) {
  for (const auto& record : records) {
    output << record_to_json(record).dump() << '\n';
  }
  if (!output) throw std::runtime_error("failed writing record stream");
}

std::vector<std::string> parse_id_list(std::istream& input) {
  std::vector<std::string> ids;
  std::string text;
  while (std::getline(input, text)) {
    const auto first = text.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = text.find_last_not_of(" \t\r");
    ids.push_back(text.substr(first, last - first + 1));
  }
  return ids;
}

}  // namespace zpd
