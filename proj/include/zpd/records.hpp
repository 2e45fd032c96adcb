#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace zpd {

// Maximum |raw_nll - mean(-token_logprobs)| tolerated when a record carries
// both forms.
inline constexpr double kRawNllConsistencyTolerance = 1e-6;

// One training sample's model feedback.
//
// After a record has passed validation `raw_nll` is always populated: when
// the input only carried token log-probabilities it is derived from them.
struct SampleRecord {
  std::string id;
  double raw_nll = 0.0;                               // nats per token
  std::optional<std::vector<double>> token_logprobs;  // nats, each <= 0
  std::size_t token_count = 0;
  bool correct = false;
  std::vector<std::string> tags;
  // Fields not covered by the schema, kept verbatim so that record files can
  // be re-emitted without loss.
  nlohmann::json extra = nlohmann::json::object();
};

// Immutable, validated, ordered collection of records. File order is the
// canonical tie-break order for every downstream stage.
class RecordSet {
 public:
  // Validates every record and id uniqueness. Throws ValidationError.
  static RecordSet from_records(std::vector<SampleRecord> records,
                                std::string source = {});

  const std::vector<SampleRecord>& records() const noexcept { return records_; }
  const std::string& source() const noexcept { return source_; }
  std::size_t size() const noexcept { return records_.size(); }
  const SampleRecord& operator[](std::size_t i) const { return records_[i]; }
  auto begin() const noexcept { return records_.begin(); }
  auto end() const noexcept { return records_.end(); }

  std::optional<std::size_t> index_of(std::string_view id) const;

 private:
  RecordSet() = default;

  std::vector<SampleRecord> records_;
  std::string source_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Checks a single record's field-level invariants and fills in raw_nll from
// token_logprobs when needed. `line` is only used for error reporting.
void validate_record(SampleRecord& record, std::size_t line = 0);

// Decodes one JSON object into a record (not yet validated against the
// cross-field invariants; see validate_record).
SampleRecord record_from_json(const nlohmann::json& object, std::size_t line = 0);
nlohmann::ordered_json record_to_json(const SampleRecord& record);

// Reads a line-delimited record file. Blank lines are skipped; line numbers
// in errors are 1-based physical line numbers.
RecordSet parse_records(std::istream& input, std::string source = {});
RecordSet load_records(const std::string& path);

// Writes one object per line; raw_nll is printed with round-trip precision.
void write_records(const RecordSet& records, std::ostream& output);

// Reads one id per line (blank lines ignored).
std::vector<std::string> parse_id_list(std::istream& input);

}  // namespace zpd
