#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zpd/records.hpp"

namespace zpd {

inline constexpr double kDefaultNormHalfWidth = 3.0;

// Sample with its difficulty on every scale the pipeline uses.
struct CalibratedItem {
  std::string id;
  double raw = 0.0;         // mean token NLL, nats/token
  double calibrated = 0.0;  // error-aware difficulty, nats/token
  double b = 0.0;           // Rasch difficulty, logits
  bool correct = false;
};

struct DatasetStats {
  double mu = 0.0;  // mean raw_nll over the calibration subset
  double min_calibrated = 0.0;
  double max_calibrated = 0.0;
};

// Mean negative log-probability per token. Throws std::invalid_argument on an
// empty sequence or any non-finite or positive entry.
double raw_difficulty(std::span<const double> token_logprobs);

// raw + (1 - correct) * max(0, mu - raw): incorrect samples whose NLL sits
// below the dataset mean are lifted to the mean; everything else is unchanged.
double calibrate(double raw, bool correct, double mu);

// Affine min-max map of `calibrated` onto [-half_width, +half_width]. A
// constant input maps to all zeros.
std::vector<double> normalize(std::span<const double> calibrated,
                              double half_width = kDefaultNormHalfWidth);

// mu over the calibration subset (all records when `calibration_ids` is
// empty/absent), then the range of calibrated difficulty over every record.
DatasetStats compute_stats(
    const RecordSet& records,
    const std::optional<std::vector<std::string>>& calibration_ids = std::nullopt);

// Calibrates and normalizes every record, preserving record order.
std::vector<CalibratedItem> calibrate_records(
    const RecordSet& records, const DatasetStats& stats,
    double half_width = kDefaultNormHalfWidth);

}  // namespace zpd
