#include "zpd/difficulty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "zpd/error.hpp"

namespace zpd {

double raw_difficulty(std::span<const double> token_logprobs) {
  if (token_logprobs.empty()) {
    throw std::invalid_argument("raw_difficulty: empty token log-probability sequence");
  }
  double sum = 0.0;
  for (double lp : token_logprobs) {
    if (!std::isfinite(lp) || lp > 0.0) {
      throw std::invalid_argument("raw_difficulty: log-probabilities must be finite and <= 0");
    }
    sum += lp;
  }
  // -0.0 would print as "-0"
  return sum == 0.0 ? 0.0 : -sum / static_cast<double>(token_logprobs.size());
}

double calibrate(double raw, bool correct, double mu) {
  if (!(raw >= 0.0) || !std::isfinite(raw) || !std::isfinite(mu)) {
    throw std::invalid_argument("calibrate: raw must be finite and >= 0, mu finite");
  }
  if (correct) return raw;
  // Same as raw + max(0, mu - raw), without the rounding in the sum.
  return std::max(raw, mu);
}

std::vector<double> normalize(std::span<const double> calibrated, double half_width) {
  if (calibrated.empty()) throw std::invalid_argument("normalize: empty input");
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw std::invalid_argument("normalize: half width must be finite and > 0");
  }
  for (double d : calibrated) {
    if (!std::isfinite(d)) throw std::invalid_argument("normalize: non-finite difficulty");
  }
  const auto [lo_it, hi_it] = std::minmax_element(calibrated.begin(), calibrated.end());
  const double lo = *lo_it;
  const double span = *hi_it - lo;
  std::vector<double> b(calibrated.size(), 0.0);
  if (span == 0.0) return b;
  for (std::size_t i = 0; i < calibrated.size(); ++i) {
    b[i] = std::clamp(-half_width + 2.0 * half_width * (calibrated[i] - lo) / span,
                      -half_width, half_width);
  }
  return b;
}

DatasetStats compute_stats(const RecordSet& records,
                           const std::optional<std::vector<std::string>>& calibration_ids) {
  DatasetStats stats;
  double sum = 0.0;
  std::size_t count = 0;
  if (calibration_ids) {
    if (calibration_ids->empty()) throw ConfigError("calibration subset is empty");
    for (const auto& id : *calibration_ids) {
      const auto idx = records.index_of(id);
      if (!idx) throw ConfigError("calibration id '" + id + "' is not in the record set");
      sum += records[*idx].raw_nll;
      ++count;
    }
  } else {
    for (const auto& r : records) sum += r.raw_nll;
    count = records.size();
  }
  stats.mu = sum / static_cast<double>(count);

  stats.min_calibrated = std::numeric_limits<double>::infinity();
  stats.max_calibrated = -std::numeric_limits<double>::infinity();
  for (const auto& r : records) {
    const double d = calibrate(r.raw_nll, r.correct, stats.mu);
    stats.min_calibrated = std::min(stats.min_calibrated, d);
    stats.max_calibrated = std::max(stats.max_calibrated, d);
  }
  return stats;
}

std::vector<CalibratedItem> calibrate_records(const RecordSet& records,
                                              const DatasetStats& stats,
                                              double half_width) {
  std::vector<CalibratedItem> items;
  items.reserve(records.size());
  std::vector<double> calibrated;
  calibrated.reserve(records.size());
  for (const auto& r : records) {
    CalibratedItem item;
    item.id = r.id;
    item.raw = r.raw_nll;
    item.calibrated = calibrate(r.raw_nll, r.correct, stats.mu);
    item.correct = r.correct;
    calibrated.push_back(item.calibrated);
    items.push_back(std::move(item));
  }
  const auto b = normalize(calibrated, half_width);
  for (std::size_t i = 0; i < items.size(); ++i) items[i].b = b[i];
  return items;
}

}  // namespace zpd
