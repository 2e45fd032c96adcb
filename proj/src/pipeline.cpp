#include "zpd/pipeline.hpp"

#include <unordered_map>

#include "zpd/error.hpp"

namespace zpd {

std::vector<ResponseItem> response_items(
    std::span<const CalibratedItem> items,
    const std::optional<std::vector<std::string>>& calibration_ids) {
  std::vector<ResponseItem> responses;
  if (!calibration_ids) {
    responses.reserve(items.size());
    for (const auto& item : items) responses.push_back({item.b, item.correct});
    return responses;
  }
  if (calibration_ids->empty()) throw ConfigError("calibration subset is empty");
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) index.emplace(items[i].id, i);
  std::vector<bool> wanted(items.size(), false);
  for (const auto& id : *calibration_ids) {
    auto it = index.find(id);
    if (it == index.end()) throw ConfigError("calibration id '" + id + "' is not in the record set");
    wanted[it->second] = true;
  }
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (wanted[i]) responses.push_back({items[i].b, items[i].correct});
  }
  return responses;
}

PipelineResult run_pipeline(const RecordSet& records, const PipelineOptions& options) {
  if (!(options.norm_half_width > 0.0)) throw ConfigError("norm_half_width must be > 0");
  const std::size_t k = budget_size(options.rho, records.size());

  PipelineResult result;
  result.stats = compute_stats(records, options.calibration_ids);
  result.items = calibrate_records(records, result.stats, options.norm_half_width);
  const auto responses = response_items(result.items, options.calibration_ids);
  result.ability = estimate_ability(responses, options.bisection);
  result.theta = options.theta_override.value_or(result.ability.theta);

  if (options.exclude_from_ranking.empty()) {
    result.selection =
        partition_count(result.items, result.theta, k, options.rho, options.mode);
    return result;
  }
  std::vector<CalibratedItem> remaining;
  remaining.reserve(result.items.size());
  for (const auto& item : result.items) {
    if (!options.exclude_from_ranking.contains(item.id)) remaining.push_back(item);
  }
  if (remaining.size() < k) {
    throw ConfigError("only " + std::to_string(remaining.size()) +
                      " samples remain after exclusion but the budget needs " +
                      std::to_string(k));
  }
  result.selection = partition_count(remaining, result.theta, k, options.rho, options.mode);
  return result;
}

}  // namespace zpd
