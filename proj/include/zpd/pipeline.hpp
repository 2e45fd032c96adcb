#pragma once

#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "zpd/difficulty.hpp"
#include "zpd/rasch.hpp"
#include "zpd/records.hpp"
#include "zpd/selection.hpp"

namespace zpd {

struct PipelineOptions {
  double rho = 0.1;
  double norm_half_width = kDefaultNormHalfWidth;
  // Subset used for mu and for ability estimation; all records when unset.
  std::optional<std::vector<std::string>> calibration_ids;
  SelectionMode mode = SelectionMode::kZpd;
  // What-if ability: scores against this theta instead of the estimate.
  std::optional<double> theta_override;
  BisectionOptions bisection;
  // Ids dropped after calibration and estimation, before ranking. The
  // budget is still ceil(rho * N) over the full record set.
  std::unordered_set<std::string> exclude_from_ranking;
};

struct PipelineResult {
  DatasetStats stats;
  std::vector<CalibratedItem> items;
  AbilityEstimate ability;
  double theta = 0.0;  // the ability the selection was scored against
  Selection selection;
};

// Response pairs for the calibration subset (all items when unset), in item
// order.
std::vector<ResponseItem> response_items(
    std::span<const CalibratedItem> items,
    const std::optional<std::vector<std::string>>& calibration_ids = std::nullopt);

// stats -> calibrate -> normalize -> estimate ability -> score -> select.
PipelineResult run_pipeline(const RecordSet& records, const PipelineOptions& options);

}  // namespace zpd
