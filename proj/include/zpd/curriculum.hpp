#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "zpd/pipeline.hpp"

namespace zpd {

// What happens to ids selected in earlier stages.
enum class CarryOver { kExcludePrevious, kAllowRepeat };

std::string_view to_string(CarryOver policy);
CarryOver parse_carry_over(std::string_view text);

struct StageSpec {
  int index = 0;
  double rho = 0.0;
  std::string records;  // record file for this stage
};

struct StagePlan {
  std::vector<StageSpec> stages;  // strictly increasing index
  CarryOver carry_over = CarryOver::kExcludePrevious;
  double norm_half_width = kDefaultNormHalfWidth;

  const StageSpec& stage(int index) const;
};

// Stage configuration document:
//
//   {
//     "carry_over": "exclude_previous" | "allow_repeat",   (optional)
//     "norm_half_width": 3.0,                               (optional)
//     "stages": [ {"index": 1, "ratio": 0.05, "records": "stage1.jsonl"}, ... ]
//   }
//
// Throws ConfigError on duplicate or non-increasing indices, ratios outside
// (0, 1], missing fields and unknown keys.
StagePlan plan_stages(const nlohmann::json& config);

// Reads a stage configuration file; relative record paths are resolved
// against the file's directory.
StagePlan load_stage_plan(const std::string& path);

struct StageOutcome {
  int index = 0;
  double theta = 0.0;
  bool clamped = false;
  std::vector<std::string> selected;  // rank order
};

struct RefreshState {
  int stage = 0;  // index of the last completed stage, 0 before any
  std::vector<StageOutcome> history;

  std::vector<double> theta_history() const;
  std::unordered_set<std::string> selected_history() const;
};

struct RefreshResult {
  Selection selection;
  RefreshState state;
  PipelineResult pipeline;
};

// Runs the full pipeline on one stage's records. Under kExcludePrevious,
// every id in state.selected_history() is removed before ranking; the budget
// stays ceil(rho * N) over this stage's records. `stage_index` must exceed
// state.stage; 0 means state.stage + 1.
RefreshResult refresh(const RefreshState& state, const RecordSet& records, double rho,
                      CarryOver policy, int stage_index = 0,
                      const PipelineOptions& base = {});

// State checkpoint: a schema header line, then one line per completed stage.
void write_refresh_state(const RefreshState& state, std::ostream& output);
RefreshState parse_refresh_state(std::istream& input);

}  // namespace zpd
