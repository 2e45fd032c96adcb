#include "zpd/curriculum.hpp"

#include <filesystem>
#include <fstream>

#include "zpd/error.hpp"
#include "zpd/version.hpp"

namespace zpd {

std::string_view to_string(CarryOver policy) {
  return policy == CarryOver::kAllowRepeat ? "allow_repeat" : "exclude_previous";
}

CarryOver parse_carry_over(std::string_view text) {
  if (text == "exclude_previous") return CarryOver::kExcludePrevious;
  if (text == "allow_repeat") return CarryOver::kAllowRepeat;
  throw ConfigError("unknown carry_over policy '" + std::string(text) +
                    "' (expected exclude_previous or allow_repeat)");
}

const StageSpec& StagePlan::stage(int index) const {
  for (const auto& s : stages) {
    if (s.index == index) return s;
  }
  throw ConfigError("stage " + std::to_string(index) + " is not in the stage plan");
}

StagePlan plan_stages(const nlohmann::json& config) {
  if (!config.is_object()) throw ConfigError("stage configuration must be an object");
  StagePlan plan;
  for (const auto& [key, value] : config.items()) {
    if (key == "carry_over") {
      if (!value.is_string()) throw ConfigError("carry_over must be a string");
      plan.carry_over = parse_carry_over(value.get<std::string>());
    } else if (key == "norm_half_width") {
      if (!value.is_number() || !(value.get<double>() > 0.0)) {
        throw ConfigError("norm_half_width must be a positive number");
      }
      plan.norm_half_width = value.get<double>();
    } else if (key != "stages") {
      throw ConfigError("unknown stage configuration key '" + key + "'");
    }
  }
  if (!config.contains("stages") || !config["stages"].is_array() ||
      config["stages"].empty()) {
    throw ConfigError("stage configuration needs a non-empty 'stages' array");
  }
  for (const auto& entry : config["stages"]) {
    if (!entry.is_object()) throw ConfigError("each stage must be an object");
    StageSpec stage;
    try {
      stage.index = entry.at("index").get<int>();
      stage.rho = entry.at("ratio").get<double>();
      stage.records = entry.at("records").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("malformed stage entry: ") + e.what());
    }
    if (!(stage.rho > 0.0 && stage.rho <= 1.0)) {
      throw ConfigError("stage " + std::to_string(stage.index) +
                        ": ratio must lie in (0, 1]");
    }
    if (stage.records.empty()) {
      throw ConfigError("stage " + std::to_string(stage.index) + ": empty records path");
    }
    if (!plan.stages.empty()) {
      const int prev = plan.stages.back().index;
      if (stage.index == prev) {
        throw ConfigError("duplicate stage index " + std::to_string(stage.index));
      }
      if (stage.index < prev) {
        throw ConfigError("stage indices must be strictly increasing");
      }
    }
    plan.stages.push_back(std::move(stage));
  }
  return plan;
}

StagePlan load_stage_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open stage configuration " + path);
  nlohmann::json config;
  try {
    config = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("stage configuration " + path + ": " + e.what());
  }
  StagePlan plan = plan_stages(config);
  const auto base = std::filesystem::path(path).parent_path();
  for (auto& stage : plan.stages) {
    const std::filesystem::path p(stage.records);
    if (p.is_relative()) stage.records = (base / p).string();
  }
  return plan;
}

std::vector<double> RefreshState::theta_history() const {
  std::vector<double> thetas;
  thetas.reserve(history.size());
  for (const auto& h : history) thetas.push_back(h.theta);
  return thetas;
}

std::unordered_set<std::string> RefreshState::selected_history() const {
  std::unordered_set<std::string> ids;
  for (const auto& h : history) ids.insert(h.selected.begin(), h.selected.end());
  return ids;
}

RefreshResult refresh(const RefreshState& state, const RecordSet& records, double rho,
                      CarryOver policy, int stage_index, const PipelineOptions& base) {
  if (stage_index == 0) stage_index = state.stage + 1;
  if (stage_index <= state.stage) {
    throw ConfigError("stage " + std::to_string(stage_index) +
                      " does not follow completed stage " + std::to_string(state.stage));
  }
  PipelineOptions options = base;
  options.rho = rho;
  options.exclude_from_ranking.clear();
  if (policy == CarryOver::kExcludePrevious) {
    options.exclude_from_ranking = state.selected_history();
  }

  RefreshResult result;
  result.pipeline = run_pipeline(records, options);
  result.selection = result.pipeline.selection;
  result.state = state;
  result.state.stage = stage_index;
  result.state.history.push_back({stage_index, result.pipeline.ability.theta,
                                  result.pipeline.ability.clamped,
                                  result.selection.selected_ids()});
  return result;
}

void write_refresh_state(const RefreshState& state, std::ostream& output) {
  nlohmann::ordered_json header = {{"schema", kRefreshStateSchema},
                                   {"stage", state.stage},
                                   {"completed", state.history.size()}};
  output << header.dump() << '\n';
  for (const auto& h : state.history) {
    nlohmann::ordered_json line = {{"stage", h.index},
                                   {"theta", h.theta},
                                   {"clamped", h.clamped},
                                   {"selected", h.selected}};
    output << line.dump() << '\n';
  }
  if (!output) throw std::runtime_error("failed writing refresh state");
}

RefreshState parse_refresh_state(std::istream& input) {
  RefreshState state;
  std::string text;
  std::size_t line = 0;
  std::size_t expected = 0;
  bool have_header = false;
  while (std::getline(input, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto object = nlohmann::json::parse(text);
      if (!have_header) {
        const auto schema = object.at("schema").get<std::string>();
        if (schema != kRefreshStateSchema) {
          throw ValidationError("refresh state schema '" + schema + "' is not supported",
                                {line}, "schema");
        }
        state.stage = object.at("stage").get<int>();
        expected = object.at("completed").get<std::size_t>();
        have_header = true;
        continue;
      }
      StageOutcome h;
      h.index = object.at("stage").get<int>();
      h.theta = object.at("theta").get<double>();
      h.clamped = object.at("clamped").get<bool>();
      h.selected = object.at("selected").get<std::vector<std::string>>();
      if (!state.history.empty() && h.index <= state.history.back().index) {
        throw ValidationError("refresh state stages are not increasing", {line}, "stage");
      }
      state.history.push_back(std::move(h));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("refresh state line " + std::to_string(line) + ": " + e.what(),
                            {line});
    }
  }
  if (!have_header) throw ValidationError("refresh state has no header line");
  if (state.history.size() != expected) {
    throw ValidationError("refresh state lists " + std::to_string(state.history.size()) +
                          " stages but the header says " + std::to_string(expected));
  }
  if (!state.history.empty() && state.history.back().index != state.stage) {
    throw ValidationError("refresh state header stage does not match its last entry");
  }
  return state;
}

}  // namespace zpd
