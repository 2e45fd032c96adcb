// zpd: command-line front end for capability-aware data selection.
//
// Exit codes: 0 success, 1 input validation failure, 2 configuration error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <unistd.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "zpd/curriculum.hpp"
#include "zpd/difficulty.hpp"
#include "zpd/error.hpp"
#include "zpd/pipeline.hpp"
#include "zpd/rasch.hpp"
#include "zpd/records.hpp"
#include "zpd/selection.hpp"
#include "zpd/selection_file.hpp"
#include "zpd/synth.hpp"
#include "zpd/version.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitConfig = 2;

int g_verbosity = 1;  // 0 quiet, 1 summary, 2 detail

void note(int level, const std::string& text) {
  if (g_verbosity >= level) std::cerr << text << '\n';
}

// Writes to `<path>.tmp-<pid>` and renames over `path` on commit; the
// temporary is removed if the writer is destroyed uncommitted. "-" streams
// to stdout.
class OutputFile {
 public:
  explicit OutputFile(std::string path) : path_(std::move(path)) {
    if (path_.empty()) throw zpd::ConfigError("output path is empty");
    if (path_ == "-") return;
    temp_ = path_ + ".tmp-" + std::to_string(::getpid());
    file_.open(temp_, std::ios::binary | std::ios::trunc);
    if (!file_) throw zpd::ConfigError("cannot create output file " + path_);
  }
  OutputFile(const OutputFile&) = delete;
  OutputFile& operator=(const OutputFile&) = delete;
  ~OutputFile() {
    if (!temp_.empty() && !committed_) {
      file_.close();
      std::error_code ec;
      fs::remove(temp_, ec);
    }
  }

  std::ostream& stream() { return path_ == "-" ? std::cout : file_; }

  void commit() {
    if (path_ == "-") {
      std::cout.flush();
      return;
    }
    file_.close();
    if (!file_) throw std::runtime_error("failed writing " + path_);
    fs::rename(temp_, path_);
    committed_ = true;
  }

 private:
  std::string path_;
  std::string temp_;
  std::ofstream file_;
  bool committed_ = false;
};

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw zpd::ConfigError(std::string(what) + " path is required");
  if (!fs::is_regular_file(path)) {
    throw zpd::ConfigError(std::string(what) + " '" + path + "' does not exist");
  }
}

std::optional<std::vector<std::string>> load_id_subset(const std::string& path) {
  if (path.empty()) return std::nullopt;
  require_file(path, "calibration id file");
  std::ifstream in(path);
  return zpd::parse_id_list(in);
}

std::string fmt17(double x) {
  std::ostringstream out;
  out.precision(17);
  out << x;
  return out.str();
}

// Calibrated-item file: one {"id","raw","calibrated","b","correct"} object per line.
void write_calibrated(const std::vector<zpd::CalibratedItem>& items, std::ostream& out) {
  for (const auto& item : items) {
    nlohmann::ordered_json line = {{"id", item.id},
                                   {"raw", item.raw},
                                   {"calibrated", item.calibrated},
                                   {"b", item.b},
                                   {"correct", item.correct ? 1 : 0}};
    out << line.dump() << '\n';
  }
}

std::vector<zpd::CalibratedItem> load_calibrated(const std::string& path) {
  require_file(path, "calibrated file");
  std::ifstream in(path);
  std::vector<zpd::CalibratedItem> items;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto o = nlohmann::json::parse(text);
      zpd::CalibratedItem item;
      item.id = o.at("id").get<std::string>();
      item.raw = o.at("raw").get<double>();
      item.calibrated = o.at("calibrated").get<double>();
      item.b = o.at("b").get<double>();
      const auto r = o.at("correct").get<int>();
      if (r != 0 && r != 1) throw zpd::ValidationError("correct must be 0 or 1", {line}, "correct");
      item.correct = r == 1;
      items.push_back(std::move(item));
    } catch (const nlohmann::json::exception& e) {
      throw zpd::ValidationError(path + " line " + std::to_string(line) + ": " + e.what(),
                                 {line});
    }
  }
  if (items.empty()) throw zpd::ValidationError("calibrated file " + path + " is empty");
  return items;
}

std::string summarize(const zpd::AbilityEstimate& a) {
  return "theta=" + fmt17(a.theta) + " clamped=" + (a.clamped ? "true" : "false") +
         " iterations=" + std::to_string(a.iterations) + " count_gap=" + fmt17(a.count_gap);
}

void warn_if_clamped(const zpd::AbilityEstimate& a) {
  if (a.clamped) {
    note(1, "warning: every calibration response has the same outcome; "
            "ability clamped to the search-interval endpoint");
  }
}

void report_grid_oracle(std::span<const zpd::ResponseItem> responses,
                        const zpd::AbilityEstimate& a, double step) {
  const auto grid = zpd::estimate_ability_grid(responses, step);
  note(0, "grid-oracle: step=" + fmt17(step) + " theta=" + fmt17(grid.theta) +
              " discrepancy=" + fmt17(std::abs(grid.theta - a.theta)));
}

// Options shared by every command that runs calibration.
struct CalibrationArgs {
  std::string input;
  double norm_half_width = zpd::kDefaultNormHalfWidth;
  std::string calibration_ids;

  void attach(CLI::App* cmd, bool input_required) {
    auto* opt = cmd->add_option("-i,--input", input, "Record file (line-delimited JSON)");
    if (input_required) opt->required();
    cmd->add_option("--norm-half-width,--norm_half_width", norm_half_width,
                    "Half width L of the Rasch difficulty range [-L, L]")
        ->capture_default_str();
    cmd->add_option("--calibration-ids,--calibration_ids", calibration_ids,
                    "File of ids (one per line) forming the calibration subset");
  }

  zpd::PipelineOptions options() const {
    if (!(norm_half_width > 0.0)) throw zpd::ConfigError("norm_half_width must be > 0");
    zpd::PipelineOptions o;
    o.norm_half_width = norm_half_width;
    o.calibration_ids = load_id_subset(calibration_ids);
    return o;
  }
};

struct Inputs {
  std::vector<zpd::CalibratedItem> items;
  std::vector<zpd::ResponseItem> responses;
};

// Either a record file (calibrated here) or an already calibrated file.
Inputs load_inputs(const CalibrationArgs& args, const std::string& calibrated_path) {
  Inputs in;
  if (!calibrated_path.empty()) {
    in.items = load_calibrated(calibrated_path);
    in.responses = zpd::response_items(in.items, load_id_subset(args.calibration_ids));
    return in;
  }
  require_file(args.input, "input");
  const auto options = args.options();
  const auto records = zpd::load_records(args.input);
  const auto stats = zpd::compute_stats(records, options.calibration_ids);
  in.items = zpd::calibrate_records(records, stats, options.norm_half_width);
  in.responses = zpd::response_items(in.items, options.calibration_ids);
  note(2, "N=" + std::to_string(records.size()) + " mu=" + fmt17(stats.mu));
  return in;
}

int run_calibrate(const CalibrationArgs& args, const std::string& output) {
  require_file(args.input, "input");
  const auto options = args.options();
  const auto records = zpd::load_records(args.input);
  const auto stats = zpd::compute_stats(records, options.calibration_ids);
  const auto items = zpd::calibrate_records(records, stats, options.norm_half_width);
  OutputFile out(output);
  write_calibrated(items, out.stream());
  out.commit();
  note(1, "N=" + std::to_string(records.size()) + " mu=" + fmt17(stats.mu) +
              " min_calibrated=" + fmt17(stats.min_calibrated) +
              " max_calibrated=" + fmt17(stats.max_calibrated));
  return 0;
}

int run_estimate(const CalibrationArgs& args, const std::string& calibrated,
                 const std::string& output, bool grid_oracle, double grid_step) {
  const auto in = load_inputs(args, calibrated);
  const auto a = zpd::estimate_ability(in.responses);
  nlohmann::ordered_json result = {{"theta", a.theta},
                                   {"iterations", a.iterations},
                                   {"clamped", a.clamped},
                                   {"count_gap", a.count_gap},
                                   {"n", in.responses.size()}};
  if (grid_oracle) {
    const auto grid = zpd::estimate_ability_grid(in.responses, grid_step);
    result["grid_theta"] = grid.theta;
    result["grid_step"] = grid_step;
    result["discrepancy"] = std::abs(grid.theta - a.theta);
  }
  OutputFile out(output);
  out.stream() << result.dump() << '\n';
  out.commit();
  warn_if_clamped(a);
  note(1, summarize(a));
  return 0;
}

int run_select(const CalibrationArgs& args, const std::string& calibrated,
               const std::string& output, double rho, const std::string& mode_text,
               std::optional<double> theta_override) {
  const auto mode = zpd::parse_selection_mode(mode_text);
  zpd::budget_size(rho, 1);  // rejects a bad ratio before any file is read
  const auto in = load_inputs(args, calibrated);
  zpd::AbilityEstimate a;
  double theta = 0.0;
  if (theta_override) {
    theta = *theta_override;
  } else {
    a = zpd::estimate_ability(in.responses);
    theta = a.theta;
    warn_if_clamped(a);
  }
  const auto selection = zpd::partition(in.items, theta, rho, mode);
  OutputFile out(output);
  zpd::write_selection(selection, out.stream());
  out.commit();
  note(1, "N=" + std::to_string(in.items.size()) + " theta=" + fmt17(theta) +
              (theta_override ? " (override)" : " clamped=" + std::string(a.clamped ? "true" : "false")) +
              " mode=" + std::string(zpd::to_string(mode)) + " k=" + std::to_string(selection.k));
  return 0;
}

int run_pipeline_command(const CalibrationArgs& args, const std::string& output, double rho,
                         const std::string& mode_text, std::optional<double> theta_override,
                         bool grid_oracle, double grid_step) {
  require_file(args.input, "input");
  auto options = args.options();
  options.rho = rho;
  options.mode = zpd::parse_selection_mode(mode_text);
  options.theta_override = theta_override;
  zpd::budget_size(rho, 1);
  const auto records = zpd::load_records(args.input);
  const auto result = zpd::run_pipeline(records, options);
  OutputFile out(output);
  zpd::write_selection(result.selection, out.stream());
  out.commit();
  warn_if_clamped(result.ability);
  note(1, "N=" + std::to_string(records.size()) + " mu=" + fmt17(result.stats.mu) + " " +
              summarize(result.ability) + " k=" + std::to_string(result.selection.k));
  if (theta_override) note(1, "scored against theta override " + fmt17(*theta_override));
  if (grid_oracle) {
    report_grid_oracle(zpd::response_items(result.items, options.calibration_ids),
                       result.ability, grid_step);
  }
  return 0;
}

int run_refresh(const std::string& plan_path, const std::string& state_path, int stage,
                const std::string& output, const std::string& calibration_ids) {
  require_file(plan_path, "stage plan");
  if (state_path.empty()) throw zpd::ConfigError("state path is required");
  const auto plan = zpd::load_stage_plan(plan_path);

  zpd::RefreshState state;
  if (fs::exists(state_path)) {
    std::ifstream in(state_path);
    state = zpd::parse_refresh_state(in);
  }
  if (stage == 0) {
    // Next planned stage after the last completed one.
    for (const auto& s : plan.stages) {
      if (s.index > state.stage) {
        stage = s.index;
        break;
      }
    }
    if (stage == 0) throw zpd::ConfigError("every planned stage has already been run");
  }
  const auto& spec = plan.stage(stage);
  require_file(spec.records, "stage records");
  const auto records = zpd::load_records(spec.records);

  zpd::PipelineOptions base;
  base.norm_half_width = plan.norm_half_width;
  base.calibration_ids = load_id_subset(calibration_ids);
  const auto result = zpd::refresh(state, records, spec.rho, plan.carry_over, stage, base);

  OutputFile out(output);
  zpd::write_selection(result.selection, out.stream());
  OutputFile state_out(state_path);
  zpd::write_refresh_state(result.state, state_out.stream());
  out.commit();
  state_out.commit();
  warn_if_clamped(result.pipeline.ability);
  note(1, "stage=" + std::to_string(stage) + " N=" + std::to_string(records.size()) + " " +
              summarize(result.pipeline.ability) + " k=" + std::to_string(result.selection.k) +
              " carry_over=" + std::string(zpd::to_string(plan.carry_over)));
  return 0;
}

int run_simulate(const zpd::SynthSpec& spec, const std::string& output,
                 const std::string& truth) {
  const auto population = zpd::generate_population(spec);
  OutputFile out(output);
  zpd::write_records(population.records, out.stream());
  std::optional<OutputFile> truth_out;
  if (!truth.empty()) {
    truth_out.emplace(truth);
    zpd::write_truth(population, truth_out->stream());
  }
  out.commit();
  if (truth_out) truth_out->commit();
  note(1, "N=" + std::to_string(spec.n_items) + " theta_star=" + fmt17(spec.theta_star) +
              " accuracy=" + fmt17(zpd::empirical_accuracy(population.records)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Capability-aware training data selection (Rasch ability, ZPD scoring)"};
  app.set_version_flag("--version",
                       std::string("zpd ") + zpd::kToolVersion + " (" + zpd::kSchemaVersion + ")");
  app.set_config("--config", "", "INI/TOML file of option defaults; flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  bool quiet = false;
  int verbose = 0;
  app.add_flag("-q,--quiet", quiet, "Suppress the summary on standard error");
  app.add_flag("-v,--verbose", verbose, "More diagnostics on standard error");

  std::string output = "-";
  std::string calibrated;
  double rho = 0.1;
  std::string mode = "zpd";
  std::optional<double> theta;
  bool grid_oracle = false;
  double grid_step = 1e-4;

  auto* calibrate_cmd = app.add_subcommand("calibrate", "Write calibrated and normalized difficulties");
  CalibrationArgs calibrate_args;
  calibrate_args.attach(calibrate_cmd, true);
  calibrate_cmd->add_option("-o,--output", output, "Output path ('-' for stdout)");

  auto* estimate_cmd = app.add_subcommand("estimate", "Estimate ability by bisection");
  CalibrationArgs estimate_args;
  estimate_args.attach(estimate_cmd, false);
  estimate_cmd->add_option("--calibrated", calibrated, "Calibrated file from 'calibrate'");
  estimate_cmd->add_option("-o,--output", output, "Output path ('-' for stdout)");
  estimate_cmd->add_flag("--grid-oracle", grid_oracle, "Also run the grid-search estimator");
  estimate_cmd->add_option("--grid-step", grid_step, "Grid oracle step")->capture_default_str();

  auto add_selection_flags = [&](CLI::App* cmd, CalibrationArgs& args, bool with_calibrated) {
    args.attach(cmd, !with_calibrated);
    if (with_calibrated) {
      cmd->add_option("--calibrated", calibrated, "Calibrated file from 'calibrate'");
    }
    cmd->add_option("-o,--output", output, "Selection output path ('-' for stdout)");
    cmd->add_option("-r,--ratio", rho, "Budget ratio in (0, 1]")->capture_default_str();
    cmd->add_option("--theta", theta, "Score against this ability instead of the estimate");
  };

  auto* select_cmd = app.add_subcommand("select", "Rank by ZPD score and select the budget");
  CalibrationArgs select_args;
  add_selection_flags(select_cmd, select_args, true);
  select_cmd->add_option("--mode", mode, "easy|zpd|hard")->capture_default_str();

  auto* partition_cmd = app.add_subcommand("partition", "EASY / ZPD / HARD subsets");
  CalibrationArgs partition_args;
  add_selection_flags(partition_cmd, partition_args, true);
  partition_cmd->add_option("--mode", mode, "easy|zpd|hard")->required();

  auto* pipeline_cmd = app.add_subcommand("pipeline", "Records to selection, end to end");
  CalibrationArgs pipeline_args;
  add_selection_flags(pipeline_cmd, pipeline_args, false);
  pipeline_cmd->add_option("--mode", mode, "easy|zpd|hard")->capture_default_str();
  pipeline_cmd->add_flag("--grid-oracle", grid_oracle,
                         "Report the grid-search estimate next to the bisection");
  pipeline_cmd->add_option("--grid-step", grid_step, "Grid oracle step")->capture_default_str();

  auto* refresh_cmd = app.add_subcommand("refresh", "Run one curriculum-refresh stage");
  std::string plan_path;
  std::string state_path;
  std::string refresh_ids;
  int stage = 0;
  refresh_cmd->add_option("--plan", plan_path, "Stage configuration (JSON)")->required();
  refresh_cmd->add_option("--state", state_path, "Refresh state file (created if absent)")
      ->required();
  refresh_cmd->add_option("--stage", stage, "Stage index (default: next planned stage)");
  refresh_cmd->add_option("-o,--output", output, "Selection output path ('-' for stdout)");
  refresh_cmd->add_option("--calibration-ids,--calibration_ids", refresh_ids,
                          "File of ids forming the calibration subset");

  auto* simulate_cmd = app.add_subcommand("simulate", "Generate a synthetic Rasch population");
  zpd::SynthSpec synth;
  std::string difficulty = "uniform:-3,3";
  std::string truth;
  simulate_cmd->add_option("-n,--items", synth.n_items, "Number of items")->capture_default_str();
  simulate_cmd->add_option("--theta-star", synth.theta_star, "True ability")->capture_default_str();
  simulate_cmd->add_option("--difficulty", difficulty,
                           "uniform:a,b | normal:m,s | bimodal:m1,s1,m2,s2,w")
      ->capture_default_str();
  simulate_cmd->add_option("--noise-sd", synth.nll_noise_sd, "Pseudo-NLL noise sd")
      ->capture_default_str();
  simulate_cmd->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();
  simulate_cmd->add_option("-o,--output", output, "Record output path ('-' for stdout)");
  simulate_cmd->add_option("--truth", truth, "Sidecar ground-truth file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  g_verbosity = quiet ? 0 : 1 + verbose;

  try {
    if (*calibrate_cmd) return run_calibrate(calibrate_args, output);
    if (*estimate_cmd) {
      return run_estimate(estimate_args, calibrated, output, grid_oracle, grid_step);
    }
    if (*select_cmd) return run_select(select_args, calibrated, output, rho, mode, theta);
    if (*partition_cmd) {
      return run_select(partition_args, calibrated, output, rho, mode, theta);
    }
    if (*pipeline_cmd) {
      return run_pipeline_command(pipeline_args, output, rho, mode, theta, grid_oracle,
                                  grid_step);
    }
    if (*refresh_cmd) return run_refresh(plan_path, state_path, stage, output, refresh_ids);
    if (*simulate_cmd) {
      synth.difficulty = zpd::parse_difficulty_distribution(difficulty);
      return run_simulate(synth, output, truth);
    }
  } catch (const zpd::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const zpd::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitConfig;
}
