#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "vlio/config.hpp"
#include "vlio/odometry.hpp"
#include "vlio/sim.hpp"
#include "vlio/trajectory.hpp"

namespace vlio {

namespace fs = std::filesystem;

enum class LogLevel { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

LogLevel log_level_from_string(std::string_view s);
void set_log_level(LogLevel level);
void log(LogLevel level, const std::string& message);

struct RunOutput {
  Trajectory estimate;
  std::vector<ScanReport> reports;
  double mean_scan_ms = 0.0;  // over scans that ran the filter
};

/// Feeds a whole dataset through the odometry in time order.
/// `on_scan` sees each report with the odometry after the scan, `on_finish`
/// the odometry after the last one. Both are optional.
RunOutput run_dataset(const RunConfig& cfg, const sim::Dataset& dataset,
                      const std::function<void(const ScanReport&, const Odometry&)>& on_scan = {},
                      const std::function<void(const Odometry&)>& on_finish = {});

/// One JSON object (single line) per scan.
std::string diagnostics_json(const ScanReport& report);

struct RunOptions {
  bool dump_covariances = false;
  bool write_map = true;
};

/// Generates the dataset for `seed` and writes it with the effective
/// scenario config (scenario.cfg) to out_dir.
sim::Dataset cmd_simulate(const sim::Scenario& scenario, std::uint64_t seed, const fs::path& out_dir);

/// Writes estimate.tum, diagnostics.jsonl, run.cfg, map.xyz and optionally
/// covariances/NNNNNN.csv.
RunOutput cmd_run(const RunConfig& cfg, const fs::path& dataset_dir, const fs::path& out_dir,
                  const RunOptions& options = {});

enum class EvalMode { kApe, kEndTime, kAll };

EvalMode eval_mode_from_string(std::string_view s);

struct EvalReport {
  bool has_ape = false;
  ApeStats ape;
  bool has_end_time = false;
  EndTimeError end_time;
};

EvalReport evaluate(const Trajectory& estimate, const Trajectory& truth, EvalMode mode,
                    double settle_window = 1.0, bool align_first = false);

/// Plain-text report to `text`; writes metrics.csv when out_dir is non-empty.
EvalReport cmd_evaluate(const fs::path& estimate_tum, const fs::path& truth_tum, EvalMode mode,
                        double settle_window, bool align_first, const fs::path& out_dir,
                        std::ostream& text);

/// One row of the ablation grid.
struct AblationSetting {
  std::string name;
  bool uncertainty = true;
  bool guided = true;
  DeviationMode deviation = DeviationMode::kMad;
};

/// Full, w/o GM, w/o UM, w/o both, then STD and LLS variants of the full method.
std::vector<AblationSetting> ablation_grid();

RunConfig apply_setting(RunConfig base, const AblationSetting& setting);

struct AblationRun {
  std::string setting;
  std::string scenario;
  std::uint64_t seed = 0;
  EndTimeError end_time;
  ApeStats ape;
  double mean_scan_ms = 0.0;
};

struct AblationRow {
  AblationSetting setting;
  std::size_t runs = 0;
  double end_trans_mean = 0.0, end_trans_std = 0.0;
  double end_rot_mean = 0.0, end_rot_std = 0.0;
  double ape_mean = 0.0, ape_std = 0.0;
  double ape_rmse_mean = 0.0, ape_rmse_std = 0.0;
};

struct AblationResult {
  std::vector<AblationRun> runs;
  std::vector<AblationRow> rows;
};

struct NamedScenario {
  std::string name;
  sim::Scenario scenario;
};

/// Runs every setting on every (scenario, seed). Writes ablation.csv and
/// ablation_runs.csv when out_dir is non-empty. Needs at least two seeds.
AblationResult cmd_ablate(const RunConfig& base, const std::vector<NamedScenario>& scenarios,
                          const std::vector<std::uint64_t>& seeds, const fs::path& out_dir,
                          const std::vector<AblationSetting>& settings = ablation_grid(),
                          double settle_window = 1.0);

}  // namespace vlio
