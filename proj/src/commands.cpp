#include "vlio/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "vlio/error.hpp"
#include "vlio/io.hpp"

namespace vlio {

namespace {

LogLevel g_log_level = LogLevel::kWarn;

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  return out;
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string() + ": " + ec.message());
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

void mean_std(const std::vector<double>& v, double& mean, double& sd) {
  mean = v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
}

}  // namespace

LogLevel log_level_from_string(std::string_view s) {
  if (s == "error") return LogLevel::kError;
  if (s == "warn") return LogLevel::kWarn;
  if (s == "info") return LogLevel::kInfo;
  if (s == "debug") return LogLevel::kDebug;
  throw Error(ErrorCode::kConfigError, "unknown log level '" + std::string(s) + "'");
}

void set_log_level(LogLevel level) { g_log_level = level; }

void log(LogLevel level, const std::string& message) {
  static constexpr const char* kNames[] = {"error", "warn", "info", "debug"};
  if (static_cast<int>(level) > static_cast<int>(g_log_level)) return;
  std::cerr << "[" << kNames[static_cast<int>(level)] << "] " << message << '\n';
}

// ---------------------------------------------------------------- run

RunOutput run_dataset(const RunConfig& cfg, const sim::Dataset& dataset,
                      const std::function<void(const ScanReport&, const Odometry&)>& on_scan,
                      const std::function<void(const Odometry&)>& on_finish) {
  Odometry odom(cfg);
  RunOutput out;
  std::size_t next_imu = 0;
  double total_ms = 0.0;
  std::size_t timed = 0;
  for (const RawScan& scan : dataset.scans) {
    double max_dt = 0.0;
    for (const RawPoint& p : scan.points) max_dt = std::max(max_dt, p.dt);
    // Feed IMU through the first sample at or after the scan end.
    while (next_imu < dataset.imu.size()) {
      odom.add_imu(dataset.imu[next_imu]);
      if (dataset.imu[next_imu++].t >= scan.t0 + max_dt) break;
    }
    ScanReport rep;
    try {
      rep = odom.process_scan(scan);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kWindowTooShort) throw;
      log(LogLevel::kWarn, "scan at t=" + std::to_string(scan.t0) + " dropped: " + e.what());
      continue;
    }
    if (rep.status == ScanStatus::kNoValidMatches) {
      log(LogLevel::kWarn, "scan " + std::to_string(rep.index) + ": no valid matches, kept prior");
    }
    if (rep.status != ScanStatus::kSkipped) {
      out.estimate.push_back({rep.t0, rep.state.pose()});
    }
    if (rep.status == ScanStatus::kUpdated || rep.status == ScanStatus::kNoValidMatches) {
      total_ms += rep.timing.total_ms;
      ++timed;
    }
    if (on_scan) on_scan(rep, odom);
    out.reports.push_back(rep);
  }
  out.mean_scan_ms = timed ? total_ms / static_cast<double>(timed) : 0.0;
  if (on_finish) on_finish(odom);
  return out;
}

std::string diagnostics_json(const ScanReport& r) {
  const auto v3 = [](const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); };
  nlohmann::json j;
  j["scan"] = r.index;
  j["t0"] = r.t0;
  j["status"] = std::string(to_string(r.status));
  j["raw_points"] = r.raw_points;
  j["points"] = r.points;
  j["iterations"] = r.iterations;
  j["valid_matches"] = r.valid;
  j["mean_R"] = r.mean_weight;
  j["converged"] = r.converged;
  j["k_omega"] = v3(r.k_omega);
  j["k_v"] = v3(r.k_v);
  j["map_size"] = r.map_size;
  j["timing_ms"] = {{"propagate", r.timing.propagate_ms},
                    {"undistort", r.timing.undistort_ms},
                    {"uncertainty", r.timing.uncertainty_ms},
                    {"update", r.timing.update_ms},
                    {"map", r.timing.map_ms},
                    {"total", r.timing.total_ms}};
  return j.dump();
}

sim::Dataset cmd_simulate(const sim::Scenario& scenario, std::uint64_t seed,
                          const fs::path& out_dir) {
  make_dir(out_dir);
  sim::Dataset ds = sim::generate_dataset(scenario, seed);
  io::save_dataset(out_dir, ds);
  std::ofstream cfg = open_out(out_dir / "scenario.cfg");
  cfg << "# seed " << seed << '\n' << emit_scenario(scenario);
  log(LogLevel::kInfo, "wrote " + std::to_string(ds.scans.size()) + " scans and " +
                           std::to_string(ds.imu.size()) + " IMU samples to " + out_dir.string());
  return ds;
}

RunOutput cmd_run(const RunConfig& cfg, const fs::path& dataset_dir, const fs::path& out_dir,
                  const RunOptions& options) {
  const sim::Dataset ds = io::load_dataset(dataset_dir);
  make_dir(out_dir);
  if (options.dump_covariances) make_dir(out_dir / "covariances");
  {
    std::ofstream eff = open_out(out_dir / "run.cfg");
    eff << emit_run_config(cfg);
  }
  std::ofstream diag = open_out(out_dir / "diagnostics.jsonl");
  RunOutput out = run_dataset(cfg, ds, [&](const ScanReport& rep, const Odometry& odom) {
    diag << diagnostics_json(rep) << '\n';
    if (options.dump_covariances && rep.status != ScanStatus::kSkipped) {
      std::ofstream cov = open_out(out_dir / "covariances" /
                                   (io::scan_file_name(rep.index).substr(0, 6) + ".csv"));
      io::write_covariance_csv(cov, odom.last_scan());
    }
  }, [&](const Odometry& odom) {
    if (!options.write_map) return;
    std::ofstream map = open_out(out_dir / "map.xyz");
    odom.map().write_ascii(map);
  });
  io::write_tum_file(out_dir / "estimate.tum", out.estimate);
  log(LogLevel::kInfo, "processed " + std::to_string(out.reports.size()) + " scans, mean " +
                           fmt("%.2f", out.mean_scan_ms) + " ms/scan");
  return out;
}

// ---------------------------------------------------------------- evaluate

EvalMode eval_mode_from_string(std::string_view s) {
  if (s == "ape") return EvalMode::kApe;
  if (s == "end_time") return EvalMode::kEndTime;
  if (s == "all") return EvalMode::kAll;
  throw Error(ErrorCode::kConfigError, "unknown evaluation mode '" + std::string(s) + "'");
}

EvalReport evaluate(const Trajectory& estimate, const Trajectory& truth, EvalMode mode,
                    double settle_window, bool align_first) {
  EvalReport r;
  if (mode == EvalMode::kApe || mode == EvalMode::kAll) {
    r.ape = absolute_pose_error(estimate, truth, 0.005, align_first);
    r.has_ape = true;
  }
  if (mode == EvalMode::kEndTime || mode == EvalMode::kAll) {
    r.end_time = end_time_error(estimate, truth, settle_window);
    r.has_end_time = true;
  }
  return r;
}

EvalReport cmd_evaluate(const fs::path& estimate_tum, const fs::path& truth_tum, EvalMode mode,
                        double settle_window, bool align_first, const fs::path& out_dir,
                        std::ostream& text) {
  const Trajectory est = io::read_tum_file(estimate_tum);
  const Trajectory gt = io::read_tum_file(truth_tum);
  const EvalReport r = evaluate(est, gt, mode, settle_window, align_first);
  std::vector<std::pair<std::string, double>> metrics;
  if (r.has_ape) {
    metrics.emplace_back("ape_count", static_cast<double>(r.ape.count));
    metrics.emplace_back("ape_mean_m", r.ape.mean);
    metrics.emplace_back("ape_rmse_m", r.ape.rmse);
    metrics.emplace_back("ape_max_m", r.ape.max);
  }
  if (r.has_end_time) {
    metrics.emplace_back("end_time_trans_m", r.end_time.trans_err);
    metrics.emplace_back("end_time_rot_deg", r.end_time.rot_err);
  }
  for (const auto& [name, value] : metrics) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%-18s %.6g\n", name.c_str(), value);
    text << buf;
  }
  if (!out_dir.empty()) {
    make_dir(out_dir);
    std::ofstream csv = open_out(out_dir / "metrics.csv");
    csv << "metric,value\n";
    for (const auto& [name, value] : metrics) csv << name << ',' << fmt("%.9g", value) << '\n';
  }
  return r;
}

// ---------------------------------------------------------------- ablate

std::vector<AblationSetting> ablation_grid() {
  return {
      {"full", true, true, DeviationMode::kMad},
      {"wo_gm", true, false, DeviationMode::kMad},
      {"wo_um", false, true, DeviationMode::kMad},
      {"wo_both", false, false, DeviationMode::kMad},
      {"full_std", true, true, DeviationMode::kStd},
      {"full_lls", true, true, DeviationMode::kLls},
  };
}

RunConfig apply_setting(RunConfig base, const AblationSetting& setting) {
  base.uncertainty_enabled = setting.uncertainty;
  base.ikf.guided_matching = setting.guided;
  base.uncertainty.deviation_mode = setting.deviation;
  return base;
}

AblationResult cmd_ablate(const RunConfig& base, const std::vector<NamedScenario>& scenarios,
                          const std::vector<std::uint64_t>& seeds, const fs::path& out_dir,
                          const std::vector<AblationSetting>& settings, double settle_window) {
  if (seeds.size() < 2) throw Error(ErrorCode::kConfigError, "ablation needs at least 2 seeds");
  if (scenarios.empty()) throw Error(ErrorCode::kConfigError, "ablation needs a scenario");
  AblationResult result;
  for (const NamedScenario& sc : scenarios) {
    for (std::uint64_t seed : seeds) {
      const sim::Dataset ds = sim::generate_dataset(sc.scenario, seed);
      for (const AblationSetting& setting : settings) {
        const RunOutput run = run_dataset(apply_setting(base, setting), ds);
        AblationRun ar;
        ar.setting = setting.name;
        ar.scenario = sc.name;
        ar.seed = seed;
        ar.end_time = end_time_error(run.estimate, ds.truth, settle_window);
        ar.ape = absolute_pose_error(run.estimate, ds.truth);
        ar.mean_scan_ms = run.mean_scan_ms;
        log(LogLevel::kInfo, sc.name + " seed " + std::to_string(seed) + " " + setting.name +
                                 ": end " + fmt("%.4f", ar.end_time.trans_err) + " m, APE " +
                                 fmt("%.4f", ar.ape.mean) + " m");
        result.runs.push_back(ar);
      }
    }
  }
  for (const AblationSetting& setting : settings) {
    std::vector<double> et, er, am, ar;
    for (const AblationRun& run : result.runs) {
      if (run.setting != setting.name) continue;
      et.push_back(run.end_time.trans_err);
      er.push_back(run.end_time.rot_err);
      am.push_back(run.ape.mean);
      ar.push_back(run.ape.rmse);
    }
    AblationRow row;
    row.setting = setting;
    row.runs = et.size();
    mean_std(et, row.end_trans_mean, row.end_trans_std);
    mean_std(er, row.end_rot_mean, row.end_rot_std);
    mean_std(am, row.ape_mean, row.ape_std);
    mean_std(ar, row.ape_rmse_mean, row.ape_rmse_std);
    result.rows.push_back(row);
  }

  if (!out_dir.empty()) {
    make_dir(out_dir);
    std::ofstream table = open_out(out_dir / "ablation.csv");
    table << "setting,um,gm,deviation,runs,end_trans_mean_m,end_trans_std_m,end_rot_mean_deg,"
             "end_rot_std_deg,ape_mean_m,ape_mean_std_m,ape_rmse_m,ape_rmse_std_m\n";
    for (const AblationRow& r : result.rows) {
      table << r.setting.name << ',' << (r.setting.uncertainty ? "on" : "off") << ','
            << (r.setting.guided ? "on" : "off") << ',' << to_string(r.setting.deviation) << ','
            << r.runs << ',' << fmt("%.9g", r.end_trans_mean) << ','
            << fmt("%.9g", r.end_trans_std) << ',' << fmt("%.9g", r.end_rot_mean) << ','
            << fmt("%.9g", r.end_rot_std) << ',' << fmt("%.9g", r.ape_mean) << ','
            << fmt("%.9g", r.ape_std) << ',' << fmt("%.9g", r.ape_rmse_mean) << ','
            << fmt("%.9g", r.ape_rmse_std) << '\n';
    }
    std::ofstream runs = open_out(out_dir / "ablation_runs.csv");
    runs << "setting,scenario,seed,end_trans_m,end_rot_deg,ape_mean_m,ape_rmse_m,mean_scan_ms\n";
    for (const AblationRun& r : result.runs) {
      runs << r.setting << ',' << r.scenario << ',' << r.seed << ','
           << fmt("%.9g", r.end_time.trans_err) << ',' << fmt("%.9g", r.end_time.rot_err) << ','
           << fmt("%.9g", r.ape.mean) << ',' << fmt("%.9g", r.ape.rmse) << ','
           << fmt("%.6g", r.mean_scan_ms) << '\n';
    }
  }
  return result;
}

}  // namespace vlio
