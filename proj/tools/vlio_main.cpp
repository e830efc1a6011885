// vlio: simulate, run, evaluate and ablate from the command line.
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vlio/commands.hpp"
#include "vlio/error.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitData = 2;

int exit_code_for(vlio::ErrorCode code) {
  switch (code) {
    case vlio::ErrorCode::kConfigError:
    case vlio::ErrorCode::kInvalidArgument:
      return kExitConfig;
    default:
      return kExitData;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vibration-aware LiDAR-inertial odometry"};
  app.require_subcommand(1);

  std::string log_level = "warn";
  bool deterministic = false;
  app.add_option("--log-level", log_level, "error, warn, info or debug");
  app.add_flag("--deterministic", deterministic, "Single-threaded, bit-reproducible execution");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic dataset from a scenario");
  std::string sim_config;
  std::uint64_t sim_seed = 0;
  std::string sim_out;
  sim->add_option("--config", sim_config, "Scenario config file")->required();
  sim->add_option("--seed", sim_seed, "Random seed");
  sim->add_option("--out", sim_out, "Output dataset directory")->required();
  sim->add_flag("--deterministic", deterministic, "Single-threaded, bit-reproducible execution");

  // run
  auto* run = app.add_subcommand("run", "Run the odometry on a dataset");
  std::string run_config;
  std::string run_data;
  std::string run_out;
  std::uint64_t run_seed = 0;
  bool dump_cov = false;
  bool no_map = false;
  run->add_option("--config", run_config, "Run config file (defaults when omitted)");
  run->add_option("--data", run_data, "Dataset directory")->required();
  run->add_option("--out", run_out, "Output directory")->required();
  run->add_option("--seed", run_seed, "Unused by the filter; accepted for uniformity");
  run->add_flag("--dump-covariances", dump_cov, "Write per-point covariances for every scan");
  run->add_flag("--no-map", no_map, "Skip writing map.xyz");
  run->add_flag("--deterministic", deterministic, "Single-threaded, bit-reproducible execution");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Compare an estimate with ground truth");
  std::string est_path;
  std::string truth_path;
  std::string mode = "all";
  std::string align = "none";
  double settle = 1.0;
  std::string eval_out;
  ev->add_option("--estimate", est_path, "Estimated trajectory (TUM)")->required();
  ev->add_option("--truth", truth_path, "Ground-truth trajectory (TUM)")->required();
  ev->add_option("--mode", mode, "ape, end_time or all");
  ev->add_option("--align", align, "none or first");
  ev->add_option("--settle", settle, "End-time settle window in seconds");
  ev->add_option("--out", eval_out, "Directory for metrics.csv");

  // ablate
  auto* ab = app.add_subcommand("ablate", "UM/GM and deviation-mode ablation over seeds");
  std::string ab_config;
  std::vector<std::string> ab_scenarios;
  std::uint64_t ab_seed = 0;
  int ab_seeds = 5;
  std::string ab_out;
  double ab_settle = 1.0;
  ab->add_option("--config", ab_config, "Run config file (defaults when omitted)");
  ab->add_option("--scenario", ab_scenarios, "Scenario config (repeatable)")->required();
  ab->add_option("--seed", ab_seed, "First seed");
  ab->add_option("--seeds", ab_seeds, "Number of seeds (>= 2)");
  ab->add_option("--out", ab_out, "Output directory")->required();
  ab->add_option("--settle", ab_settle, "End-time settle window in seconds");
  ab->add_flag("--deterministic", deterministic, "Single-threaded, bit-reproducible execution");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    vlio::set_log_level(vlio::log_level_from_string(log_level));
    auto load_run = [&](const std::string& path) {
      vlio::RunConfig cfg = path.empty() ? vlio::RunConfig{} : vlio::load_run_config(path);
      if (deterministic) cfg.ikf.threads = 1;
      return cfg;
    };

    if (*sim) {
      vlio::cmd_simulate(vlio::load_scenario(sim_config), sim_seed, sim_out);
    } else if (*run) {
      vlio::RunOptions opts;
      opts.dump_covariances = dump_cov;
      opts.write_map = !no_map;
      const vlio::RunOutput out = vlio::cmd_run(load_run(run_config), run_data, run_out, opts);
      std::cout << "scans " << out.reports.size() << ", poses " << out.estimate.size()
                << ", mean " << out.mean_scan_ms << " ms/scan\n";
    } else if (*ev) {
      if (align != "none" && align != "first") {
        throw vlio::Error(vlio::ErrorCode::kConfigError, "--align must be none or first");
      }
      vlio::cmd_evaluate(est_path, truth_path, vlio::eval_mode_from_string(mode), settle,
                         align == "first", eval_out, std::cout);
    } else if (*ab) {
      if (ab_seeds < 2) throw vlio::Error(vlio::ErrorCode::kConfigError, "--seeds must be >= 2");
      std::vector<vlio::NamedScenario> scenarios;
      for (const std::string& path : ab_scenarios) {
        scenarios.push_back({std::filesystem::path(path).stem().string(), vlio::load_scenario(path)});
      }
      std::vector<std::uint64_t> seeds;
      for (int i = 0; i < ab_seeds; ++i) seeds.push_back(ab_seed + static_cast<std::uint64_t>(i));
      const vlio::AblationResult res =
          vlio::cmd_ablate(load_run(ab_config), scenarios, seeds, ab_out, vlio::ablation_grid(),
                           ab_settle);
      for (const vlio::AblationRow& r : res.rows) {
        std::printf("%-10s end %.4f +- %.4f m  %.3f +- %.3f deg  APE %.4f +- %.4f m\n",
                    r.setting.name.c_str(), r.end_trans_mean, r.end_trans_std, r.end_rot_mean,
                    r.end_rot_std, r.ape_mean, r.ape_std);
      }
    }
  } catch (const vlio::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}
