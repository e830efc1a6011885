#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <filesystem>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "vlio/commands.hpp"
#include "vlio/config.hpp"
#include "vlio/error.hpp"
#include "vlio/io.hpp"
#include "vlio/manifold.hpp"
#include "vlio/uncertainty.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;

namespace {

using vlio::Mat3;
using vlio::Vec3;
using RowsX3 = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

std::size_t simulate(const fs::path& config, std::uint64_t seed, const fs::path& out) {
  const vlio::sim::Scenario sc = vlio::load_scenario(config);
  return vlio::cmd_simulate(sc, seed, out).scans.size();
}

py::dict run(const fs::path& data, const fs::path& out, std::optional<fs::path> config,
             bool deterministic) {
  vlio::RunConfig cfg = config ? vlio::load_run_config(*config) : vlio::RunConfig{};
  if (deterministic) cfg.ikf.threads = 1;
  vlio::RunOutput res;
  {
    py::gil_scoped_release release;
    res = vlio::cmd_run(cfg, data, out);
  }
  py::dict d;
  d["scans"] = res.reports.size();
  d["poses"] = res.estimate.size();
  d["mean_scan_ms"] = res.mean_scan_ms;
  return d;
}

py::dict evaluate(const fs::path& estimate, const fs::path& truth, double settle_window,
                  bool align_first) {
  const vlio::EvalReport r =
      vlio::evaluate(vlio::io::read_tum_file(estimate), vlio::io::read_tum_file(truth),
                     vlio::EvalMode::kAll, settle_window, align_first);
  py::dict d;
  d["ape_count"] = r.ape.count;
  d["ape_mean_m"] = r.ape.mean;
  d["ape_rmse_m"] = r.ape.rmse;
  d["ape_max_m"] = r.ape.max;
  d["end_time_trans_m"] = r.end_time.trans_err;
  d["end_time_rot_deg"] = r.end_time.rot_err;
  return d;
}

std::tuple<Eigen::VectorXd, Eigen::MatrixXd> read_tum(const fs::path& path) {
  const vlio::Trajectory traj = vlio::io::read_tum_file(path);
  Eigen::VectorXd t(static_cast<Eigen::Index>(traj.size()));
  Eigen::MatrixXd poses(static_cast<Eigen::Index>(traj.size()), 7);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const Eigen::Quaterniond q = traj[i].pose.rotation.quaternion();
    t(k) = traj[i].t;
    poses.row(k) << traj[i].pose.translation.transpose(), q.x(), q.y(), q.z(), q.w();
  }
  return {t, poses};
}

std::tuple<Vec3, Vec3> vibration_intensity(const Eigen::VectorXd& t, const RowsX3& omega,
                                           const RowsX3& v, const std::string& mode) {
  if (omega.rows() != t.size() || v.rows() != t.size()) {
    throw vlio::Error(vlio::ErrorCode::kInvalidArgument, "t, omega and v need the same length");
  }
  std::vector<vlio::LidarVelocity> vel(static_cast<std::size_t>(t.size()));
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    vel[static_cast<std::size_t>(i)] = {t(i), omega.row(i).transpose(), v.row(i).transpose()};
  }
  const vlio::VibrationIntensity k =
      vlio::vibration_intensity(vel, vlio::deviation_mode_from_string(mode));
  return {k.k_omega, k.k_v};
}

Mat3 total_covariance(const Vec3& position, const Vec3& raw, const Mat3& rotation,
                      const Vec3& sigma_r, const Vec3& sigma_t, double sigma_range,
                      double sigma_bearing) {
  vlio::UndistortedPoint p;
  p.position = position;
  p.raw = raw;
  p.rotation = rotation;
  return vlio::total_covariance(p, sigma_r, sigma_t, {sigma_range, sigma_bearing}).total;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Vibration-aware LiDAR-inertial odometry";

  py::register_exception<vlio::Error>(m, "VlioError");

  m.def("so3_exp", [](const Vec3& phi) { return vlio::so3_exp(phi).matrix(); }, py::arg("phi"));
  m.def("so3_log", [](const Mat3& r) { return vlio::so3_log(vlio::Rot3::from_matrix(r)); },
        py::arg("r"));

  m.def(
      "measurement_covariance",
      [](const Vec3& p_raw, double sigma_range, double sigma_bearing) {
        return vlio::measurement_covariance(p_raw, {sigma_range, sigma_bearing});
      },
      py::arg("p_raw"), py::arg("sigma_range") = 0.02, py::arg("sigma_bearing") = 0.001);
  m.def("total_covariance", &total_covariance, py::arg("position"), py::arg("raw"),
        py::arg("rotation"), py::arg("sigma_r"), py::arg("sigma_t"), py::arg("sigma_range") = 0.02,
        py::arg("sigma_bearing") = 0.001,
        "Post-undistortion covariance of one point in the scan-start frame.");
  m.def("vibration_intensity", &vibration_intensity, py::arg("t"), py::arg("omega"), py::arg("v"),
        py::arg("mode") = "mad", "Returns (k_omega, k_v).");

  m.def("simulate", &simulate, py::arg("config"), py::arg("seed"), py::arg("out"),
        "Writes a simulated dataset; returns the number of scans.");
  m.def("run", &run, py::arg("data"), py::arg("out"), py::arg("config") = py::none(),
        py::arg("deterministic") = false);
  m.def("evaluate", &evaluate, py::arg("estimate"), py::arg("truth"),
        py::arg("settle_window") = 1.0, py::arg("align_first") = false);
  m.def("read_tum", &read_tum, py::arg("path"), "Returns (t, [tx ty tz qx qy qz qw]).");
}
