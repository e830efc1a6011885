#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "vlio/nav_state.hpp"
#include "vlio/point_map.hpp"
#include "vlio/scan.hpp"

namespace vlio {

struct IkfConfig {
  int max_iterations = 4;
  double eps_rot = 1e-3;  // rad
  double eps_pos = 1e-3;  // m
  std::size_t k_neighbors = 5;
  std::size_t k_candidates = 10;
  bool guided_matching = true;
  double plane_threshold = 0.1;       // m
  double max_neighbor_distance = 2.0; // m, farthest selected neighbor
  double min_plane_extent = 0.05;     // m, rms spread along the weaker in-plane axis
  double cov_floor = 1e-8;            // m^2, added before inversion
  std::size_t min_valid = 10;
  int threads = 1;

  void validate() const;
};

using JacobianRow = Eigen::Matrix<double, 1, kStateDim>;

struct Observation {
  Vec3 point_world = Vec3::Zero();
  Mat3 cov_world = Mat3::Zero();
  PlaneMatch match;
  double residual = 0.0;  // m
  double weight = 0.0;    // m^2, residual variance R_j
  JacobianRow jacobian_row = JacobianRow::Zero();
};

/// World position through G_T_I * I_T_L and the covariance conjugated by the
/// rotation part only.
std::pair<Vec3, Mat3> transform_point_and_cov(const UndistortedPoint& p, const NavState& state,
                                              const RigidTransform& extrinsics);

/// z = u^T (p - q), R = u^T Sigma u + floor, and the 1x15 Jacobian row
/// (nonzero only in the rotation and position blocks). `p_lidar` is the
/// undistorted point in the LiDAR frame. Throws kInvalidMatch.
Observation build_observation(const Vec3& p_world, const Mat3& cov_world, PlaneMatch match,
                              const NavState& state, const Vec3& p_lidar,
                              const RigidTransform& extrinsics, double cov_floor = 1e-8);

/// Two-stage neighbor selection: k_c Euclidean candidates, then the k with
/// the smallest Mahalanobis distance. With guided == false, plain Euclidean k.
std::vector<Vec3> select_neighbors(const PointMap& map, const Vec3& query, const Mat3& cov,
                                   std::size_t k, std::size_t k_c, bool guided);

/// Linearized system of one iteration; enough to re-solve it independently.
struct IterationRecord {
  NavState iterate;
  std::vector<JacobianRow> h;
  std::vector<double> z;
  std::vector<double> r;
  StateVec dx = StateVec::Zero();
  bool rematched = true;
};

struct IkfResult {
  NavState state;
  int iterations = 0;
  std::size_t valid = 0;
  double mean_weight = 0.0;
  bool converged = false;
  std::vector<IterationRecord> trace;  // filled when requested
};

/// One Gauss-Newton step of the MAP problem in Kalman form:
/// dx = -K z - (I - K H) J^-1 (iterate boxminus prior).
/// Returns dx and, through the out-parameters, K H and the J-conjugated prior
/// covariance used (both needed for the posterior).
StateVec ikf_step(const NavState& iterate, const NavState& prior,
                  const std::vector<JacobianRow>& h, const std::vector<double>& z,
                  const std::vector<double>& r, StateMat* kh = nullptr,
                  StateMat* p_iter = nullptr);

/// Uncertainty-aware iterated update. `prior` must already be propagated to
/// the scan start and the scan must carry covariances. Throws
/// kNoValidMatches when fewer than cfg.min_valid observations exist.
IkfResult ikf_update(const NavState& prior, const UndistortedScan& scan, const PointMap& map,
                     const IkfConfig& cfg, const RigidTransform& extrinsics,
                     bool keep_trace = false);

}  // namespace vlio
