#include "vlio/ikf.hpp"

#include <algorithm>
#include <thread>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "vlio/error.hpp"

namespace vlio {

namespace {

// Rms spread of the neighbors along the weaker in-plane principal axis.
double in_plane_extent(const PlaneMatch& m) {
  Mat3 scatter = Mat3::Zero();
  for (const Vec3& q : m.neighbors) {
    Vec3 e = q - m.centroid;
    e -= m.normal * m.normal.dot(e);
    scatter += e * e.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig;
  eig.computeDirect(scatter);
  return std::sqrt(std::max(eig.eigenvalues()[1], 0.0) / static_cast<double>(m.neighbors.size()));
}

template <class F>
void parallel_for(std::size_t n, int threads, F&& f) {
  if (threads <= 1 || n < 256) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    pool.emplace_back([&f, begin, end] {
      for (std::size_t i = begin; i < end; ++i) f(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

StateMat spd_inverse(const StateMat& m) {
  Eigen::LLT<StateMat> llt(m);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingularCovariance, "matrix is not positive definite");
  }
  return llt.solve(StateMat::Identity());
}

StateMat tangent_jacobian(const Vec3& dtheta) {
  StateMat j = StateMat::Identity();
  j.block<3, 3>(kRotIdx, kRotIdx) = so3_right_jacobian(dtheta);
  return j;
}

}  // namespace

void IkfConfig::validate() const {
  if (max_iterations < 1) throw Error(ErrorCode::kInvalidArgument, "max_iterations must be >= 1");
  if (k_neighbors < 3) throw Error(ErrorCode::kInvalidArgument, "k_neighbors must be >= 3");
  if (k_candidates < k_neighbors) {
    throw Error(ErrorCode::kInvalidArgument, "k_candidates must be >= k_neighbors");
  }
  if (!(eps_rot > 0.0) || !(eps_pos > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "convergence thresholds must be positive");
  }
  if (!(plane_threshold > 0.0) || !(max_neighbor_distance > 0.0) || cov_floor < 0.0 ||
      min_plane_extent < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "invalid matching thresholds");
  }
}

std::pair<Vec3, Mat3> transform_point_and_cov(const UndistortedPoint& p, const NavState& state,
                                              const RigidTransform& extrinsics) {
  const Vec3 p_imu = extrinsics.apply(p.position);
  const Vec3 p_world = state.rot * p_imu + state.pos;
  const Mat3 r = state.rot.matrix() * extrinsics.rotation.matrix();
  Mat3 cov = r * p.cov * r.transpose();
  cov = 0.5 * (cov + cov.transpose()).eval();
  return {p_world, cov};
}

Observation build_observation(const Vec3& p_world, const Mat3& cov_world, PlaneMatch match,
                              const NavState& state, const Vec3& p_lidar,
                              const RigidTransform& extrinsics, double cov_floor) {
  if (!match.valid) {
    throw Error(ErrorCode::kInvalidMatch, "observation requires a valid plane match");
  }
  Observation obs;
  const Vec3& u = match.normal;
  obs.point_world = p_world;
  obs.cov_world = cov_world;
  obs.residual = u.dot(p_world - match.centroid);
  obs.weight = u.dot(cov_world * u) + cov_floor;
  const Vec3 p_imu = extrinsics.apply(p_lidar);
  obs.jacobian_row.segment<3>(kRotIdx) = -(u.transpose() * state.rot.matrix() * skew(p_imu));
  obs.jacobian_row.segment<3>(kPosIdx) = u.transpose();
  obs.match = std::move(match);
  return obs;
}

std::vector<Vec3> select_neighbors(const PointMap& map, const Vec3& query, const Mat3& cov,
                                   std::size_t k, std::size_t k_c, bool guided) {
  if (!guided) return map.knn(query, k);
  const std::vector<Vec3> candidates = map.knn(query, k_c);
  return reselect_mahalanobis(candidates, query, cov, std::min(k, candidates.size()));
}

StateVec ikf_step(const NavState& iterate, const NavState& prior,
                  const std::vector<JacobianRow>& h, const std::vector<double>& z,
                  const std::vector<double>& r, StateMat* kh, StateMat* p_iter) {
  // Only the rotation and position blocks of H are nonzero.
  Eigen::Matrix<double, 6, 6> hth6 = Eigen::Matrix<double, 6, 6>::Zero();
  Eigen::Matrix<double, 6, 1> htz6 = Eigen::Matrix<double, 6, 1>::Zero();
  for (std::size_t j = 0; j < h.size(); ++j) {
    const Eigen::Matrix<double, 6, 1> hj = h[j].head<6>().transpose();
    const double w = 1.0 / r[j];
    hth6.noalias() += w * hj * hj.transpose();
    htz6.noalias() += (w * z[j]) * hj;
  }
  StateMat hth = StateMat::Zero();
  hth.topLeftCorner<6, 6>() = hth6;
  StateVec htz = StateVec::Zero();
  htz.head<6>() = htz6;

  const StateVec d = state_boxminus(iterate, prior);
  const StateMat j_inv = tangent_jacobian(d.segment<3>(kRotIdx));
  StateMat p = j_inv * prior.cov * j_inv.transpose();
  p = 0.5 * (p + p.transpose()).eval();

  const StateMat s = spd_inverse(hth + spd_inverse(p));
  const StateMat k_h = s * hth;
  const StateVec k_z = s * htz;
  const StateVec dx = -k_z - (StateMat::Identity() - k_h) * (j_inv * d);
  if (kh) *kh = k_h;
  if (p_iter) *p_iter = p;
  return dx;
}

IkfResult ikf_update(const NavState& prior, const UndistortedScan& scan, const PointMap& map,
                     const IkfConfig& cfg, const RigidTransform& extrinsics, bool keep_trace) {
  cfg.validate();
  if (map.empty()) throw Error(ErrorCode::kEmptyMap, "cannot update against an empty map");

  const std::size_t n = scan.points.size();
  std::vector<std::optional<PlaneMatch>> matches(n);
  std::vector<std::optional<Observation>> observations(n);

  IkfResult result;
  NavState x = prior;
  StateMat kh = StateMat::Zero();
  StateMat p_iter = prior.cov;
  StateVec dx = StateVec::Zero();
  bool rematch = true;
  const Mat3 floor = Mat3::Identity() * cfg.cov_floor;

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    const Vec3 sensor_origin = x.rot * extrinsics.translation + x.pos;
    parallel_for(n, cfg.threads, [&](std::size_t j) {
      const UndistortedPoint& pt = scan.points[j];
      const auto [p_world, cov_world] = transform_point_and_cov(pt, x, extrinsics);
      if (rematch) {
        matches[j].reset();
        const std::vector<Vec3> nbrs =
            select_neighbors(map, p_world, cov_world + floor, cfg.k_neighbors,
                             cfg.k_candidates, cfg.guided_matching);
        if (nbrs.size() == cfg.k_neighbors) {
          double far2 = 0.0;
          for (const Vec3& q : nbrs) far2 = std::max(far2, (q - p_world).squaredNorm());
          if (far2 <= cfg.max_neighbor_distance * cfg.max_neighbor_distance) {
            auto plane = try_fit_plane(nbrs, sensor_origin, cfg.plane_threshold);
            if (plane && plane->valid && in_plane_extent(*plane) >= cfg.min_plane_extent) {
              matches[j] = std::move(plane);
            }
          }
        }
      }
      observations[j].reset();
      if (matches[j]) {
        observations[j] = build_observation(p_world, cov_world, *matches[j], x, pt.position,
                                            extrinsics, cfg.cov_floor);
      }
    });

    std::vector<JacobianRow> h;
    std::vector<double> z, r;
    h.reserve(n);
    z.reserve(n);
    r.reserve(n);
    for (const auto& obs : observations) {
      if (!obs) continue;
      h.push_back(obs->jacobian_row);
      z.push_back(obs->residual);
      r.push_back(obs->weight);
    }
    if (h.size() < cfg.min_valid) {
      throw Error(ErrorCode::kNoValidMatches,
                  std::to_string(h.size()) + " valid observations (need " +
                      std::to_string(cfg.min_valid) + ")");
    }

    dx = ikf_step(x, prior, h, z, r, &kh, &p_iter);
    if (keep_trace) {
      result.trace.push_back({x, h, z, r, dx, rematch});
    }
    x = state_boxplus(x, dx);
    result.iterations = iter + 1;
    result.valid = h.size();
    double sum_r = 0.0;
    for (double rj : r) sum_r += rj;
    result.mean_weight = sum_r / static_cast<double>(r.size());

    const double step_rot = dx.segment<3>(kRotIdx).norm();
    const double step_pos = dx.segment<3>(kPosIdx).norm();
    if (step_rot < cfg.eps_rot && step_pos < cfg.eps_pos) {
      result.converged = true;
      break;
    }
    rematch = !(step_rot < 10.0 * cfg.eps_rot && step_pos < 10.0 * cfg.eps_pos);
  }

  const StateMat l = tangent_jacobian(dx.segment<3>(kRotIdx));
  StateMat post = l * (StateMat::Identity() - kh) * p_iter * l.transpose();
  x.cov = 0.5 * (post + post.transpose());
  result.state = x;
  return result;
}

}  // namespace vlio
