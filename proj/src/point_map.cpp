#include "vlio/point_map.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "vlio/error.hpp"

namespace vlio {

namespace {

struct Candidate {
  double d2;
  std::uint32_t index;
  bool operator<(const Candidate& o) const {
    return d2 < o.d2 || (d2 == o.d2 && index < o.index);
  }
};

void offer(std::vector<Candidate>& best, std::size_t k, Candidate c) {
  if (best.size() == k && !(c < best.back())) return;
  auto it = std::upper_bound(best.begin(), best.end(), c);
  best.insert(it, c);
  if (best.size() > k) best.pop_back();
}

}  // namespace

std::size_t PointMap::CellHash::operator()(const CellKey& k) const noexcept {
  const auto ux = static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.x));
  const auto uy = static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.y));
  const auto uz = static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.z));
  return static_cast<std::size_t>((ux * 73856093ULL) ^ (uy * 19349663ULL) ^ (uz * 83492791ULL));
}

PointMap::PointMap(double resolution) : resolution_(resolution), cell_size_(2.0 * resolution) {
  if (!(resolution > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "map resolution must be positive");
  }
}

PointMap::CellKey PointMap::cell_of(const Vec3& p) const {
  return {static_cast<std::int32_t>(std::floor(p.x() / cell_size_)),
          static_cast<std::int32_t>(std::floor(p.y() / cell_size_)),
          static_cast<std::int32_t>(std::floor(p.z() / cell_size_))};
}

std::vector<std::uint32_t> PointMap::knn_indices(const Vec3& query, std::size_t k) const {
  if (points_.empty()) {
    throw Error(ErrorCode::kEmptyMap, "nearest-neighbor query on an empty map");
  }
  k = std::min(k, points_.size());
  std::vector<Candidate> best;
  best.reserve(k + 1);
  if (k == 0) return {};

  const CellKey c = cell_of(query);
  const int max_r = std::max({c.x - min_cell_.x, max_cell_.x - c.x, c.y - min_cell_.y,
                              max_cell_.y - c.y, c.z - min_cell_.z, max_cell_.z - c.z, 0});

  auto visit = [&](int dx, int dy, int dz) {
    const CellKey key{c.x + dx, c.y + dy, c.z + dz};
    if (key.x < min_cell_.x || key.x > max_cell_.x || key.y < min_cell_.y ||
        key.y > max_cell_.y || key.z < min_cell_.z || key.z > max_cell_.z) {
      return;
    }
    const auto it = cells_.find(key);
    if (it == cells_.end()) return;
    for (std::uint32_t idx : it->second) {
      offer(best, k, {(points_[idx] - query).squaredNorm(), idx});
    }
  };

  for (int r = 0; r <= max_r; ++r) {
    if (r == 0) {
      visit(0, 0, 0);
    } else {
      for (int dx = -r; dx <= r; ++dx) {
        for (int dy = -r; dy <= r; ++dy) {
          if (std::abs(dx) == r || std::abs(dy) == r) {
            for (int dz = -r; dz <= r; ++dz) visit(dx, dy, dz);
          } else {
            visit(dx, dy, -r);
            visit(dx, dy, r);
          }
        }
      }
    }
    // Every unvisited point is farther than r * cell_size_.
    const double bound = r * cell_size_;
    if (best.size() == k && best.back().d2 <= bound * bound) break;
  }

  std::vector<std::uint32_t> out;
  out.reserve(best.size());
  for (const Candidate& cand : best) out.push_back(cand.index);
  return out;
}

std::vector<Vec3> PointMap::knn(const Vec3& query, std::size_t k) const {
  std::vector<Vec3> out;
  for (std::uint32_t idx : knn_indices(query, k)) out.push_back(points_[idx]);
  return out;
}

std::optional<double> PointMap::nearest_distance_within(const Vec3& p, double radius) const {
  const CellKey c = cell_of(p);
  const double r2 = radius * radius;
  std::optional<double> best;
  for (int dx = -1; dx <= 1; ++dx) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dz = -1; dz <= 1; ++dz) {
        const auto it = cells_.find({c.x + dx, c.y + dy, c.z + dz});
        if (it == cells_.end()) continue;
        for (std::uint32_t idx : it->second) {
          const double d2 = (points_[idx] - p).squaredNorm();
          if (d2 < r2 && (!best || d2 < *best)) best = d2;
        }
      }
    }
  }
  if (best) return std::sqrt(*best);
  return std::nullopt;
}

bool PointMap::insert(const Vec3& p) {
  if (nearest_distance_within(p, 0.5 * resolution_)) return false;
  const CellKey key = cell_of(p);
  if (points_.empty()) {
    min_cell_ = max_cell_ = key;
  } else {
    min_cell_ = {std::min(min_cell_.x, key.x), std::min(min_cell_.y, key.y),
                 std::min(min_cell_.z, key.z)};
    max_cell_ = {std::max(max_cell_.x, key.x), std::max(max_cell_.y, key.y),
                 std::max(max_cell_.z, key.z)};
  }
  cells_[key].push_back(static_cast<std::uint32_t>(points_.size()));
  points_.push_back(p);
  return true;
}

std::size_t PointMap::insert_scan(const UndistortedScan& scan, const RigidTransform& pose) {
  struct Voxel {
    Vec3 point;
    double d2;
  };
  std::unordered_map<CellKey, std::size_t, CellHash> voxel_slot;
  std::vector<Voxel> voxels;
  for (const UndistortedPoint& up : scan.points) {
    const Vec3 p = pose.apply(up.position);
    const Vec3 scaled = p / resolution_;
    const CellKey key{static_cast<std::int32_t>(std::floor(scaled.x())),
                      static_cast<std::int32_t>(std::floor(scaled.y())),
                      static_cast<std::int32_t>(std::floor(scaled.z()))};
    const Vec3 center = (Vec3(key.x, key.y, key.z) + Vec3::Constant(0.5)) * resolution_;
    const double d2 = (p - center).squaredNorm();
    const auto [it, fresh] = voxel_slot.try_emplace(key, voxels.size());
    if (fresh) {
      voxels.push_back({p, d2});
    } else if (d2 < voxels[it->second].d2) {
      voxels[it->second] = {p, d2};
    }
  }
  std::size_t added = 0;
  for (const Voxel& v : voxels) {
    if (insert(v.point)) ++added;
  }
  return added;
}

void PointMap::write_ascii(std::ostream& os) const {
  char buf[96];
  for (const Vec3& p : points_) {
    std::snprintf(buf, sizeof(buf), "%.6f %.6f %.6f\n", p.x(), p.y(), p.z());
    os << buf;
  }
}

std::vector<Vec3> knn_euclidean(const PointMap& map, const Vec3& query, std::size_t k_c) {
  return map.knn(query, k_c);
}

std::vector<Vec3> reselect_mahalanobis(std::span<const Vec3> candidates, const Vec3& query,
                                       const Mat3& cov, std::size_t k) {
  if (k > candidates.size()) {
    throw Error(ErrorCode::kInvalidArgument, "k exceeds the candidate count");
  }
  bool invertible = false;
  Mat3 info;
  cov.computeInverseWithCheck(info, invertible, 0.0);
  if (!invertible || !info.allFinite() || !(cov.determinant() > 0.0)) {
    throw Error(ErrorCode::kSingularCovariance, "point covariance is not invertible");
  }
  std::vector<double> d(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Vec3 e = query - candidates[i];
    d[i] = e.dot(info * e);
  }
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
  std::vector<Vec3> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(candidates[order[i]]);
  return out;
}

std::optional<PlaneMatch> try_fit_plane(std::span<const Vec3> neighbors,
                                        const Vec3& sensor_origin, double threshold) {
  if (neighbors.size() < 3) return std::nullopt;
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : neighbors) centroid += p;
  centroid /= static_cast<double>(neighbors.size());

  Mat3 scatter = Mat3::Zero();
  for (const Vec3& p : neighbors) {
    const Vec3 e = p - centroid;
    scatter += e * e.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig;
  eig.computeDirect(scatter);
  const Vec3& lambda = eig.eigenvalues();  // ascending
  const double scale = std::max(lambda[2], 0.0);
  if (!(scale > 1e-20) || lambda[1] <= 1e-12 * scale) return std::nullopt;

  PlaneMatch m;
  m.centroid = centroid;
  m.normal = eig.eigenvectors().col(0).normalized();
  if (m.normal.dot(sensor_origin - centroid) < 0.0) m.normal = -m.normal;
  m.planarity = std::max(lambda[0], 0.0) / lambda[1];
  m.neighbors.assign(neighbors.begin(), neighbors.end());
  m.valid = true;
  for (const Vec3& p : neighbors) {
    if (std::abs(m.normal.dot(p - centroid)) > threshold) {
      m.valid = false;
      break;
    }
  }
  return m;
}

PlaneMatch fit_plane(std::span<const Vec3> neighbors, const Vec3& sensor_origin,
                     double threshold) {
  auto m = try_fit_plane(neighbors, sensor_origin, threshold);
  if (!m) {
    throw Error(ErrorCode::kDegenerateNeighbors, "neighbor scatter has rank < 2");
  }
  return *m;
}

}  // namespace vlio
