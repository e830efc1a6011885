#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "vlio/manifold.hpp"
#include "vlio/scan.hpp"

namespace vlio {

/// Incremental global point map with exact Euclidean KNN.
///
/// Points are bucketed in a hashed grid whose cell edge is twice the map
/// resolution. Insertion is rejected when an existing point lies closer than
/// resolution / 2, so stored points are never closer than that.
class PointMap {
 public:
  explicit PointMap(double resolution = 0.5);

  double resolution() const { return resolution_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const std::vector<Vec3>& points() const { return points_; }

  /// The k nearest points, ascending by distance, ties by insertion order.
  /// Returns fewer when the map holds fewer. Throws kEmptyMap.
  std::vector<Vec3> knn(const Vec3& query, std::size_t k) const;

  /// Same as knn() but returns insertion indices.
  std::vector<std::uint32_t> knn_indices(const Vec3& query, std::size_t k) const;

  /// Inserts p unless a stored point is within resolution / 2.
  bool insert(const Vec3& p);

  /// Transforms scan points (LiDAR frame) by `pose` into the map frame,
  /// keeps the point nearest each voxel center, and inserts them in voxel
  /// first-seen order. Returns the number of points added.
  std::size_t insert_scan(const UndistortedScan& scan, const RigidTransform& pose);

  /// One "x y z" line per point.
  void write_ascii(std::ostream& os) const;

 private:
  struct CellKey {
    std::int32_t x, y, z;
    bool operator==(const CellKey&) const = default;
  };
  struct CellHash {
    std::size_t operator()(const CellKey& k) const noexcept;
  };

  CellKey cell_of(const Vec3& p) const;
  std::optional<double> nearest_distance_within(const Vec3& p, double radius) const;

  double resolution_;
  double cell_size_;
  std::vector<Vec3> points_;
  std::unordered_map<CellKey, std::vector<std::uint32_t>, CellHash> cells_;
  CellKey min_cell_{0, 0, 0};
  CellKey max_cell_{0, 0, 0};
};

std::vector<Vec3> knn_euclidean(const PointMap& map, const Vec3& query, std::size_t k_c);

/// The k candidates with the smallest (p - s)^T cov^-1 (p - s), stable with
/// respect to candidate order. Throws kSingularCovariance.
std::vector<Vec3> reselect_mahalanobis(std::span<const Vec3> candidates, const Vec3& query,
                                       const Mat3& cov, std::size_t k);

struct PlaneMatch {
  Vec3 normal = Vec3::UnitZ();
  Vec3 centroid = Vec3::Zero();
  std::vector<Vec3> neighbors;
  bool valid = false;
  double planarity = 0.0;  // lambda_min / lambda_mid
};

/// PCA plane through the neighbors. The normal points toward `sensor_origin`;
/// the fit is valid when every neighbor is within `threshold` of the plane.
/// Returns nullopt when the scatter has rank < 2.
std::optional<PlaneMatch> try_fit_plane(std::span<const Vec3> neighbors,
                                        const Vec3& sensor_origin, double threshold = 0.1);

/// As try_fit_plane(), throwing kDegenerateNeighbors instead of nullopt.
PlaneMatch fit_plane(std::span<const Vec3> neighbors, const Vec3& sensor_origin = Vec3::Zero(),
                     double threshold = 0.1);

}  // namespace vlio
