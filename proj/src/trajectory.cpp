#include "vlio/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vlio/error.hpp"

namespace vlio {

namespace {

// Index of the truth pose nearest to t, or -1 if none within max_dt.
long nearest_index(const Trajectory& traj, double t, double max_dt) {
  const auto it = std::lower_bound(traj.begin(), traj.end(), t,
                                   [](const TimedPose& p, double v) { return p.t < v; });
  long best = -1;
  double best_dt = max_dt;
  for (auto cand : {it, it == traj.begin() ? traj.end() : std::prev(it)}) {
    if (cand == traj.end()) continue;
    const double d = std::abs(cand->t - t);
    if (d <= best_dt) {
      best_dt = d;
      best = static_cast<long>(cand - traj.begin());
    }
  }
  return best;
}

}  // namespace

Rot3 mean_rotation(const std::vector<Rot3>& rotations) {
  if (rotations.empty()) throw Error(ErrorCode::kInvalidArgument, "no rotations to average");
  Mat3 sum = Mat3::Zero();
  for (const Rot3& r : rotations) sum += r.matrix();
  return Rot3::nearest(sum / static_cast<double>(rotations.size()));
}

EndTimeError end_time_error(const Trajectory& estimated, const Trajectory& truth,
                            double settle_window) {
  if (!(settle_window >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "settle window must be >= 0");
  }
  if (estimated.empty() || truth.empty()) {
    throw Error(ErrorCode::kWindowUncovered, "empty trajectory");
  }
  const double t_end = estimated.back().t;
  const double t_begin = t_end - settle_window;
  constexpr double kSlack = 0.005;
  if (estimated.front().t > t_begin + kSlack || truth.front().t > t_begin + kSlack ||
      truth.back().t < t_end - kSlack) {
    throw Error(ErrorCode::kWindowUncovered, "trajectories do not cover the settle window");
  }

  Vec3 mean_t = Vec3::Zero();
  std::vector<Rot3> rots;
  for (const TimedPose& p : estimated) {
    if (p.t < t_begin - 1e-9) continue;
    mean_t += p.pose.translation;
    rots.push_back(p.pose.rotation);
  }
  mean_t /= static_cast<double>(rots.size());
  const Rot3 mean_r = mean_rotation(rots);

  const RigidTransform& ref = truth.front().pose;
  EndTimeError err;
  err.trans_err = (mean_t - ref.translation).norm();
  err.rot_err = rotation_angle(ref.rotation, mean_r) * 180.0 / std::numbers::pi;
  return err;
}

ApeStats absolute_pose_error(const Trajectory& estimated, const Trajectory& truth,
                             double max_dt, bool align_first) {
  std::vector<std::pair<const TimedPose*, const TimedPose*>> pairs;
  for (const TimedPose& e : estimated) {
    const long j = nearest_index(truth, e.t, max_dt);
    if (j >= 0) pairs.emplace_back(&e, &truth[static_cast<std::size_t>(j)]);
  }
  if (pairs.empty()) {
    throw Error(ErrorCode::kNoOverlap, "no estimated pose lies within " +
                                           std::to_string(max_dt) + " s of a truth pose");
  }
  RigidTransform align;
  if (align_first) align = pairs.front().second->pose * pairs.front().first->pose.inverse();

  ApeStats s;
  s.count = pairs.size();
  double sum = 0.0, sum2 = 0.0;
  for (const auto& [e, g] : pairs) {
    const double d = ((align * e->pose).translation - g->pose.translation).norm();
    sum += d;
    sum2 += d * d;
    s.max = std::max(s.max, d);
  }
  s.mean = sum / static_cast<double>(s.count);
  s.rmse = std::sqrt(sum2 / static_cast<double>(s.count));
  return s;
}

}  // namespace vlio
