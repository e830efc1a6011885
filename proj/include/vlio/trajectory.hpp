#pragma once

#include <vector>

#include "vlio/manifold.hpp"

namespace vlio {

struct TimedPose {
  double t = 0.0;
  RigidTransform pose;
};

using Trajectory = std::vector<TimedPose>;

struct EndTimeError {
  double trans_err = 0.0;  // m
  double rot_err = 0.0;    // deg
};

/// Averages the estimated poses over the final `settle_window` seconds of
/// the estimate and compares them with the first truth pose (the platform's
/// rest reference). No alignment is applied: both trajectories share the
/// frame defined at initialization. Throws kWindowUncovered.
EndTimeError end_time_error(const Trajectory& estimated, const Trajectory& truth,
                            double settle_window);

struct ApeStats {
  std::size_t count = 0;
  double mean = 0.0;  // m
  double rmse = 0.0;  // m
  double max = 0.0;   // m
};

/// Translation APE. Poses are associated by nearest timestamp within
/// `max_dt`. With `align_first` the estimate is first moved so that its
/// earliest associated pose coincides with the truth. Throws kNoOverlap when
/// nothing associates.
ApeStats absolute_pose_error(const Trajectory& estimated, const Trajectory& truth,
                             double max_dt = 0.005, bool align_first = false);

/// Chordal L2 mean of rotations.
Rot3 mean_rotation(const std::vector<Rot3>& rotations);

}  // namespace vlio
