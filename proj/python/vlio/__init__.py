"""Vibration-aware LiDAR-inertial odometry."""

from ._core import (
    VlioError,
    evaluate,
    measurement_covariance,
    read_tum,
    run,
    simulate,
    so3_exp,
    so3_log,
    total_covariance,
    vibration_intensity,
)

__all__ = [
    "VlioError",
    "evaluate",
    "measurement_covariance",
    "read_tum",
    "run",
    "simulate",
    "so3_exp",
    "so3_log",
    "total_covariance",
    "vibration_intensity",
]
