"""Pedestrian dead reckoning and shoe-mounted inertial navigation.

IMU streams are float64 arrays of shape (N, 7): t, fx, fy, fz, wx, wy, wz in
seconds, m/s^2 and rad/s, body frame with z pointing down.
"""

from ._pedinav import (
    NumericalError,
    ValidationError,
    assess_drift,
    calibrate,
    detect_steps,
    detect_zero_velocity,
    heading_error_circular,
    run_pdr,
    run_smins,
    simulate_foot,
    simulate_gait,
)

__all__ = [
    "NumericalError",
    "ValidationError",
    "assess_drift",
    "calibrate",
    "detect_steps",
    "detect_zero_velocity",
    "heading_error_circular",
    "run_pdr",
    "run_smins",
    "simulate_foot",
    "simulate_gait",
]
