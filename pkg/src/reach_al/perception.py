"""RGB-D detection to 3-D point conversion.

A detected fruit starts as an RGB bounding-box center.  The pixel is mapped
to the depth image (the two sensors run at different resolutions), a robust
depth is taken from a 5x5 patch, the pinhole model lifts the pixel to a
camera-frame point, and a rigid transform expresses it in the arm frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BoundaryError, NoDepthError
from .kinematics import ArmPoint

# Depth readings at or beyond this range are sensor artifacts.
MAX_VALID_DEPTH = 20.0


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole parameters of the depth camera plus both sensor resolutions."""

    fx: float = 365.0
    fy: float = 365.0
    cx: float = 256.0
    cy: float = 212.0
    rgb_width: int = 1920
    rgb_height: int = 1080
    depth_width: int = 512
    depth_height: int = 424

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.depth_width and 0 <= self.cy < self.depth_height):
            raise ValueError("principal point must lie inside the depth image")
        for name in ("rgb_width", "rgb_height", "depth_width", "depth_height"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


class Extrinsics:
    """Rigid camera-to-arm transform: ``p_arm = R @ p_camera + t``."""

    def __init__(self, R, t):
        R = np.array(R, dtype=float).reshape(3, 3)
        t = np.array(t, dtype=float).reshape(3)
        if not np.allclose(R.T @ R, np.eye(3), atol=1e-9):
            raise ValueError("R must be orthonormal")
        if abs(np.linalg.det(R) - 1.0) > 1e-9:
            raise ValueError("R must be a proper rotation (det +1)")
        R.setflags(write=False)
        t.setflags(write=False)
        self.R = R
        self.t = t

    def __eq__(self, other):
        return (
            isinstance(other, Extrinsics)
            and np.array_equal(self.R, other.R)
            and np.array_equal(self.t, other.t)
        )

    def __repr__(self):
        return f"Extrinsics(R={self.R.tolist()}, t={self.t.tolist()})"


def default_extrinsics() -> Extrinsics:
    """Identity rotation with the field-measured camera offset."""
    return Extrinsics(np.eye(3), [0.76, 0.44, 0.485])


class DepthPatch:
    """A 5x5 grid of depth readings in meters.

    A cell equal to 0 or non-finite is an invalid reading.  Valid cells must
    be positive and below ``MAX_VALID_DEPTH``.
    """

    SIZE = 5

    def __init__(self, values):
        vals = np.array(values, dtype=float).reshape(self.SIZE, self.SIZE)
        valid = np.isfinite(vals) & (vals != 0.0)
        if np.any(vals[valid] <= 0) or np.any(vals[valid] >= MAX_VALID_DEPTH):
            raise ValueError("valid depth cells must lie in (0, 20) meters")
        vals.setflags(write=False)
        self.values = vals

    @property
    def valid_mask(self) -> np.ndarray:
        return np.isfinite(self.values) & (self.values != 0.0)

    @property
    def valid_values(self) -> np.ndarray:
        return self.values[self.valid_mask]

    def flat(self) -> np.ndarray:
        """Row-major cell order, as serialized in detection files."""
        return self.values.ravel()

    def __eq__(self, other):
        return isinstance(other, DepthPatch) and np.array_equal(
            self.values, other.values, equal_nan=True
        )

    def __repr__(self):
        return f"DepthPatch({self.values.tolist()})"


@dataclass(frozen=True)
class CameraPoint:
    """Point in the camera frame (meters, Z along the optical axis)."""

    Xc: float
    Yc: float
    Zc: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.Xc, self.Yc, self.Zc)):
            raise ValueError("CameraPoint components must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.Xc, self.Yc, self.Zc], dtype=float)


def map_rgb_to_depth_pixel(u: float, v: float, intr: CameraIntrinsics) -> tuple[int, int]:
    """Map an RGB pixel to the depth image with per-axis scale factors.

    Raises BoundaryError when the pixel lies outside the RGB frame, which
    callers treat as a discarded detection.
    """
    if not (0 <= u < intr.rgb_width and 0 <= v < intr.rgb_height):
        raise BoundaryError(f"pixel ({u}, {v}) outside RGB image")
    ud = math.floor(u * intr.depth_width / intr.rgb_width + 0.5)
    vd = math.floor(v * intr.depth_height / intr.rgb_height + 0.5)
    ud = min(max(ud, 0), intr.depth_width - 1)
    vd = min(max(vd, 0), intr.depth_height - 1)
    return ud, vd


def robust_depth(patch: DepthPatch) -> float:
    """Median of the valid patch cells; raises NoDepthError when none exist."""
    vals = patch.valid_values
    if vals.size == 0:
        raise NoDepthError("depth patch has no valid cells")
    return float(np.median(vals))


def back_project(u: float, v: float, Z: float, intr: CameraIntrinsics) -> CameraPoint:
    """Lift a depth-image pixel with measured depth ``Z`` to the camera frame."""
    if Z <= 0:
        raise NoDepthError(f"non-positive depth {Z}")
    return CameraPoint(
        Xc=(u - intr.cx) * Z / intr.fx,
        Yc=(v - intr.cy) * Z / intr.fy,
        Zc=Z,
    )


def project_to_pixel(p: CameraPoint, intr: CameraIntrinsics) -> tuple[float, float]:
    """Inverse of back_project for ``Zc > 0``; returns fractional pixels."""
    if p.Zc <= 0:
        raise NoDepthError(f"non-positive depth {p.Zc}")
    return (p.Xc * intr.fx / p.Zc + intr.cx, p.Yc * intr.fy / p.Zc + intr.cy)


def camera_to_arm(p: CameraPoint, ext: Extrinsics) -> ArmPoint:
    """Apply the rigid camera-to-arm transform."""
    v = ext.R @ p.as_array() + ext.t
    return ArmPoint(x=float(v[0]), y=float(v[1]), z=float(v[2]))
