"""Per-frame velocity estimates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["VelocityTrack", "total_variation"]


def total_variation(velocity) -> float:
    """Sum of absolute differences between consecutive defined (non-NaN) entries."""
    v = np.asarray(velocity, dtype=float)
    v = v[~np.isnan(v)]
    if v.size < 2:
        return 0.0
    return float(np.abs(np.diff(v)).sum())


@dataclass(frozen=True)
class VelocityTrack:
    """Velocity in px/frame per frame index; NaN marks a gap."""

    frames: np.ndarray
    velocity: np.ndarray
    method: str = ""
    mu: float = float("nan")

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.int64).reshape(-1)
        velocity = np.asarray(self.velocity, dtype=float).reshape(-1)
        if frames.shape != velocity.shape:
            raise ValueError("frames and velocity differ in length")
        if np.any(np.diff(frames) <= 0):
            raise ValueError("frame indices must be strictly increasing")
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "velocity", velocity)

    @property
    def gaps(self) -> np.ndarray:
        return np.isnan(self.velocity)

    @property
    def gap_fraction(self) -> float:
        return float(self.gaps.mean()) if self.velocity.size else 1.0

    @property
    def smoothness(self) -> float:
        return total_variation(self.velocity)

    def scaled(self, c: float) -> "VelocityTrack":
        return VelocityTrack(self.frames, self.velocity * c, self.method, self.mu)
