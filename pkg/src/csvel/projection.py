"""Column-sum projections of frame differences."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ingest import FrameSequence

__all__ = ["ProjectionSignal", "project"]


@dataclass(frozen=True)
class ProjectionSignal:
    """x-profiles of the differences between consecutive available frames.

    ``values[:, d]`` is the column-summed difference ``F(T[d+1]) - F(T[d])``,
    stamped at ``pair_times[d] = T[d]``.
    """

    values: np.ndarray
    pair_times: np.ndarray
    n_total: int

    @property
    def width(self) -> int:
        return self.values.shape[0]

    @property
    def n_pairs(self) -> int:
        return self.values.shape[1]

    def to_csv(self, path) -> None:
        """Debug dump: one row per x, one column per pair."""
        header = ",".join(str(int(t)) for t in self.pair_times)
        np.savetxt(Path(path), self.values, delimiter=",", header=header,
                   comments="", fmt="%.10g")


def project(seq: FrameSequence, normalize_gap: bool = False) -> ProjectionSignal:
    """Difference consecutive available frames and sum each difference by columns.

    With ``normalize_gap`` a difference spanning ``g`` grid steps is divided
    by ``g``; by default it is used as-is.
    """
    if seq.n_available < 2:
        raise ValueError(f"need at least 2 available frames, got {seq.n_available}")
    # sum rows first: linear, and avoids materializing the (M-1, H, W) stack
    profiles = seq.frames.sum(axis=1, dtype=np.float64)
    values = np.diff(profiles, axis=0).T
    if normalize_gap:
        values = values / np.diff(seq.available)[None, :]
    values = np.ascontiguousarray(values)
    values.setflags(write=False)
    stamps = seq.available[:-1].copy()
    stamps.setflags(write=False)
    return ProjectionSignal(values, stamps, seq.n_total)
