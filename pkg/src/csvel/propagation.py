"""Map projection profiles to a complex FM signal by mu-propagation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .projection import ProjectionSignal

__all__ = ["MuParams", "ComplexSignal", "propagate", "DEFAULT_MU_SWEEP"]

DEFAULT_MU_SWEEP = (0.10, 0.15, 0.20, 0.25, 0.30)


@dataclass(frozen=True)
class MuParams:
    mu: float

    def __post_init__(self):
        if not 0.0 < self.mu <= np.pi:
            raise ValueError(f"mu must be in (0, pi], got {self.mu}")


@dataclass(frozen=True)
class ComplexSignal:
    """Complex samples on the grid ``[0, n_total)``, defined at ``available`` only.

    ``values`` holds zeros at missing positions, so it doubles as the
    zero-filled signal.
    """

    values: np.ndarray
    available: np.ndarray
    n_total: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex).reshape(-1)
        available = np.asarray(self.available, dtype=np.int64).reshape(-1)
        if values.size != self.n_total:
            raise ValueError("values must cover the whole grid")
        if np.any(np.diff(available) <= 0):
            raise ValueError("available indices must be strictly increasing")
        if available.size and (available[0] < 0 or available[-1] >= self.n_total):
            raise ValueError("available index outside the grid")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "available", available)

    @classmethod
    def full(cls, values) -> "ComplexSignal":
        values = np.asarray(values, dtype=complex)
        return cls(values, np.arange(values.size), values.size)

    @property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.n_total, dtype=bool)
        m[self.available] = True
        return m

    def conj(self) -> "ComplexSignal":
        return ComplexSignal(self.values.conj(), self.available, self.n_total)


def propagate(proj: ProjectionSignal, params: MuParams | float) -> ComplexSignal:
    """``s(t) = sum_x proj(x, t) * exp(j*mu*x)`` at every pair stamp."""
    mu = params.mu if isinstance(params, MuParams) else MuParams(float(params)).mu
    if proj.n_pairs == 0:
        raise ValueError("empty projection")
    x = np.arange(proj.width)
    s = np.exp(1j * mu * x) @ proj.values
    values = np.zeros(proj.n_total, dtype=complex)
    values[proj.pair_times] = s
    return ComplexSignal(values, proj.pair_times, proj.n_total)
