"""Compressive-sensing recovery of STFT columns from incomplete windows.

Each window of the (incomplete) complex signal is treated as a partial
observation ``m = Phi d`` of the full windowed segment ``d``.  With
``d = Psi F`` (inverse DFT, ``1/Np`` scaling) the spectrum ``F`` is found as a
sparse solution of ``m = Theta F``, ``Theta = Phi Psi``.  On a fully observed
window ``F`` is exactly the STFT column.
"""

from __future__ import annotations

import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .propagation import ComplexSignal
from .tfa import TFMap, WindowSpec, _centers, _signed_dft

__all__ = [
    "MeasurementSet",
    "SensingModel",
    "SolverConfig",
    "SolverFailure",
    "form_measurements",
    "build_model",
    "solve_sparse",
    "omp",
    "basis_pursuit",
    "cs_stft",
]

log = logging.getLogger(__name__)


class SolverFailure(RuntimeError):
    """A sparse solve did not meet its stopping criterion.

    ``best`` is the best iterate found (``None`` without measurements) and
    ``residual`` its l2 residual.
    """

    def __init__(self, message, best=None, residual=float("nan")):
        super().__init__(message)
        self.best = best
        self.residual = residual


@dataclass(frozen=True)
class MeasurementSet:
    center: int
    local_indices: np.ndarray
    values: np.ndarray

    @property
    def size(self) -> int:
        return self.local_indices.size


@dataclass(frozen=True)
class SensingModel:
    """Row selection ``Phi`` of the inverse DFT ``Psi``; ``theta = Phi @ Psi``."""

    rows: np.ndarray
    n: int

    @property
    def phi(self) -> np.ndarray:
        P = np.zeros((self.rows.size, self.n))
        P[np.arange(self.rows.size), self.rows] = 1.0
        return P

    @property
    def psi(self) -> np.ndarray:
        k = np.arange(self.n)
        return np.exp(2j * np.pi * np.outer(k, k) / self.n) / self.n

    @property
    def theta(self) -> np.ndarray:
        k = np.arange(self.n)
        return np.exp(2j * np.pi * np.outer(self.rows, k) / self.n) / self.n


@dataclass(frozen=True)
class SolverConfig:
    """Sparse solver settings.

    ``residual_tol`` is relative to ``||m||_2`` unless ``relative`` is False.
    """

    algorithm: str = "omp"
    residual_tol: float = 1e-6
    max_sparsity: int = 4
    max_iterations: int = 200
    relative: bool = True

    def __post_init__(self):
        if self.algorithm not in ("omp", "basis_pursuit"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if not self.residual_tol > 0:
            raise ValueError("residual_tol must be positive")
        if self.max_sparsity < 1:
            raise ValueError("max_sparsity must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")

    def tolerance(self, m: np.ndarray) -> float:
        if self.relative:
            return self.residual_tol * float(np.linalg.norm(m))
        return self.residual_tol


def form_measurements(signal: ComplexSignal, window: WindowSpec, center: int) -> MeasurementSet:
    """Windowed samples ``w(tau) s(center + tau)`` at the available positions."""
    taus = window.taus
    pos = center + taus
    ok = (pos >= 0) & (pos < signal.n_total)
    ok[ok] = signal.mask[pos[ok]]
    values = window.weights()[ok] * signal.values[pos[ok]]
    return MeasurementSet(int(center), taus[ok], values)


def build_model(ms: MeasurementSet, n: int) -> SensingModel:
    if ms.size == 0:
        raise ValueError("no measurements")
    if ms.size > n:
        raise ValueError(f"{ms.size} measurements exceed window length {n}")
    return SensingModel(np.mod(ms.local_indices, n), n)


def omp(theta: np.ndarray, m: np.ndarray, tol: float, max_atoms: int,
        history: list | None = None) -> np.ndarray:
    """Orthogonal matching pursuit.

    Stops once the residual is within ``tol`` or ``max_atoms`` atoms are
    active.  Residual norms per iteration are appended to ``history``.
    """
    n = theta.shape[1]
    col_norms = np.linalg.norm(theta, axis=0)
    x = np.zeros(n, dtype=complex)
    residual = m.astype(complex)
    support: list[int] = []
    r_norm = np.linalg.norm(residual)
    if history is not None:
        history.append(r_norm)
    max_atoms = min(max_atoms, theta.shape[0], n)
    while r_norm > tol and len(support) < max_atoms:
        corr = np.abs(theta.conj().T @ residual) / col_norms
        corr[support] = -1.0
        support.append(int(np.argmax(corr)))
        coef, *_ = np.linalg.lstsq(theta[:, support], m, rcond=None)
        x[:] = 0
        x[support] = coef
        residual = m - theta[:, support] @ coef
        r_norm = np.linalg.norm(residual)
        if history is not None:
            history.append(r_norm)
    return x


def basis_pursuit(theta: np.ndarray, m: np.ndarray, tol: float,
                  max_iterations: int = 200) -> np.ndarray:
    """Complex l1 minimization subject to ``||theta x - m||_2 <= tol``.

    Solved as a second-order cone program.  Solver round-off beyond ``tol``
    is removed by a minimum-norm correction onto the constraint set, and the
    result is debiased on its support when that changes it negligibly.
    """
    import cvxpy as cp

    x = cp.Variable(theta.shape[1], complex=True)
    problem = cp.Problem(cp.Minimize(cp.norm1(x)),
                         [cp.norm(theta @ x - m, 2) <= tol])
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            problem.solve(solver=cp.CLARABEL, max_iter=max_iterations)
    except cp.error.SolverError as exc:
        raise SolverFailure(f"basis pursuit solver error: {exc}") from exc
    if x.value is None or problem.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        raise SolverFailure(f"basis pursuit did not converge ({problem.status})",
                            best=x.value,
                            residual=float(np.linalg.norm(theta @ x.value - m))
                            if x.value is not None else float("nan"))
    sol = np.asarray(x.value, dtype=complex)
    r = m - theta @ sol
    if np.linalg.norm(r) > tol:
        sol = sol + np.linalg.lstsq(theta, r, rcond=None)[0]
    return _debias(theta, m, sol, tol)


def _debias(theta, m, x, tol, rel_threshold=1e-6, max_change=1e-4):
    """Least-squares refit on the support of ``x``.

    Undoes the O(tol) shrinkage of the l1 solution; kept only if it moves
    ``x`` by less than ``max_change`` (relative) and still fits ``m``.
    """
    scale = np.abs(x).max()
    if scale == 0:
        return x
    support = np.flatnonzero(np.abs(x) > rel_threshold * scale)
    if support.size >= theta.shape[0]:
        return x
    coef, *_ = np.linalg.lstsq(theta[:, support], m, rcond=None)
    refit = np.zeros_like(x)
    refit[support] = coef
    if (np.linalg.norm(theta @ refit - m) <= tol
            and np.linalg.norm(refit - x) <= max_change * np.linalg.norm(x)):
        return refit
    return x


def solve_sparse(model: SensingModel, m, cfg: SolverConfig = SolverConfig()) -> np.ndarray:
    """Sparse spectrum ``F`` (DFT order, ``k = 0..Np-1``) with ``theta F ~= m``.

    Raises ``SolverFailure`` when there are no measurements or when the
    residual bound is not met.  OMP stopping at ``max_sparsity`` atoms is a
    regular stop, not a failure.
    """
    m = np.asarray(m, dtype=complex).reshape(-1)
    if m.size == 0:
        raise SolverFailure("no measurements")
    if m.size != model.rows.size:
        raise ValueError(f"{m.size} values for {model.rows.size} model rows")
    tol = cfg.tolerance(m)
    if not np.any(m):
        return np.zeros(model.n, dtype=complex)
    theta = model.theta
    if cfg.algorithm == "omp":
        return omp(theta, m, tol, cfg.max_sparsity)
    sol = basis_pursuit(theta, m, tol, cfg.max_iterations)
    res = float(np.linalg.norm(theta @ sol - m))
    if res > tol * (1 + 1e-9):
        raise SolverFailure("basis pursuit residual above tolerance", sol, res)
    return sol


def cs_stft(signal: ComplexSignal, window: WindowSpec, cfg: SolverConfig = SolverConfig(),
            centers=None, min_measurements: int | None = None, n_jobs: int = 1) -> TFMap:
    """STFT whose columns are recovered by sparse reconstruction.

    Windows with fewer than ``min_measurements`` (default ``Np/4``) available
    samples, or whose solve fails, become gap rows.  Fully observed windows
    are copied from the direct DFT, which is the unique solution there.
    """
    n = window.length
    if min_measurements is None:
        min_measurements = n // 4
    centers = _centers(signal.n_total, centers)
    def column(center):
        ms = form_measurements(signal, window, int(center))
        if ms.size < max(min_measurements, 1):
            return None
        if ms.size == n:
            seg = np.zeros(n, dtype=complex)
            seg[ms.local_indices + n // 2] = ms.values
            return _signed_dft(seg)
        model = build_model(ms, n)
        try:
            F = solve_sparse(model, ms.values, cfg)
        except SolverFailure as exc:
            log.debug("window %d: %s", center, exc)
            return False
        return np.fft.fftshift(F)

    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            cols = list(pool.map(column, centers))
    else:
        cols = [column(c) for c in centers]

    data = np.zeros((centers.size, n), dtype=complex)
    gaps = np.zeros(centers.size, dtype=bool)
    failures = 0
    for i, col in enumerate(cols):
        if col is None or col is False:
            gaps[i] = True
            failures += col is False
        else:
            data[i] = col
    if failures:
        warnings.warn(f"{failures} window solve(s) failed; marked as gaps", RuntimeWarning)
    return TFMap(data, centers, "cs_stft", gaps)
