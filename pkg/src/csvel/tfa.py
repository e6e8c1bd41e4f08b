"""STFT, spectrogram, S-method and ridge-based IF extraction.

Conventions: windows span ``tau in [-Np/2, Np/2 - 1]`` around each center,
samples outside the grid are zero, and frequency bins are signed,
``k in [-Np/2, Np/2)`` with ``omega_k = 2*pi*k/Np`` rad/sample.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .propagation import ComplexSignal, MuParams
from .track import VelocityTrack

__all__ = [
    "WindowSpec",
    "TFMap",
    "SMethodParams",
    "stft",
    "spectrogram",
    "s_method",
    "extract_if",
    "window_segments",
    "ridge_concentration",
]


@dataclass(frozen=True)
class WindowSpec:
    kind: str = "hanning"
    length: int = 64

    def __post_init__(self):
        if self.kind not in ("hanning", "rectangular"):
            raise ValueError(f"unknown window kind {self.kind!r}")
        if self.length < 4 or self.length % 2:
            raise ValueError(f"window length must be even and >= 4, got {self.length}")

    @property
    def taus(self) -> np.ndarray:
        half = self.length // 2
        return np.arange(-half, half)

    def weights(self) -> np.ndarray:
        """Window weights indexed by ``tau + Np/2``."""
        n = self.length
        if self.kind == "rectangular":
            return np.ones(n)
        return 0.5 * (1.0 - np.cos(2.0 * np.pi * (self.taus + n // 2) / (n - 1)))


@dataclass(frozen=True)
class SMethodParams:
    L: int = 3
    theta_step: int = 1

    def __post_init__(self):
        if self.L < 0:
            raise ValueError("L must be >= 0")
        if self.theta_step != 1:
            raise ValueError("only a one-bin frequency step is supported")


@dataclass(frozen=True)
class TFMap:
    """Time-frequency matrix with rows = time stamps, columns = signed bins.

    ``gaps`` flags rows that carry no estimate (e.g. unsolvable windows).
    """

    data: np.ndarray
    time_stamps: np.ndarray
    kind: str = "stft"
    gaps: np.ndarray = field(default=None)

    def __post_init__(self):
        data = np.asarray(self.data)
        stamps = np.asarray(self.time_stamps, dtype=np.int64).reshape(-1)
        if data.ndim != 2 or data.shape[0] != stamps.size:
            raise ValueError("data must be (n_times, Np)")
        gaps = self.gaps
        gaps = np.zeros(stamps.size, bool) if gaps is None else np.asarray(gaps, bool)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "time_stamps", stamps)
        object.__setattr__(self, "gaps", gaps)

    @property
    def n_bins(self) -> int:
        return self.data.shape[1]

    @property
    def freq_bins(self) -> np.ndarray:
        n = self.n_bins
        return np.arange(-(n // 2), n - n // 2)

    @property
    def omegas(self) -> np.ndarray:
        return 2.0 * np.pi * self.freq_bins / self.n_bins

    def to_csv(self, path) -> None:
        """Dump as a matrix: one row per time stamp, one column per signed bin."""
        data = self.data
        if np.iscomplexobj(data):
            data = np.abs(data)
        header = "t," + ",".join(str(k) for k in self.freq_bins)
        rows = [header]
        for t, row in zip(self.time_stamps, data):
            rows.append(f"{t}," + ",".join(f"{v:.10g}" for v in row))
        with open(path, "w", newline="\n") as fh:
            fh.write("\n".join(rows) + "\n")


def _as_values(signal) -> tuple[np.ndarray, int]:
    if isinstance(signal, ComplexSignal):
        return signal.values, signal.n_total
    values = np.asarray(signal, dtype=complex).reshape(-1)
    return values, values.size


def _centers(n_total: int, centers) -> np.ndarray:
    if centers is None:
        return np.arange(n_total)
    centers = np.asarray(centers, dtype=np.int64).reshape(-1)
    if centers.size and (centers.min() < 0 or centers.max() >= n_total):
        raise ValueError(f"window center outside [0, {n_total})")
    return centers


def window_segments(values: np.ndarray, length: int, centers: np.ndarray) -> np.ndarray:
    """Rows ``values[t + tau]`` for ``tau in [-Np/2, Np/2)``, zero outside the grid."""
    half = length // 2
    padded = np.concatenate([np.zeros(half, values.dtype), values,
                             np.zeros(half, values.dtype)])
    idx = centers[:, None] + np.arange(length)[None, :]
    return padded[idx]


def _signed_dft(segments: np.ndarray) -> np.ndarray:
    # segment column j holds tau = j - Np/2; rolling by Np/2 puts tau at tau mod Np
    half = segments.shape[-1] // 2
    spectrum = np.fft.fft(np.roll(segments, half, axis=-1), axis=-1)
    return np.fft.fftshift(spectrum, axes=-1)


def stft(signal, window: WindowSpec, centers=None) -> TFMap:
    """Short-time Fourier transform with a plain (unnormalized) forward DFT.

    Missing samples of a ``ComplexSignal`` enter as zeros.
    """
    values, n_total = _as_values(signal)
    centers = _centers(n_total, centers)
    segments = window_segments(values, window.length, centers) * window.weights()
    return TFMap(_signed_dft(segments), centers, "stft")


def spectrogram(stft_map: TFMap) -> TFMap:
    return replace(stft_map, data=np.abs(stft_map.data) ** 2, kind="spec")


def s_method(stft_map: TFMap, params: SMethodParams | int = SMethodParams()) -> TFMap:
    """S-method: ``sum_{i=-L..L} STFT(t, k+i) * conj(STFT(t, k-i))``.

    Bins beyond the signed range count as zero.
    """
    L = params.L if isinstance(params, SMethodParams) else SMethodParams(int(params)).L
    X = stft_map.data
    n = X.shape[1]
    if L > n // 4:
        raise ValueError(f"L={L} exceeds Np/4={n // 4}")
    out = np.abs(X) ** 2
    if L:
        padded = np.pad(X, ((0, 0), (L, L)))
        for i in range(1, L + 1):
            up = padded[:, L + i:L + i + n]
            down = padded[:, L - i:L - i + n]
            # terms i and -i are conjugates of each other
            out += 2.0 * (up * down.conj()).real
    return replace(stft_map, data=out, kind="sm")


def _ridge_bins(data: np.ndarray, freq_bins: np.ndarray) -> np.ndarray:
    # order candidates by (|k|, k) so argmax ties go to small |k|, negative first
    order = np.lexsort((freq_bins, np.abs(freq_bins)))
    return freq_bins[order][np.argmax(data[:, order], axis=1)]


def extract_if(tf_map: TFMap, mu: MuParams | float, method: str = "") -> VelocityTrack:
    """Velocity ``2*pi*k/(Np*mu)`` from the ridge bin ``k`` of every row.

    All-zero and flagged gap rows become NaN.
    """
    mu = mu.mu if isinstance(mu, MuParams) else MuParams(float(mu)).mu
    data = np.asarray(tf_map.data)
    if np.iscomplexobj(data):
        raise TypeError("extract_if needs a real-valued map")
    n = tf_map.n_bins
    finite = np.all(np.isfinite(data), axis=1)
    safe = np.where(finite[:, None], data, 0.0)
    k = _ridge_bins(safe, tf_map.freq_bins)
    velocity = 2.0 * np.pi * k / (n * mu)
    undefined = tf_map.gaps | ~finite | np.all(safe == 0, axis=1)
    velocity = np.where(undefined, np.nan, velocity)
    return VelocityTrack(tf_map.time_stamps, velocity, method, mu)


def ridge_concentration(tf_map: TFMap) -> np.ndarray:
    """Per row: peak value over total absolute energy (NaN for empty rows)."""
    data = np.abs(np.asarray(tf_map.data, dtype=float))
    total = data.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(total > 0, data.max(axis=1) / total, np.nan)
