"""Frame sequences, availability masks and the synthetic scene generator."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = [
    "FrameSequence",
    "SyntheticSceneSpec",
    "AvailabilityMask",
    "make_mask",
    "read_mask_file",
    "write_mask_file",
    "list_frame_files",
    "load_sequence",
    "load_scene_spec",
    "generate_synthetic",
    "apply_mask",
]

_IMAGE_SUFFIXES = {".pgm", ".png"}
_REC601 = np.array([0.299, 0.587, 0.114])


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FrameSequence:
    """Grayscale frames on a full time grid of ``n_total`` instants.

    ``frames[i]`` is the frame observed at grid index ``available[i]``.
    """

    frames: np.ndarray
    n_total: int
    available: np.ndarray

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=float)
        available = np.asarray(self.available, dtype=np.int64).reshape(-1)
        if frames.ndim != 3:
            raise ValueError("frames must be a (M, H, W) stack")
        if frames.shape[0] != available.size:
            raise ValueError(
                f"{frames.shape[0]} frames but {available.size} available indices"
            )
        if available.size > self.n_total:
            raise ValueError("more available frames than grid instants")
        if available.size and (available[0] < 0 or available[-1] >= self.n_total):
            raise ValueError("available index outside [0, n_total)")
        if np.any(np.diff(available) <= 0):
            raise ValueError("available indices must be strictly increasing")
        object.__setattr__(self, "frames", _frozen(frames))
        object.__setattr__(self, "available", _frozen(available))

    @property
    def height(self) -> int:
        return self.frames.shape[1]

    @property
    def width(self) -> int:
        return self.frames.shape[2]

    @property
    def n_available(self) -> int:
        return self.available.size

    def frame(self, t: int) -> np.ndarray:
        """Frame at grid index ``t``; raises ``KeyError`` if it is missing."""
        i = np.searchsorted(self.available, t)
        if i == self.available.size or self.available[i] != t:
            raise KeyError(f"frame {t} is not available")
        return self.frames[i]


@dataclass(frozen=True)
class AvailabilityMask:
    n_total: int
    kept: np.ndarray
    keep_ratio: float = 1.0
    seed: int | None = None

    def __post_init__(self):
        kept = np.asarray(self.kept, dtype=np.int64).reshape(-1)
        if np.any(np.diff(kept) <= 0):
            raise ValueError("kept indices must be unique and sorted")
        if kept.size and (kept[0] < 0 or kept[-1] >= self.n_total):
            raise ValueError("kept index outside [0, n_total)")
        object.__setattr__(self, "kept", _frozen(kept))

    def __eq__(self, other):
        if not isinstance(other, AvailabilityMask):
            return NotImplemented
        return self.n_total == other.n_total and np.array_equal(self.kept, other.kept)

    __hash__ = None


def make_mask(n_total: int, keep_ratio: float, seed: int = 0) -> AvailabilityMask:
    """Uniform random subset of ``round(keep_ratio * n_total)`` grid indices."""
    if not 0.0 < keep_ratio <= 1.0:
        raise ValueError(f"keep_ratio must be in (0, 1], got {keep_ratio}")
    n_keep = int(np.floor(keep_ratio * n_total + 0.5))
    if n_keep >= n_total:
        kept = np.arange(n_total)
    else:
        rng = np.random.default_rng(seed)
        kept = np.sort(rng.choice(n_total, size=n_keep, replace=False))
    return AvailabilityMask(n_total, kept, keep_ratio, seed)


def read_mask_file(path, n_total: int) -> AvailabilityMask:
    """Read a mask file: one kept index per line, ascending."""
    lines = Path(path).read_text().split()
    kept = np.array([int(s) for s in lines], dtype=np.int64)
    return AvailabilityMask(n_total, kept, kept.size / n_total if n_total else 1.0)


def write_mask_file(mask: AvailabilityMask, path) -> None:
    Path(path).write_text("".join(f"{i}\n" for i in mask.kept))


def _frame_key(path: Path):
    digits = re.findall(r"\d+", path.stem)
    if not digits:
        raise ValueError(f"frame file {path.name!r} has no frame number")
    return int(digits[-1]), path.name


def _read_gray(path: Path) -> np.ndarray:
    from PIL import Image

    with Image.open(path) as im:
        if im.mode in ("RGB", "RGBA", "P", "CMYK", "YCbCr", "LA", "PA"):
            rgb = np.asarray(im.convert("RGB"), dtype=float) / 255.0
            return rgb @ _REC601
        if im.mode in ("I;16", "I;16B", "I;16L", "I"):
            return np.asarray(im, dtype=float) / 65535.0
        return np.asarray(im.convert("L"), dtype=float) / 255.0


def list_frame_files(dir_path) -> list[Path]:
    """PGM/PNG files in ``dir_path`` sorted by frame number."""
    root = Path(dir_path)
    if not root.is_dir():
        raise FileNotFoundError(f"frame directory not found: {root}")
    return sorted((p for p in root.iterdir() if p.suffix.lower() in _IMAGE_SUFFIXES),
                  key=_frame_key)


def load_sequence(dir_path, mask: AvailabilityMask | Sequence[int] | None = None) -> FrameSequence:
    """Load numerically named PGM/PNG frames from ``dir_path``.

    Only the frames selected by ``mask`` are decoded.  ``n_total`` is the file
    count, so missing frames keep their place on the time grid.
    """
    files = list_frame_files(dir_path)
    n_total = len(files)
    if mask is None:
        kept = np.arange(n_total)
    elif isinstance(mask, AvailabilityMask):
        if mask.n_total != n_total:
            raise ValueError(f"mask is for {mask.n_total} frames, directory has {n_total}")
        kept = mask.kept
    else:
        kept = np.asarray(sorted(set(int(i) for i in mask)), dtype=np.int64)
    if kept.size and (kept[-1] >= n_total or kept[0] < 0):
        raise IndexError(f"mask index {int(kept[-1])} beyond file count {n_total}")

    frames = []
    for i in kept:
        img = _read_gray(files[i])
        if frames and img.shape != frames[0].shape:
            raise ValueError(
                f"{files[i].name} is {img.shape[1]}x{img.shape[0]}, expected "
                f"{frames[0].shape[1]}x{frames[0].shape[0]}"
            )
        frames.append(img)
    stack = np.stack(frames) if frames else np.zeros((0, 0, 0))
    return FrameSequence(stack, n_total, kept)


@dataclass(frozen=True)
class SyntheticSceneSpec:
    """A single bright rectangle sliding horizontally over a flat background.

    ``velocity_profile`` is ``("constant", vx)`` or
    ``("linear_accel", vx_start, vx_end)``, in pixels per frame.
    """

    width: int = 512
    height: int = 64
    n_frames: int = 128
    object_size: tuple[int, int] = (16, 16)
    initial_position: tuple[int, int] = (16, 24)
    velocity_profile: tuple = ("constant", 3.0)
    object_intensity: float = 1.0
    background_intensity: float = 0.0
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "object_size", tuple(int(v) for v in self.object_size))
        object.__setattr__(self, "initial_position", tuple(int(v) for v in self.initial_position))
        object.__setattr__(self, "velocity_profile", tuple(self.velocity_profile))
        kind = self.velocity_profile[0]
        if kind == "constant" and len(self.velocity_profile) == 2:
            pass
        elif kind == "linear_accel" and len(self.velocity_profile) == 3:
            pass
        else:
            raise ValueError(f"unknown velocity profile {self.velocity_profile!r}")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if self.n_frames < 1:
            raise ValueError("n_frames must be positive")

    def velocity(self) -> np.ndarray:
        t = np.arange(self.n_frames, dtype=float)
        if self.velocity_profile[0] == "constant":
            return np.full(self.n_frames, float(self.velocity_profile[1]))
        v0, v1 = map(float, self.velocity_profile[1:])
        span = max(self.n_frames - 1, 1)
        return v0 + (v1 - v0) * t / span

    def displacement(self) -> np.ndarray:
        """Exact integral of the velocity profile from 0 to t."""
        t = np.arange(self.n_frames, dtype=float)
        if self.velocity_profile[0] == "constant":
            return float(self.velocity_profile[1]) * t
        v0, v1 = map(float, self.velocity_profile[1:])
        span = max(self.n_frames - 1, 1)
        return v0 * t + 0.5 * (v1 - v0) * t**2 / span


def load_scene_spec(path) -> SyntheticSceneSpec:
    """Read a SyntheticSceneSpec from a JSON document."""
    doc = json.loads(Path(path).read_text())
    return scene_spec_from_dict(doc)


def scene_spec_from_dict(doc: dict) -> SyntheticSceneSpec:
    doc = dict(doc)
    vp = doc.get("velocity_profile")
    if isinstance(vp, dict):
        kind = vp.get("kind") or vp.get("type")
        if kind == "constant":
            doc["velocity_profile"] = ("constant", vp["vx"])
        elif kind == "linear_accel":
            doc["velocity_profile"] = ("linear_accel", vp["vx_start"], vp["vx_end"])
        else:
            raise ValueError(f"unknown velocity profile {vp!r}")
    known = SyntheticSceneSpec.__dataclass_fields__
    unknown = set(doc) - set(known)
    if unknown:
        raise ValueError(f"unknown scene fields: {sorted(unknown)}")
    return SyntheticSceneSpec(**doc)


def generate_synthetic(spec: SyntheticSceneSpec) -> tuple[FrameSequence, np.ndarray]:
    """Render ``spec`` into a fully available sequence.

    Returns the sequence and the per-frame true velocity (px/frame, before
    the object position is rounded to whole pixels).
    """
    w_o, h_o = spec.object_size
    x0, y0 = spec.initial_position
    xs = np.floor(x0 + spec.displacement() + 0.5).astype(np.int64)
    if w_o < 1 or h_o < 1:
        raise ValueError("object_size must be positive")
    if y0 < 0 or y0 + h_o > spec.height:
        raise ValueError(f"object rows [{y0}, {y0 + h_o}) leave the {spec.height}-pixel frame")
    bad = np.flatnonzero((xs < 0) | (xs + w_o > spec.width))
    if bad.size:
        t = int(bad[0])
        raise ValueError(
            f"object leaves the frame at t={t}: columns [{xs[t]}, {xs[t] + w_o}) "
            f"outside [0, {spec.width})"
        )

    frames = np.full((spec.n_frames, spec.height, spec.width), float(spec.background_intensity))
    for t, x in enumerate(xs):
        frames[t, y0:y0 + h_o, x:x + w_o] = spec.object_intensity
    if spec.noise_sigma > 0:
        rng = np.random.default_rng(spec.seed)
        frames += rng.normal(0.0, spec.noise_sigma, size=frames.shape)
    np.clip(frames, 0.0, 1.0, out=frames)
    seq = FrameSequence(frames, spec.n_frames, np.arange(spec.n_frames))
    return seq, spec.velocity()


def apply_mask(seq: FrameSequence, mask: AvailabilityMask) -> FrameSequence:
    """Keep only the frames listed in ``mask.kept``."""
    if mask.n_total != seq.n_total:
        raise ValueError(f"mask is for {mask.n_total} frames, sequence has {seq.n_total}")
    pos = np.searchsorted(seq.available, mask.kept)
    missing = (pos >= seq.available.size) | (
        seq.available[np.minimum(pos, seq.available.size - 1)] != mask.kept
    ) if seq.available.size else np.ones(mask.kept.size, bool)
    if np.any(missing):
        raise KeyError(f"mask keeps frame {int(mask.kept[missing][0])} which is not present")
    return FrameSequence(seq.frames[pos], seq.n_total, mask.kept)
