"""End-to-end velocity estimation, mu selection and output files."""

from __future__ import annotations

import io
import json
import logging
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .ingest import (
    FrameSequence,
    SyntheticSceneSpec,
    apply_mask,
    generate_synthetic,
    list_frame_files,
    load_sequence,
    make_mask,
    read_mask_file,
    scene_spec_from_dict,
)
from .projection import project
from .propagation import DEFAULT_MU_SWEEP, MuParams, propagate
from .recon import SolverConfig, cs_stft
from .tfa import SMethodParams, WindowSpec, extract_if, s_method, spectrogram, stft
from .track import VelocityTrack

__all__ = [
    "METHODS",
    "ConfigError",
    "PipelineError",
    "PipelineConfig",
    "estimate_tracks",
    "load_input",
    "run_pipeline",
    "select_mu",
    "format_csv",
    "emit_csv",
    "emit_plot",
]

log = logging.getLogger(__name__)

METHODS = ("initial_sm", "cs_spec", "cs_sm")
CSV_HEADER = "frame,method,mu,velocity_px_per_frame"


class ConfigError(ValueError):
    pass


class PipelineError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass(frozen=True)
class PipelineConfig:
    """Everything needed for one run.

    Input is either ``synthetic`` (a scene spec) or ``frames_dir``; the
    availability mask comes from ``mask_file`` or from ``keep_ratio``/``seed``.
    """

    synthetic: SyntheticSceneSpec | None = None
    frames_dir: Path | None = None
    mask_file: Path | None = None
    keep_ratio: float = 1.0
    seed: int = 0
    window: WindowSpec = WindowSpec("hanning", 64)
    mus: tuple[float, ...] = DEFAULT_MU_SWEEP
    sm: SMethodParams = SMethodParams(3)
    solver: SolverConfig = SolverConfig()
    methods: tuple[str, ...] = METHODS
    normalize_gap: bool = False
    output_csv: Path | None = None
    output_plot: Path | None = None
    velocity_scale: float = 1.0
    n_jobs: int = 1

    def __post_init__(self):
        if (self.synthetic is None) == (self.frames_dir is None):
            raise ConfigError("give exactly one of a synthetic scene or a frames directory")
        if not self.methods:
            raise ConfigError("select at least one method")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ConfigError(f"unknown method(s) {bad}; choose from {list(METHODS)}")
        if not self.mus:
            raise ConfigError("no mu values")
        for mu in self.mus:
            if not 0.0 < mu <= np.pi:
                raise ConfigError(f"mu must be in (0, pi], got {mu}")
        if not 0.0 < self.keep_ratio <= 1.0:
            raise ConfigError(f"keep_ratio must be in (0, 1], got {self.keep_ratio}")
        if self.sm.L > self.window.length // 4:
            raise ConfigError(f"L={self.sm.L} exceeds Np/4={self.window.length // 4}")
        if not self.velocity_scale > 0:
            raise ConfigError("velocity_scale must be positive")

    @classmethod
    def from_dict(cls, doc: dict, base_dir: Path | str = ".") -> "PipelineConfig":
        """Build from a JSON-style mapping; relative paths resolve against ``base_dir``."""
        base = Path(base_dir)

        def path(v):
            if v is None:
                return None
            p = Path(v)
            return p if p.is_absolute() else base / p

        doc = dict(doc)
        try:
            inp = dict(doc.pop("input", {}))
            synthetic = inp.pop("synthetic", None)
            if isinstance(synthetic, (str, Path)):
                synthetic = json.loads(path(synthetic).read_text())
            if synthetic is not None:
                synthetic = scene_spec_from_dict(synthetic)
            win = doc.pop("window", {})
            mu = doc.pop("mu", None)
            if mu is None:
                mus = DEFAULT_MU_SWEEP
            elif isinstance(mu, (int, float)):
                mus = (float(mu),)
            else:
                mus = tuple(float(v) for v in mu)
            sm = doc.pop("sm", {})
            solver = doc.pop("solver", {})
            kwargs = dict(
                synthetic=synthetic,
                frames_dir=path(inp.pop("frames_dir", None)),
                mask_file=path(inp.pop("mask_file", None)),
                keep_ratio=float(inp.pop("keep_ratio", 1.0)),
                seed=int(inp.pop("seed", 0)),
                window=WindowSpec(win.get("kind", "hanning"), int(win.get("length", 64))),
                mus=mus,
                sm=SMethodParams(int(sm.get("L", 3))),
                solver=SolverConfig(**solver),
                methods=tuple(doc.pop("methods", METHODS)),
                normalize_gap=bool(doc.pop("normalize_gap", False)),
                output_csv=path(doc.pop("output_csv", None)),
                output_plot=path(doc.pop("output_plot", None)),
                velocity_scale=float(doc.pop("velocity_scale", 1.0)),
                n_jobs=int(doc.pop("n_jobs", 1)),
            )
            if inp:
                raise ConfigError(f"unknown input keys: {sorted(inp)}")
            if doc:
                raise ConfigError(f"unknown config keys: {sorted(doc)}")
            return cls(**kwargs)
        except ConfigError:
            raise
        except (TypeError, ValueError, KeyError, OSError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, path) -> "PipelineConfig":
        path = Path(path)
        try:
            doc = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(doc, path.parent)


def load_input(cfg: PipelineConfig) -> tuple[FrameSequence, np.ndarray | None]:
    """The masked frame sequence and, for synthetic input, the true velocity."""
    truth = None
    try:
        if cfg.synthetic is not None:
            seq, truth = generate_synthetic(cfg.synthetic)
            if cfg.mask_file is not None:
                mask = read_mask_file(cfg.mask_file, seq.n_total)
            else:
                mask = make_mask(seq.n_total, cfg.keep_ratio, cfg.seed)
            seq = apply_mask(seq, mask)
        else:
            n_files = len(list_frame_files(cfg.frames_dir))
            if cfg.mask_file is not None:
                mask = read_mask_file(cfg.mask_file, n_files)
            elif cfg.keep_ratio < 1.0 and n_files:
                mask = make_mask(n_files, cfg.keep_ratio, cfg.seed)
            else:
                mask = None
            seq = load_sequence(cfg.frames_dir, mask)
    except (OSError, ValueError, KeyError, IndexError) as exc:
        raise PipelineError("ingest", str(exc)) from exc
    if seq.n_total == 0 or seq.n_available == 0:
        raise PipelineError("ingest", "empty sequence")
    return seq, truth


def estimate_tracks(
    seq: FrameSequence,
    mus: Iterable[float] = DEFAULT_MU_SWEEP,
    methods: Sequence[str] = METHODS,
    window: WindowSpec = WindowSpec("hanning", 64),
    sm: SMethodParams = SMethodParams(3),
    solver: SolverConfig = SolverConfig(),
    normalize_gap: bool = False,
    n_jobs: int = 1,
) -> list[VelocityTrack]:
    """One velocity track per (method, mu), ordered by method then mu."""
    if seq.n_total == 0 or seq.n_available == 0:
        raise PipelineError("ingest", "empty sequence")
    try:
        proj = project(seq, normalize_gap=normalize_gap)
    except ValueError as exc:
        raise PipelineError("projection", str(exc)) from exc

    by_method: dict[str, list[VelocityTrack]] = {m: [] for m in methods}
    for mu in mus:
        try:
            signal = propagate(proj, MuParams(mu))
        except ValueError as exc:
            raise PipelineError("propagation", str(exc)) from exc
        try:
            if "initial_sm" in methods:
                direct = stft(signal, window)
                by_method["initial_sm"].append(
                    extract_if(s_method(direct, sm), mu, "initial_sm"))
            if "cs_spec" in methods or "cs_sm" in methods:
                with warnings.catch_warnings(record=True) as caught:
                    warnings.simplefilter("always")
                    recovered = cs_stft(signal, window, solver, n_jobs=n_jobs)
                for w in caught:
                    log.warning("mu=%g: %s", mu, w.message)
                if "cs_spec" in methods:
                    by_method["cs_spec"].append(
                        extract_if(spectrogram(recovered), mu, "cs_spec"))
                if "cs_sm" in methods:
                    by_method["cs_sm"].append(
                        extract_if(s_method(recovered, sm), mu, "cs_sm"))
        except ValueError as exc:
            raise PipelineError("time-frequency", str(exc)) from exc
    return [t for m in methods for t in by_method[m]]


def run_pipeline(cfg: PipelineConfig) -> list[VelocityTrack]:
    """Load the input, estimate all tracks and write the configured outputs."""
    seq, _ = load_input(cfg)
    tracks = estimate_tracks(seq, cfg.mus, cfg.methods, cfg.window, cfg.sm,
                             cfg.solver, cfg.normalize_gap, cfg.n_jobs)
    try:
        if cfg.output_csv is not None:
            emit_csv(tracks, cfg.output_csv, cfg.velocity_scale)
        if cfg.output_plot is not None:
            emit_plot(tracks, cfg.output_plot, cfg.velocity_scale)
    except OSError as exc:
        raise PipelineError("output", str(exc)) from exc
    return tracks


def select_mu(tracks: Sequence[VelocityTrack], max_gap_fraction: float = 0.5
              ) -> tuple[float, VelocityTrack]:
    """Pick the smoothest track (least total variation); ties go to the smaller mu.

    Tracks with more than ``max_gap_fraction`` gaps are not admissible.
    """
    if not tracks:
        raise ValueError("no tracks to choose from")
    if len({t.method for t in tracks}) > 1:
        raise ValueError("tracks come from different methods")
    admissible = [t for t in tracks if t.gap_fraction <= max_gap_fraction]
    if not admissible:
        raise PipelineError("select_mu", "no admissible mu: every track is mostly gaps")
    best = min(admissible, key=lambda t: (t.smoothness, t.mu))
    return best.mu, best


def format_csv(tracks: Sequence[VelocityTrack], velocity_scale: float = 1.0) -> str:
    out = io.StringIO()
    out.write(CSV_HEADER + "\n")
    for tr in tracks:
        mu = f"{tr.mu:g}"
        for f, v in zip(tr.frames, tr.velocity):
            vs = "" if np.isnan(v) else f"{v * velocity_scale:.6g}"
            out.write(f"{f},{tr.method},{mu},{vs}\n")
    return out.getvalue()


def emit_csv(tracks: Sequence[VelocityTrack], path, velocity_scale: float = 1.0) -> None:
    if not tracks:
        raise ValueError("no tracks to write")
    with open(path, "w", newline="\n") as fh:
        fh.write(format_csv(tracks, velocity_scale))


def emit_plot(tracks: Sequence[VelocityTrack], path, velocity_scale: float = 1.0) -> None:
    """Velocity-vs-frame SVG, one labeled line per track."""
    if not tracks:
        raise ValueError("no tracks to plot")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "csvel", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(8, 4.5))
        for tr in tracks:
            ax.plot(tr.frames, tr.velocity * velocity_scale,
                    label=f"{tr.method} mu={tr.mu:g}", gid=f"{tr.method}-{tr.mu:g}")
        ax.set_xlabel("frame")
        ax.set_ylabel("velocity")
        ax.legend()
        ax.grid(alpha=0.3)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
