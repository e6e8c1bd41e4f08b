"""Velocity estimation from incomplete video via compressive sensing and the S-method."""

from .ingest import (
    AvailabilityMask,
    FrameSequence,
    SyntheticSceneSpec,
    apply_mask,
    generate_synthetic,
    load_scene_spec,
    load_sequence,
    make_mask,
)
from .projection import ProjectionSignal, project
from .propagation import DEFAULT_MU_SWEEP, ComplexSignal, MuParams, propagate
from .recon import (
    MeasurementSet,
    SensingModel,
    SolverConfig,
    SolverFailure,
    build_model,
    cs_stft,
    form_measurements,
    solve_sparse,
)
from .tfa import SMethodParams, TFMap, WindowSpec, extract_if, s_method, spectrogram, stft
from .track import VelocityTrack, total_variation

__version__ = "0.1.0"
