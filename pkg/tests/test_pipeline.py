import json
import re

import numpy as np
import pytest

from csvel.ingest import AvailabilityMask, SyntheticSceneSpec, apply_mask, generate_synthetic, make_mask
from csvel.pipeline import (
    CSV_HEADER,
    ConfigError,
    PipelineConfig,
    PipelineError,
    emit_csv,
    emit_plot,
    estimate_tracks,
    format_csv,
    load_input,
    run_pipeline,
    select_mu,
)
from csvel.tfa import WindowSpec
from csvel.track import VelocityTrack, total_variation

CONST = SyntheticSceneSpec(512, 64, 128, velocity_profile=("constant", 3.0))
ACCEL = SyntheticSceneSpec(512, 64, 128, velocity_profile=("linear_accel", 1.0, 5.0))
INTERIOR = np.arange(32, 96)


def track(values, mu=0.1, method="cs_sm"):
    v = np.asarray(values, float)
    return VelocityTrack(np.arange(v.size), v, method, mu)


def test_constant_velocity_full_availability():
    seq, truth = generate_synthetic(CONST)
    (tr,) = estimate_tracks(seq, [0.15], ["cs_sm"])
    assert tr.method == "cs_sm" and tr.mu == 0.15
    assert tr.frames.size == 128
    assert np.all(np.abs(tr.velocity[INTERIOR] - 3.0) <= 2 * np.pi / (64 * 0.15))


def test_example_two_configuration():
    cfg = PipelineConfig(synthetic=CONST, keep_ratio=70 / 130, seed=1, mus=(0.25,),
                         methods=("cs_spec", "cs_sm"))
    tracks = run_pipeline(cfg)
    assert [t.method for t in tracks] == ["cs_spec", "cs_sm"]
    assert all(t.mu == 0.25 for t in tracks)


def test_empty_sequence(tmp_path):
    cfg = PipelineConfig(frames_dir=tmp_path)
    with pytest.raises(PipelineError, match="empty sequence") as info:
        run_pipeline(cfg)
    assert info.value.stage == "ingest"


def test_single_frame_is_projection_failure():
    seq, _ = generate_synthetic(CONST)
    seq = apply_mask(seq, AvailabilityMask(128, [5]))
    with pytest.raises(PipelineError) as info:
        estimate_tracks(seq, [0.15])
    assert info.value.stage == "projection"


def test_gaps_propagate_to_tracks():
    seq, _ = generate_synthetic(CONST)
    kept = np.r_[np.arange(0, 40), np.arange(100, 128)]
    tracks = estimate_tracks(apply_mask(seq, AvailabilityMask(128, kept)), [0.15],
                             ["cs_spec", "cs_sm"])
    for tr in tracks:
        # windows around frame 70 hold fewer than Np/4 samples
        assert np.isnan(tr.velocity[70])
        assert not np.isnan(tr.velocity[20])
    assert np.array_equal(tracks[0].gaps, tracks[1].gaps)


# mu selection ----------------------------------------------------------------

def test_select_single_candidate():
    t = track([1, 2, 1])
    assert select_mu([t]) == (0.1, t)


def test_select_constant_wins_and_ties():
    flat = track([2, 2, 2, 2], mu=0.3)
    bumpy = track([2, 3, 2, 2], mu=0.1)
    assert select_mu([bumpy, flat])[0] == 0.3
    a, b = track([1, 1], mu=0.25), track([1, 1], mu=0.15)
    assert select_mu([a, b])[0] == 0.15


def test_select_gap_rules():
    gappy = track([1, np.nan, np.nan, np.nan], mu=0.1)
    ok = track([1, 3, 1, 3], mu=0.2)
    assert select_mu([gappy, ok])[0] == 0.2
    with pytest.raises(PipelineError, match="no admissible"):
        select_mu([gappy])
    assert total_variation([1, np.nan, 4, 2]) == 5


def test_select_rejects_mixed_methods():
    with pytest.raises(ValueError):
        select_mu([track([1], method="cs_sm"), track([1], method="cs_spec")])


def test_select_scale_invariance():
    rng = np.random.default_rng(0)
    tracks = [track(rng.normal(size=30), mu=m) for m in (0.1, 0.15, 0.2)]
    mu, _ = select_mu(tracks)
    assert select_mu([t.scaled(7.5) for t in tracks])[0] == mu


def test_select_on_accelerating_sweep():
    seq, truth = generate_synthetic(ACCEL)
    seq = apply_mask(seq, make_mask(128, 0.545, 0))
    tracks = estimate_tracks(seq, methods=["cs_sm"])
    assert len(tracks) == 5
    _, best = select_mu(tracks)
    errs = [np.nanmax(np.abs(t.velocity[INTERIOR] - truth[INTERIOR])) for t in tracks]
    assert np.nanmax(np.abs(best.velocity[INTERIOR] - truth[INTERIOR])) <= np.median(errs)


# outputs ---------------------------------------------------------------------

def test_csv_rows_and_gaps(tmp_path):
    v = np.full(121, 2.0)
    v[10] = np.nan
    v[11] = 1.23456789
    emit_csv([track(v, mu=0.15)], tmp_path / "t.csv")
    raw = (tmp_path / "t.csv").read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 122
    assert lines[11] == "10,cs_sm,0.15,"
    assert lines[12] == "11,cs_sm,0.15,1.23457"


def test_csv_velocity_scale():
    text = format_csv([track([2.0])], velocity_scale=0.5)
    assert text.splitlines()[1].endswith(",1")


def test_emit_errors(tmp_path):
    with pytest.raises(ValueError):
        emit_csv([], tmp_path / "x.csv")
    with pytest.raises(OSError):
        emit_csv([track([1])], tmp_path / "missing" / "x.csv")


def test_plot_two_labeled_lines(tmp_path):
    tracks = [track([1, 2, 3], method="cs_spec", mu=0.15), track([1, 2, np.nan], mu=0.15)]
    emit_plot(tracks, tmp_path / "a.svg")
    emit_plot(tracks, tmp_path / "b.svg")
    svg = (tmp_path / "a.svg").read_text()
    assert svg.lstrip().startswith("<?xml")
    assert "cs_spec mu=0.15" in svg and "cs_sm mu=0.15" in svg
    assert len(re.findall(r'<g id="(cs_spec|cs_sm)-0\.15"', svg)) == 2
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()


def test_run_pipeline_deterministic_csv(tmp_path):
    cfgs = [PipelineConfig(synthetic=ACCEL, keep_ratio=0.545, seed=3, mus=(0.15, 0.25),
                           output_csv=tmp_path / f"{i}.csv") for i in range(2)]
    for cfg in cfgs:
        run_pipeline(cfg)
    assert (tmp_path / "0.csv").read_bytes() == (tmp_path / "1.csv").read_bytes()


# config ----------------------------------------------------------------------

def test_config_from_json(tmp_path):
    (tmp_path / "scene.json").write_text(json.dumps({"velocity_profile": ["constant", 2]}))
    doc = {
        "input": {"synthetic": "scene.json", "keep_ratio": 0.5, "seed": 4},
        "window": {"kind": "hanning", "length": 32},
        "mu": [0.1, 0.2],
        "sm": {"L": 2},
        "solver": {"algorithm": "omp", "max_sparsity": 3},
        "methods": ["cs_sm"],
        "output_csv": "out.csv",
    }
    (tmp_path / "cfg.json").write_text(json.dumps(doc))
    cfg = PipelineConfig.from_json(tmp_path / "cfg.json")
    assert cfg.window.length == 32 and cfg.mus == (0.1, 0.2) and cfg.sm.L == 2
    assert cfg.output_csv == tmp_path / "out.csv"
    assert cfg.synthetic.velocity_profile == ("constant", 2)
    seq, truth = load_input(cfg)
    assert seq.n_available == 64 and truth is not None


@pytest.mark.parametrize("doc", [
    {},
    {"input": {"synthetic": {}}, "methods": []},
    {"input": {"synthetic": {}}, "methods": ["wigner"]},
    {"input": {"synthetic": {}}, "mu": 4.0},
    {"input": {"synthetic": {}}, "window": {"length": 63}},
    {"input": {"synthetic": {}}, "sm": {"L": 20}},
    {"input": {"synthetic": {}}, "bogus": 1},
    {"input": {"synthetic": {}, "frames_dir": "x"}},
])
def test_config_errors(doc):
    with pytest.raises(ConfigError):
        PipelineConfig.from_dict(doc)


def test_frames_dir_input(tmp_path):
    from PIL import Image

    seq, _ = generate_synthetic(SyntheticSceneSpec(128, 16, 40, object_size=(8, 4),
                                                   initial_position=(4, 4),
                                                   velocity_profile=("constant", 2)))
    for i, f in enumerate(seq.frames):
        Image.fromarray((f * 255).astype(np.uint8), "L").save(tmp_path / f"{i:03d}.png")
    (tmp_path / "mask.txt").write_text("".join(f"{i}\n" for i in range(0, 40, 2)))
    cfg = PipelineConfig(frames_dir=tmp_path, mask_file=tmp_path / "mask.txt",
                         window=WindowSpec("hanning", 16), mus=(0.3,))
    loaded, truth = load_input(cfg)
    assert loaded.n_total == 40 and loaded.n_available == 20 and truth is None
    tracks = run_pipeline(cfg)
    assert len(tracks) == 3
