import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from h2elastica.curve import ClosedCurve, make_curve
from h2elastica.errors import CurveFormatError
from h2elastica.flow import FlowConfig, run_flow
from h2elastica.io import curve_from_doc, curve_to_doc, load_curve, read_trajectory, save_curve, write_trajectory

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@settings(max_examples=30, deadline=None)
@given(pts=arrays(np.float64, (16, 3), elements=finite))
def test_curve_document_round_trip_is_exact(pts):
    c = ClosedCurve(pts)
    back = curve_from_doc(json.loads(json.dumps(curve_to_doc(c))))
    assert np.array_equal(back.points, c.points)


def test_curve_file_round_trip(tmp_path):
    c = make_curve("fourier", 64, seed=3)
    path = tmp_path / "c.curve.json"
    save_curve(path, c)
    assert np.array_equal(load_curve(path).points, c.points)


@pytest.mark.parametrize(
    "text",
    [
        "not json",
        "[1, 2]",
        '{"dim": 2, "n_samples": 16}',
        '{"dim": 2, "n_samples": 4, "points": [[0, 0], [1, 0], [1, 1], [0, 1]]}',
        '{"dim": 3, "n_samples": 16, "points": [[0, 0]]}',
    ],
)
def test_malformed_curve_documents_are_rejected(tmp_path, text):
    path = tmp_path / "bad.json"
    path.write_text(text)
    with pytest.raises(CurveFormatError):
        load_curve(path)


def test_trajectory_round_trip(tmp_path):
    traj = run_flow(make_curve("ellipse", 32), FlowConfig(t_max=0.5, snapshot_stride=3))
    path = tmp_path / "t.jsonl"
    write_trajectory(path, traj)
    back = read_trajectory(path)
    assert back.records == traj.records
    assert back.terminal is traj.terminal
    assert len(back.snapshots) == len(traj.snapshots)
    for (t0, c0), (t1, c1) in zip(traj.snapshots, back.snapshots):
        assert t0 == t1 and np.array_equal(c0.points, c1.points)
    assert np.array_equal(back.final.points, traj.final.points)
    kinds = [json.loads(line)["kind"] for line in path.read_text().splitlines()]
    assert kinds[-1] == "terminal" and kinds.count("record") == len(traj.records)
