"""JSON curve documents, JSON-lines trajectories and run manifests."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .curve import ClosedCurve
from .errors import CurveFormatError
from .flow import FlowRecord, Terminal, Trajectory

CURVE_SUFFIX = ".curve.json"


def curve_to_doc(curve):
    return {"dim": curve.dim, "n_samples": curve.n_samples, "points": curve.points.tolist()}


def curve_from_doc(doc):
    try:
        dim, n = int(doc["dim"]), int(doc["n_samples"])
        pts = np.array(doc["points"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise CurveFormatError(f"malformed curve document: {exc}") from exc
    if pts.shape != (n, dim):
        raise CurveFormatError(f"points have shape {pts.shape}, header says ({n}, {dim})")
    try:
        return ClosedCurve(pts)
    except ValueError as exc:
        raise CurveFormatError(str(exc)) from exc


def save_curve(path, curve):
    Path(path).write_text(json.dumps(curve_to_doc(curve)) + "\n")


def load_curve(path):
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise CurveFormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise CurveFormatError(f"{path}: expected a JSON object")
    return curve_from_doc(doc)


def write_trajectory(path, traj):
    """One JSON object per line: records, snapshots (at their record time) and a terminal line."""
    snaps = iter(traj.snapshots)
    nxt = next(snaps, None)
    with open(path, "w") as fh:
        for rec in traj.records:
            while nxt is not None and nxt[0] <= rec.t:
                fh.write(json.dumps({"kind": "snapshot", "t": nxt[0], "curve": curve_to_doc(nxt[1])}) + "\n")
                nxt = next(snaps, None)
            fh.write(json.dumps({"kind": "record", **vars(rec)}) + "\n")
        while nxt is not None:
            fh.write(json.dumps({"kind": "snapshot", "t": nxt[0], "curve": curve_to_doc(nxt[1])}) + "\n")
            nxt = next(snaps, None)
        end = {
            "kind": "terminal",
            "status": traj.terminal.value if traj.terminal else None,
            "message": traj.message,
            "failed_dt": traj.failed_dt,
            "rejected": traj.rejected,
        }
        if traj.final is not None:
            end["curve"] = curve_to_doc(traj.final)
        fh.write(json.dumps(end) + "\n")


def read_trajectory(path):
    traj = Trajectory()
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                kind = obj.pop("kind")
            except (json.JSONDecodeError, KeyError, AttributeError) as exc:
                raise CurveFormatError(f"{path}:{lineno}: bad trajectory line") from exc
            if kind == "record":
                traj.records.append(FlowRecord(**obj))
            elif kind == "snapshot":
                traj.snapshots.append((obj["t"], curve_from_doc(obj["curve"])))
            elif kind == "terminal":
                traj.terminal = Terminal(obj["status"]) if obj.get("status") else None
                traj.message = obj.get("message", "")
                traj.failed_dt = obj.get("failed_dt")
                traj.rejected = obj.get("rejected", 0)
                if "curve" in obj:
                    traj.final = curve_from_doc(obj["curve"])
            else:
                raise CurveFormatError(f"{path}:{lineno}: unknown line kind {kind!r}")
    return traj


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())
