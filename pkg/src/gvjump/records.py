"""CSV input and output with full double precision.

Trajectory files have the header ``t,kind,x1..xd,v1..vd``. The first row
(kind ``start``) is the initial state and the last (kind ``end``) the
terminal one; rows in between are events, whose velocity is the post-event
velocity. Jump and ghost kinds carry the mechanism index when there are
several mechanisms (``jump:1``).
"""

from __future__ import annotations

import csv

import numpy as np

from .engine import KIND_NAMES, REFRESH, REFRESH_COMPONENT, KineticState, Trajectory

FLOAT_FORMAT = "%.17g"


def fmt(value) -> str:
    return FLOAT_FORMAT % value


def _header(d: int) -> list[str]:
    return ["t", "kind"] + [f"x{i + 1}" for i in range(d)] + [f"v{i + 1}" for i in range(d)]


def _row(t, kind, x, v) -> list[str]:
    return [fmt(t), kind] + [fmt(a) for a in x] + [fmt(a) for a in v]


def _event_kind(kind: int, comp: int, several: bool) -> str:
    name = KIND_NAMES[kind]
    if several and comp != REFRESH_COMPONENT and kind != REFRESH:
        return f"{name}:{comp}"
    return name


def write_trajectory_csv(traj: Trajectory, path) -> None:
    several = len(traj.labels) > 1
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(_header(traj.dim))
        w.writerow(_row(traj.initial.t, "start", traj.initial.x, traj.initial.v))
        for t, k, c, x, v in zip(traj.times, traj.kinds, traj.components, traj.positions, traj.velocities):
            w.writerow(_row(t, _event_kind(int(k), int(c), several), x, v))
        w.writerow(_row(traj.final.t, "end", traj.final.x, traj.final.v))


def _parse_kind(text: str) -> tuple[int, int]:
    name, _, comp = text.partition(":")
    codes = {v: k for k, v in KIND_NAMES.items()}
    if name not in codes:
        raise ValueError(f"unknown event kind {text!r}")
    code = codes[name]
    if code == REFRESH:
        return code, REFRESH_COMPONENT
    return code, int(comp) if comp else 0


def read_trajectory_csv(path) -> Trajectory:
    """Rebuild a trajectory (event log only; force counts are not stored)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 3 or rows[1][1] != "start" or rows[-1][1] != "end":
        raise ValueError(f"{path}: not a trajectory file (missing start/end rows)")
    d = (len(rows[0]) - 2) // 2

    def state(row):
        vals = np.array([float(a) for a in row[2:]])
        return KineticState(float(row[0]), vals[:d], vals[d:])

    body = rows[2:-1]
    n = len(body)
    kinds = np.empty(n, dtype=np.int8)
    comps = np.empty(n, dtype=np.int32)
    data = np.empty((n, 2 * d))
    times = np.empty(n)
    for i, row in enumerate(body):
        times[i] = float(row[0])
        kinds[i], comps[i] = _parse_kind(row[1])
        data[i] = [float(a) for a in row[2:]]
    ncomp = int(comps.max()) + 1 if n and comps.max() >= 0 else 1
    return Trajectory(
        initial=state(rows[1]),
        final=state(rows[-1]),
        times=times,
        kinds=kinds,
        components=comps,
        positions=data[:, :d].copy(),
        velocities=data[:, d:].copy(),
        force_evaluations=(0,) * ncomp,
        labels=tuple(f"component{i}" for i in range(ncomp)),
    )


def write_path_csv(times, positions, velocities, path, kind: str = "step") -> None:
    """Dense path (e.g. a Verlet reference) in the trajectory layout."""
    positions = np.asarray(positions)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(_header(positions.shape[1]))
        for t, x, v in zip(times, positions, velocities):
            w.writerow(_row(t, kind, x, v))


def write_table(path, header, rows) -> None:
    """Plain CSV; floats are written with 17 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(a) if isinstance(a, (float, np.floating)) else a for a in row])

