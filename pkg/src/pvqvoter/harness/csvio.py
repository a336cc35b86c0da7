"""CSV writers; headers are part of the output contract."""

from __future__ import annotations

import contextlib
import csv
import io
import math
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Sequence

from pvqvoter.analysis import Regime, Trajectory
from pvqvoter.errors import InvalidParameter
from pvqvoter.meanfield import MfaTrajectory, StationaryPoint
from pvqvoter.params import Variant

TRAJECTORY_HEADER = ("variant", "p", "a1", "h", "rep", "t", "c_A", "c_S")
SUMMARY_HEADER = ("variant", "p", "a1", "h", "regime_counts", "mean_final_cA",
                  "mean_final_cS", "median_first_passage_cA_0.9")
STATIONARY_HEADER = ("variant", "p", "h", "q", "c_S", "c_A", "stability")
MFA_HEADER = ("variant", "p", "a1", "h", "q", "t", "c_A", "c_S")

_write_lock = threading.Lock()


@dataclass(frozen=True)
class StationaryRecord:
    """A stationary point together with the parameters it was solved for."""

    variant: Variant
    h: float
    q: int
    point: StationaryPoint


def fmt(x) -> str:
    """12 significant digits; ``inf``/``nan`` spelled as Python does."""
    x = float(x)
    if math.isinf(x) or math.isnan(x):
        return str(x)
    return format(x, ".12g")


def format_regime_counts(counts: dict) -> str:
    """``unadopted=n;adopted=n;disordered=n;unresolved=n``."""
    return ";".join(f"{r.value}={int(counts.get(r, 0))}" for r in Regime)


def parse_regime_counts(text: str) -> dict[Regime, int]:
    out = {}
    for part in text.split(";"):
        name, value = part.split("=")
        out[Regime(name)] = int(value)
    return out


@contextlib.contextmanager
def _open(destination: str | Path | IO[str]):
    if hasattr(destination, "write"):
        yield destination
    else:
        with open(destination, "w", newline="", encoding="utf-8") as fh:
            yield fh


def _emit(destination, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    # render first so a failing row never leaves a half-written file
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    with _write_lock, _open(destination) as fh:
        fh.write(buf.getvalue())


def trajectory_rows(trajs: Iterable[Trajectory]):
    for traj in trajs:
        if traj.params is None:
            raise InvalidParameter("trajectory carries no parameters")
        prm = traj.params
        head = (prm.variant.value, fmt(prm.p), fmt(prm.a1), fmt(prm.h), str(traj.rep))
        for t, a, s in zip(traj.times.tolist(), traj.cA.tolist(), traj.cS.tolist()):
            yield (*head, str(t), fmt(a), fmt(s))


def summary_rows(cells):
    for cell in cells:
        prm = cell.params
        mean_a, mean_s = cell.mean_final()
        yield (prm.variant.value, fmt(prm.p), fmt(prm.a1), fmt(prm.h),
               format_regime_counts(cell.regime_counts), fmt(mean_a), fmt(mean_s),
               fmt(cell.median_first_passage()))


def stationary_rows(records: Iterable[StationaryRecord]):
    for rec in records:
        pt = rec.point
        yield (Variant.parse(rec.variant).value, fmt(pt.p), fmt(rec.h), str(rec.q),
               fmt(pt.cS), fmt(pt.cA), pt.stability.value)


def write_trajectory_csv(trajs: Iterable[Trajectory], destination) -> None:
    _emit(destination, TRAJECTORY_HEADER, trajectory_rows(trajs))


def write_summary_csv(cells, destination) -> None:
    _emit(destination, SUMMARY_HEADER, summary_rows(cells))


def write_stationary_csv(records: Iterable[StationaryRecord], destination) -> None:
    _emit(destination, STATIONARY_HEADER, stationary_rows(records))


def write_mfa_csv(traj: MfaTrajectory, destination, variant: Variant | str, p: float,
                  a1: float, h: float, q: int) -> None:
    head = (Variant.parse(variant).value, fmt(p), fmt(a1), fmt(h), str(q))
    rows = ((*head, fmt(t), fmt(a), fmt(s))
            for t, a, s in zip(traj.times.tolist(), traj.cA.tolist(), traj.cS.tolist()))
    _emit(destination, MFA_HEADER, rows)


def write_csv(results, destination, kind: str | None = None) -> None:
    """Write sweep results, trajectories or stationary records.

    The schema follows the type of ``results``; for an empty collection pass
    ``kind`` (``"trajectory"``, ``"summary"`` or ``"stationary"``) to get a
    header-only file.
    """
    from pvqvoter.harness.sweep import CellResult, SweepResult

    if isinstance(results, SweepResult):
        items, kind = list(results.cells), kind or "summary"
        if kind == "trajectory":
            items = results.trajectories
    else:
        items = list(results)
        if kind is None:
            if not items:
                raise InvalidParameter("empty results: pass kind= to choose the schema")
            first = items[0]
            if isinstance(first, Trajectory):
                kind = "trajectory"
            elif isinstance(first, CellResult):
                kind = "summary"
            elif isinstance(first, StationaryRecord):
                kind = "stationary"
            else:
                raise InvalidParameter(f"cannot write results of type {type(first).__name__}")
    writers = {"trajectory": write_trajectory_csv, "summary": write_summary_csv,
               "stationary": write_stationary_csv}
    if kind not in writers:
        raise InvalidParameter(f"unknown CSV kind {kind!r}")
    writers[kind](items, destination)
