"""Macroscopic observables and post-processing of Monte Carlo trajectories."""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from pvqvoter.errors import InvalidEnsemble, InvalidParameter

if TYPE_CHECKING:
    from pvqvoter.dynamics import WorldState
    from pvqvoter.params import Params

ADOPTED_LEVEL = 0.9
UNADOPTED_LEVEL = 0.1
DISORDER_BAND = 0.1


class Regime(str, enum.Enum):
    UNADOPTED = "unadopted"
    ADOPTED = "adopted"
    DISORDERED = "disordered"
    UNRESOLVED = "unresolved"


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Concentrations after every MCS, ``t = 0..T``.

    ``count_A``/``count_S`` are the numbers of positive agents; the float
    series are those counts divided by ``n``.
    """

    count_A: np.ndarray
    count_S: np.ndarray
    n: int
    rep_seed: int
    params_fingerprint: str
    params: "Params | None" = None
    rep: int = 0

    def __post_init__(self):
        if len(self.count_A) != len(self.count_S):
            raise InvalidParameter("adoption and opinion series differ in length")

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.count_A))

    @property
    def cA(self) -> np.ndarray:
        return self.count_A / self.n

    @property
    def cS(self) -> np.ndarray:
        return self.count_S / self.n

    @property
    def T(self) -> int:
        return len(self.count_A) - 1

    def series(self, observable: str) -> np.ndarray:
        if observable in ("cA", "c_A", "A"):
            return self.cA
        if observable in ("cS", "c_S", "S"):
            return self.cS
        raise InvalidParameter(f"unknown observable {observable!r}")

    def equals(self, other: "Trajectory") -> bool:
        return (np.array_equal(self.count_A, other.count_A)
                and np.array_equal(self.count_S, other.count_S))


def concentrations(world: "WorldState") -> tuple[float, float]:
    """Fractions of agents with positive adoption state and positive opinion."""
    n = len(world.A)
    return (int(np.count_nonzero(world.A == 1)) / n, int(np.count_nonzero(world.S == 1)) / n)


def final_means(traj: Trajectory, window: int | None = None) -> tuple[float, float]:
    """Mean ``(cA, cS)`` over the last ``window`` MCS (default: last 10 %)."""
    if window is None:
        window = max(1, traj.T // 10)
    if window < 1 or window > len(traj.count_A):
        raise InvalidParameter(f"window must lie in 1..{len(traj.count_A)}, got {window}")
    return float(traj.cA[-window:].mean()), float(traj.cS[-window:].mean())


def classify_point(cA: float, cS: float, h: float) -> Regime:
    if cS > ADOPTED_LEVEL and cA > ADOPTED_LEVEL:
        return Regime.ADOPTED
    if cS < UNADOPTED_LEVEL and cA < UNADOPTED_LEVEL:
        return Regime.UNADOPTED
    if abs(cS - 0.5) < DISORDER_BAND and abs(cA - 1.0 / (1.0 + h)) < DISORDER_BAND:
        return Regime.DISORDERED
    return Regime.UNRESOLVED


def classify_final(traj: Trajectory, h: float, window: int | None = None) -> Regime:
    """Label the end state of a trajectory by its window-averaged concentrations.

    The disordered target for ``cA`` is ``1/(1+h)``, the adoption level that
    balances adopting and unadopting when half the agents hold each opinion.
    """
    cA, cS = final_means(traj, window)
    return classify_point(cA, cS, h)


def first_passage(traj: Trajectory, observable: str, threshold: float) -> int | None:
    """First MCS index at which the series reaches ``threshold``, else None."""
    if not 0.0 <= threshold <= 1.0:
        raise InvalidParameter(f"threshold must lie in [0, 1], got {threshold}")
    hits = np.nonzero(traj.series(observable) >= threshold)[0]
    return int(hits[0]) if len(hits) else None


@dataclass(frozen=True)
class EnsembleStats:
    times: np.ndarray
    mean_cA: np.ndarray
    median_cA: np.ndarray
    min_cA: np.ndarray
    max_cA: np.ndarray
    mean_cS: np.ndarray
    median_cS: np.ndarray
    min_cS: np.ndarray
    max_cS: np.ndarray
    regimes: dict[Regime, int]
    size: int


def ensemble_stats(trajs: Sequence[Trajectory], h: float | None = None,
                   window: int | None = None) -> EnsembleStats:
    """Per-MCS aggregates plus a regime histogram.

    ``h`` defaults to the value stored with the trajectories' parameters.
    """
    if not trajs:
        raise InvalidEnsemble("empty ensemble")
    prints = {t.params_fingerprint for t in trajs}
    if len(prints) != 1:
        raise InvalidEnsemble(f"trajectories carry {len(prints)} different parameter fingerprints")
    lengths = {len(t.count_A) for t in trajs}
    if len(lengths) != 1:
        raise InvalidEnsemble("trajectories have different lengths")
    if h is None:
        if trajs[0].params is None:
            raise InvalidParameter("h is required when trajectories carry no parameters")
        h = trajs[0].params.h
    a = np.vstack([t.cA for t in trajs])
    s = np.vstack([t.cS for t in trajs])
    counts = Counter(classify_final(t, h, window) for t in trajs)
    return EnsembleStats(
        times=trajs[0].times,
        mean_cA=a.mean(axis=0), median_cA=np.median(a, axis=0),
        min_cA=a.min(axis=0), max_cA=a.max(axis=0),
        mean_cS=s.mean(axis=0), median_cS=np.median(s, axis=0),
        min_cS=s.min(axis=0), max_cS=s.max(axis=0),
        regimes={r: counts.get(r, 0) for r in Regime},
        size=len(trajs),
    )
