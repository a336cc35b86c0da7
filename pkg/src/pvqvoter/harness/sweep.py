"""Replicated parameter sweeps.

Replication ``r`` of every cell uses ``rep_seed(master, r)``; its social
layer is drawn from the network stream of that seed, its seed agents from
the seeding stream and its dynamics from the dynamics stream.  A cell's rows
therefore depend only on its own parameters and the master seed, never on
which other cells are in the grid.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from pvqvoter.analysis import EnsembleStats, Regime, Trajectory, ensemble_stats, final_means, first_passage
from pvqvoter.dynamics import (STREAM_NETWORK, STREAM_SEEDING, WorldState, rep_seed,
                               run_trajectory, stream)
from pvqvoter.errors import ConstructionFailed
from pvqvoter.harness.config import NetworkMode, SeedingSpec, SweepGrid
from pvqvoter.harness.seeding import apply_seeding
from pvqvoter.network import REWIRING_CONVENTION, TwoLayerNetwork, build_two_layer
from pvqvoter.params import Params

FIRST_PASSAGE_LEVEL = 0.9


@dataclass(frozen=True)
class CellResult:
    params: Params
    trajectories: tuple[Trajectory, ...]
    stats: EnsembleStats | None
    errors: tuple[str, ...] = ()

    @property
    def regime_counts(self) -> dict[Regime, int]:
        if self.stats is None:
            return {r: 0 for r in Regime}
        return dict(self.stats.regimes)

    def mean_final(self) -> tuple[float, float]:
        if not self.trajectories:
            return math.nan, math.nan
        finals = np.array([final_means(t) for t in self.trajectories])
        return float(finals[:, 0].mean()), float(finals[:, 1].mean())

    def first_passages(self, level: float = FIRST_PASSAGE_LEVEL) -> list[float]:
        """First-passage times of ``cA`` to ``level``; ``inf`` where never reached."""
        out = []
        for t in self.trajectories:
            hit = first_passage(t, "cA", level)
            out.append(math.inf if hit is None else float(hit))
        return out

    def median_first_passage(self, level: float = FIRST_PASSAGE_LEVEL) -> float:
        times = self.first_passages(level)
        return float(np.median(times)) if times else math.nan


@dataclass(frozen=True)
class SweepResult:
    cells: tuple[CellResult, ...]
    metadata: dict = field(default_factory=dict)

    @property
    def trajectories(self) -> list[Trajectory]:
        return [t for c in self.cells for t in c.trajectories]

    @property
    def errors(self) -> list[str]:
        return [e for c in self.cells for e in c.errors]


def make_network(params: Params, seed: int) -> TwoLayerNetwork:
    return build_two_layer(params.side, params.beta, stream(seed, STREAM_NETWORK))


def initial_world(net: TwoLayerNetwork, params: Params, seed: int,
                  seeding: SeedingSpec | None) -> WorldState:
    world = WorldState.initial(net.n, params.init)
    if seeding is not None:
        world = apply_seeding(world, net, seeding, stream(seed, STREAM_SEEDING))
    return world


def run_replication(params: Params, rep: int, seeding: SeedingSpec | None = None,
                    net: TwoLayerNetwork | None = None, engine: str = "compiled") -> Trajectory:
    """Replication ``rep`` of one parameter set, built from its derived seed."""
    seed = rep_seed(params.master_seed, rep)
    if net is None:
        net = make_network(params, seed)
    world = initial_world(net, params, seed, seeding)
    return run_trajectory(net, params, seed, world=world, engine=engine, rep=rep)


def run_sweep(grid: SweepGrid, base: Params, seeding: SeedingSpec | None = None,
              network: NetworkMode | str = NetworkMode.PER_REP, workers: int = 1,
              engine: str = "compiled") -> SweepResult:
    """Run ``grid.reps`` replications for every cell of ``grid``.

    Networks depend on the replication seed only, so they are built once per
    replication and reused by every cell.  With ``network="shared"`` all
    replications use the network of replication 0.  A failed network build
    is recorded on every affected cell and the sweep carries on.
    """
    network = NetworkMode(network)
    base.validate()
    seeds = [rep_seed(base.master_seed, r) for r in range(grid.reps)]
    net_seeds = seeds if network is NetworkMode.PER_REP else [seeds[0]] * grid.reps
    cache: dict[int, TwoLayerNetwork | ConstructionFailed] = {}
    for s in net_seeds:
        if s not in cache:
            try:
                cache[s] = make_network(base, s)
            except ConstructionFailed as exc:
                cache[s] = exc

    cells = []
    for variant, h, a1, p in grid.cells():
        params = base.with_(variant=variant, h=h, a1=a1, p=p, reps=grid.reps)
        params.validate()
        cells.append(params)

    tasks = [(c, r) for c in range(len(cells)) for r in range(grid.reps)]

    def work(task):
        c, r = task
        net = cache[net_seeds[r]]
        if isinstance(net, ConstructionFailed):
            return net
        params = cells[c]
        world = initial_world(net, params, seeds[r], seeding)
        return run_trajectory(net, params, seeds[r], world=world, engine=engine, rep=r)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(work, tasks))
    else:
        outcomes = [work(t) for t in tasks]

    results = []
    for c, params in enumerate(cells):
        chunk = outcomes[c * grid.reps:(c + 1) * grid.reps]
        trajs = tuple(o for o in chunk if isinstance(o, Trajectory))
        errors = tuple(f"{params.variant.value} p={params.p} a1={params.a1} h={params.h} rep={r}: {o}"
                       for r, o in enumerate(chunk) if isinstance(o, Exception))
        stats = ensemble_stats(trajs, params.h) if trajs else None
        results.append(CellResult(params, trajs, stats, errors))
    meta = {
        "master_seed": base.master_seed,
        "network": network.value,
        "rewiring": REWIRING_CONVENTION,
        "seeding": None if seeding is None else f"{seeding.strategy.value}:{seeding.k}",
    }
    return SweepResult(tuple(results), meta)
