"""Random sequential q-voter dynamics on the two-layer network.

In each elementary event a uniformly chosen agent either acts independently
(probability ``p``: its opinion flips with probability 1/2) or conforms: a
q-group is drawn with replacement from its spatial neighbours, whose
*adoption states* it observes, and another from its social neighbours, whose
*opinions* it hears.  The AND rule flips the opinion only if both groups are
unanimously opposed; OR flips it if one group is unanimously opposed and the
other is not unanimously in agreement.  Finally the agent's own opinion may
move its adoption state (adopt with ``a1``, abandon with ``h * a1``).

Two engines share one random-draw order (see :mod:`pvqvoter._kernel`):
the compiled kernel used for real runs, and the pure-Python path built from
the single-step functions below.  Given the same generator state they
produce identical trajectories.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from pvqvoter import _kernel
from pvqvoter.analysis import Trajectory
from pvqvoter.errors import InvalidParameter
from pvqvoter.network import Layer, TwoLayerNetwork, neighbors
from pvqvoter.params import InitialCondition, Params, Variant

STREAM_NETWORK = 0
STREAM_SEEDING = 1
STREAM_DYNAMICS = 2


@dataclass(eq=False)
class WorldState:
    """Adoption states ``A`` and opinions ``S`` (each entry -1 or +1)."""

    A: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=np.int8)
        self.S = np.asarray(self.S, dtype=np.int8)
        if self.A.shape != self.S.shape or self.A.ndim != 1:
            raise InvalidParameter("A and S must be 1-d vectors of equal length")
        if not (np.all(np.abs(self.A) == 1) and np.all(np.abs(self.S) == 1)):
            raise InvalidParameter("every adoption state and opinion must be -1 or +1")

    @classmethod
    def uniform(cls, n: int, adoption: int, opinion: int) -> "WorldState":
        return cls(np.full(n, adoption, dtype=np.int8), np.full(n, opinion, dtype=np.int8))

    @classmethod
    def initial(cls, n: int, init: InitialCondition | str) -> "WorldState":
        init = InitialCondition(init)
        if init is InitialCondition.ALL_NEGATIVE:
            return cls.uniform(n, -1, -1)
        if init is InitialCondition.ALL_POSITIVE:
            return cls.uniform(n, 1, 1)
        return cls.uniform(n, -1, 1)

    @property
    def n(self) -> int:
        return len(self.A)

    def copy(self) -> "WorldState":
        return WorldState(self.A.copy(), self.S.copy())


@dataclass(frozen=True)
class InfluenceSignals:
    """Mean sampled adoption (spatial layer) and opinion (social layer)."""

    q1: float
    q2: float


def rep_seed(master_seed: int, rep: int) -> int:
    """Seed of replication ``rep``; a pure function of its two arguments."""
    if master_seed < 0 or rep < 0:
        raise InvalidParameter("master seed and replication index must be non-negative")
    return int(np.random.SeedSequence([master_seed, rep]).generate_state(1, np.uint64)[0])


def stream(seed: int, purpose: int) -> np.random.Generator:
    """Independent generator for one purpose (network, seeding, dynamics)."""
    return np.random.default_rng([seed, purpose])


def sample_influence_group(layer: Layer, agent: int, q: int, rng) -> list[int]:
    """``q`` independent uniform draws from the agent's neighbours, with replacement."""
    if q < 2:
        raise InvalidParameter(f"q must be >= 2, got {q}")
    nbrs = neighbors(layer, agent)
    return [nbrs[int(rng.random() * len(nbrs))] for _ in range(q)]


def influence_signals(world: WorldState, group_spatial, group_social) -> InfluenceSignals:
    if len(group_spatial) != len(group_social):
        raise InvalidParameter("influence groups must have equal size")
    q = len(group_spatial)
    q1 = sum(int(world.A[j]) for j in group_spatial) / q
    q2 = sum(int(world.S[j]) for j in group_social) / q
    return InfluenceSignals(q1, q2)


def conformity_flip_and(s: int, sig: InfluenceSignals) -> bool:
    return sig.q1 + sig.q2 == -2 * s


def conformity_flip_or(s: int, sig: InfluenceSignals) -> bool:
    return (sig.q1 == -s and sig.q2 != s) or (sig.q1 != s and sig.q2 == -s)


def independence_step(world: WorldState, agent: int, rng) -> WorldState:
    if rng.random() < 0.5:
        world.S[agent] = -world.S[agent]
    return world


def adoption_step(world: WorldState, agent: int, a1: float, h: float, rng) -> WorldState:
    """Let the agent's current opinion act on its adoption state."""
    s, a = world.S[agent], world.A[agent]
    if s == a:
        return world
    r = rng.random()
    if s == 1:
        if r < a1:
            world.A[agent] = 1
    elif r < h * a1:
        world.A[agent] = -1
    return world


def conformity_step(world: WorldState, net: TwoLayerNetwork, agent: int, q: int,
                    variant: Variant, rng) -> WorldState:
    """Draw both q-groups member by member and apply the variant rule.

    Drawing stops once a flip has become impossible, matching the kernel.
    """
    s = int(world.S[agent])
    nbrs1 = neighbors(net.spatial, agent)
    nbrs2 = neighbors(net.social, agent)
    group1: list[int] = []
    group2: list[int] = []
    opp1 = opp2 = True
    for _ in range(q):
        group1.append(nbrs1[int(rng.random() * len(nbrs1))])
        opp1 = opp1 and world.A[group1[-1]] != s
        group2.append(nbrs2[int(rng.random() * len(nbrs2))])
        opp2 = opp2 and world.S[group2[-1]] != s
        if variant is Variant.OR:
            if not (opp1 or opp2):
                return world
        elif not (opp1 and opp2):
            return world
    sig = influence_signals(world, group1, group2)
    rule = conformity_flip_or if variant is Variant.OR else conformity_flip_and
    if rule(s, sig):
        world.S[agent] = -s
    return world


def update_agent(world: WorldState, net: TwoLayerNetwork, params: Params, agent: int,
                 rng, counter: Counter | None = None) -> WorldState:
    if rng.random() < params.p:
        if counter is not None:
            counter["independence"] += 1
        independence_step(world, agent, rng)
    else:
        if counter is not None:
            counter["conformity"] += 1
        conformity_step(world, net, agent, params.q, params.variant, rng)
    return adoption_step(world, agent, params.a1, params.h, rng)


def elementary_event(world: WorldState, net: TwoLayerNetwork, params: Params, rng,
                     counter: Counter | None = None) -> WorldState:
    """Process one uniformly chosen agent (pure-Python engine)."""
    if world.n != net.n:
        raise InvalidParameter(f"world has {world.n} agents, network {net.n}")
    agent = int(rng.random() * world.n)
    return update_agent(world, net, params, agent, rng, counter)


def _check_network(net: TwoLayerNetwork, params: Params) -> None:
    if net.n != params.n:
        raise InvalidParameter(f"network has {net.n} agents but side={params.side} implies {params.n}")


def run_world(world: WorldState, net: TwoLayerNetwork, params: Params, mcs: int,
              rng: np.random.Generator, engine: str = "compiled") -> tuple[np.ndarray, np.ndarray]:
    """Advance ``world`` in place by ``mcs`` steps; return positive counts for t=0..mcs."""
    if world.n != net.n:
        raise InvalidParameter(f"world has {world.n} agents, network {net.n}")
    if engine == "compiled":
        return _kernel.run_mcs(
            world.A, world.S,
            net.spatial.indptr, net.spatial.indices,
            net.social.indptr, net.social.indices,
            params.q, params.p, params.a1, params.h * params.a1,
            params.variant is Variant.OR, mcs, rng,
        )
    if engine != "python":
        raise InvalidParameter(f"unknown engine {engine!r}")
    count_A = np.empty(mcs + 1, dtype=np.int64)
    count_S = np.empty(mcs + 1, dtype=np.int64)
    count_A[0] = np.count_nonzero(world.A == 1)
    count_S[0] = np.count_nonzero(world.S == 1)
    for t in range(1, mcs + 1):
        for _ in range(world.n):
            elementary_event(world, net, params, rng)
        count_A[t] = np.count_nonzero(world.A == 1)
        count_S[t] = np.count_nonzero(world.S == 1)
    return count_A, count_S


def run_trajectory(net: TwoLayerNetwork, params: Params, rep_seed: int,
                   world: WorldState | None = None, engine: str = "compiled",
                   rep: int = 0) -> Trajectory:
    """One replication of ``params.mcs`` Monte Carlo steps.

    The dynamics draw from ``stream(rep_seed, STREAM_DYNAMICS)``.  ``world``
    overrides the initial condition of ``params.init`` (it is copied, not
    modified).
    """
    _check_network(net, params)
    state = WorldState.initial(net.n, params.init) if world is None else world.copy()
    count_A, count_S = run_world(state, net, params, params.mcs,
                                 stream(rep_seed, STREAM_DYNAMICS), engine)
    return Trajectory(count_A, count_S, net.n, rep_seed, params.fingerprint(), params, rep)
