"""Initial adopters placed before the dynamics start."""

from __future__ import annotations

import numpy as np

from pvqvoter.dynamics import WorldState
from pvqvoter.errors import InvalidParameter
from pvqvoter.harness.config import SeedingSpec, SeedingStrategy
from pvqvoter.network import TwoLayerNetwork


def top_degree_agents(degrees, k: int) -> np.ndarray:
    """Indices of the ``k`` highest degrees; equal degrees go to the lower index."""
    degrees = np.asarray(degrees)
    if not 0 <= k <= len(degrees):
        raise InvalidParameter(f"k must lie in 0..{len(degrees)}, got {k}")
    order = np.lexsort((np.arange(len(degrees)), -degrees))
    return np.sort(order[:k])


def seed_agents(net: TwoLayerNetwork, spec: SeedingSpec, rng: np.random.Generator | None) -> np.ndarray:
    """Agents selected by ``spec`` (empty for strategy none)."""
    strategy = SeedingStrategy(spec.strategy)
    if strategy is SeedingStrategy.NONE:
        return np.empty(0, dtype=np.int64)
    if not 0 <= spec.k <= net.n:
        raise InvalidParameter(f"k must lie in 0..{net.n}, got {spec.k}")
    if strategy is SeedingStrategy.TOP_DEGREE_K:
        return top_degree_agents(net.social.degrees(), spec.k)
    if rng is None:
        raise InvalidParameter("random_k seeding needs a generator")
    return np.sort(rng.choice(net.n, size=spec.k, replace=False))


def apply_seeding(world: WorldState, net: TwoLayerNetwork, spec: SeedingSpec,
                  rng: np.random.Generator | None = None) -> WorldState:
    """Set ``A = S = +1`` on the selected agents; returns a new world."""
    if world.n != net.n:
        raise InvalidParameter(f"world has {world.n} agents, network {net.n}")
    out = world.copy()
    chosen = seed_agents(net, spec, rng)
    out.A[chosen] = 1
    out.S[chosen] = 1
    return out
