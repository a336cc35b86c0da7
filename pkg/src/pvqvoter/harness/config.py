"""Flat ``key=value`` configuration.

One assignment per line; blank lines and ``#`` comments are ignored.
Recognised keys::

    side q p a1 h beta variant mcs reps seed init network
    sweep.p sweep.a1 sweep.h sweep.variant sweep.reps
    seeding.strategy seeding.k

List values (``sweep.*``) are comma separated; a numeric list may also be
written ``start:stop:step`` with ``stop`` included.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from pvqvoter.errors import ConfigurationError, InvalidParameter
from pvqvoter.params import InitialCondition, Params, Variant


class SeedingStrategy(str, enum.Enum):
    NONE = "none"
    RANDOM_K = "random_k"
    TOP_DEGREE_K = "top_degree_k"


class NetworkMode(str, enum.Enum):
    # fresh social layer for every replication seed
    PER_REP = "per_rep"
    # one realisation shared by all replications
    SHARED = "shared"


@dataclass(frozen=True)
class SeedingSpec:
    strategy: SeedingStrategy = SeedingStrategy.NONE
    k: int = 0


@dataclass(frozen=True)
class SweepGrid:
    p_values: tuple[float, ...]
    a1_values: tuple[float, ...]
    h_values: tuple[float, ...]
    variants: tuple[Variant, ...]
    reps: int

    def __post_init__(self):
        for name in ("p_values", "a1_values", "h_values", "variants"):
            if not getattr(self, name):
                raise InvalidParameter(f"sweep list {name} is empty")
        if self.reps < 1:
            raise InvalidParameter(f"reps per cell must be positive, got {self.reps}")

    @classmethod
    def single(cls, params: Params) -> "SweepGrid":
        return cls((params.p,), (params.a1,), (params.h,), (params.variant,), params.reps)

    def cells(self):
        """``(variant, h, a1, p)`` in output order."""
        for v in self.variants:
            for h in self.h_values:
                for a1 in self.a1_values:
                    for p in self.p_values:
                        yield v, h, a1, p


@dataclass(frozen=True)
class Config:
    params: Params
    grid: SweepGrid
    seeding: SeedingSpec = field(default_factory=SeedingSpec)
    network: NetworkMode = NetworkMode.PER_REP


_SCALARS = {"side", "q", "p", "a1", "h", "beta", "variant", "mcs", "reps", "seed", "init", "network"}
_SWEEP = {"sweep.p", "sweep.a1", "sweep.h", "sweep.variant", "sweep.reps"}
_SEEDING = {"seeding.strategy", "seeding.k"}
KNOWN_KEYS = frozenset(_SCALARS | _SWEEP | _SEEDING)


def parse_assignments(text: str) -> dict[str, str]:
    """Split a document into raw ``key -> value`` strings (no validation of values)."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}", f"expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigurationError(key, "unknown key")
        if key in raw:
            raise ConfigurationError(key, f"assigned twice (line {lineno})")
        raw[key] = value
    return raw


def _int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigurationError(key, f"expected an integer, got {value!r}") from None


def _float(key: str, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigurationError(key, f"expected a number, got {value!r}") from None


def parse_number_list(key: str, value: str) -> tuple[float, ...]:
    value = value.strip()
    if ":" in value:
        parts = value.split(":")
        if len(parts) != 3:
            raise ConfigurationError(key, f"range must be start:stop:step, got {value!r}")
        start, stop, step = (_float(key, x) for x in parts)
        if step <= 0 or stop < start:
            raise ConfigurationError(key, f"empty or reversed range {value!r}")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return tuple(float(round(start + i * step, 12)) for i in range(count))
    items = [x.strip() for x in value.split(",") if x.strip()]
    if not items:
        raise ConfigurationError(key, "empty list")
    return tuple(_float(key, x) for x in items)


def _variant(key: str, value: str) -> Variant:
    try:
        return Variant.parse(value)
    except InvalidParameter:
        raise ConfigurationError(key, f"unknown value {value!r}; expected 'and' or 'or'") from None


def _enum(enum_cls, key: str, value: str):
    try:
        return enum_cls(value.strip().lower())
    except ValueError:
        choices = ", ".join(e.value for e in enum_cls)
        raise ConfigurationError(key, f"unknown value {value!r}; expected one of {choices}") from None


def _check_range(key: str, value: float, lo: float, hi: float, lo_open=False, hi_open=False) -> None:
    bad_lo = value <= lo if lo_open else value < lo
    bad_hi = value >= hi if hi_open else value > hi
    if bad_lo or bad_hi:
        left = "(" if lo_open else "["
        right = ")" if hi_open else "]"
        raise ConfigurationError(key, f"{value} outside {left}{lo}, {hi}{right}")


def build_config(raw: Mapping[str, str]) -> Config:
    """Validate raw assignments and fill defaults."""
    for key in raw:
        if key not in KNOWN_KEYS:
            raise ConfigurationError(key, "unknown key")
    defaults = Params()
    kw = {}
    if "side" in raw:
        kw["side"] = _int("side", raw["side"])
        if kw["side"] < 3:
            raise ConfigurationError("side", f"must be >= 3, got {kw['side']}")
    if "q" in raw:
        kw["q"] = _int("q", raw["q"])
        if kw["q"] < 2:
            raise ConfigurationError("q", f"must be >= 2, got {kw['q']}")
    for key, lo, hi, lo_open, hi_open in (("p", 0, 1, False, False), ("a1", 0, 1, True, False),
                                          ("h", 0, 1, True, True), ("beta", 0, 1, False, False)):
        if key in raw:
            kw[key] = _float(key, raw[key])
            _check_range(key, kw[key], lo, hi, lo_open, hi_open)
    for key, attr in (("mcs", "mcs"), ("reps", "reps"), ("seed", "master_seed")):
        if key in raw:
            kw[attr] = _int(key, raw[key])
            if kw[attr] < (0 if key == "seed" else 1):
                raise ConfigurationError(key, f"out of range: {kw[attr]}")
    if "variant" in raw:
        kw["variant"] = _variant("variant", raw["variant"])
    if "init" in raw:
        kw["init"] = _enum(InitialCondition, "init", raw["init"])
    params = Params(**{**defaults.__dict__, **kw})

    def numbers(key, lo, hi, lo_open=False, hi_open=False, fallback=None):
        if key not in raw:
            return fallback
        vals = parse_number_list(key, raw[key])
        for v in vals:
            _check_range(key, v, lo, hi, lo_open, hi_open)
        return vals

    variants = (params.variant,)
    if "sweep.variant" in raw:
        variants = tuple(_variant("sweep.variant", v) for v in raw["sweep.variant"].split(",") if v.strip())
        if not variants:
            raise ConfigurationError("sweep.variant", "empty list")
    reps = params.reps
    if "sweep.reps" in raw:
        reps = _int("sweep.reps", raw["sweep.reps"])
        if reps < 1:
            raise ConfigurationError("sweep.reps", f"must be positive, got {reps}")
    grid = SweepGrid(
        p_values=numbers("sweep.p", 0, 1, fallback=(params.p,)),
        a1_values=numbers("sweep.a1", 0, 1, lo_open=True, fallback=(params.a1,)),
        h_values=numbers("sweep.h", 0, 1, True, True, fallback=(params.h,)),
        variants=variants,
        reps=reps,
    )

    strategy = SeedingStrategy.NONE
    k = 0
    if "seeding.strategy" in raw:
        strategy = _enum(SeedingStrategy, "seeding.strategy", raw["seeding.strategy"])
    if "seeding.k" in raw:
        k = _int("seeding.k", raw["seeding.k"])
        if not 0 <= k <= params.n:
            raise ConfigurationError("seeding.k", f"must lie in 0..{params.n}, got {k}")

    network = NetworkMode.PER_REP
    if "network" in raw:
        network = _enum(NetworkMode, "network", raw["network"])
    return Config(params, grid, SeedingSpec(strategy, k), network)


def load_config(text: str, overrides: Mapping[str, str] | None = None) -> Config:
    """Parse a document; ``overrides`` (raw strings) replace its values."""
    raw = parse_assignments(text)
    for key, value in (overrides or {}).items():
        if key not in KNOWN_KEYS:
            raise ConfigurationError(key, "unknown key")
        raw[key] = str(value)
    return build_config(raw)
