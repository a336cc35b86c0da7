"""Model parameters shared by the simulation and the mean-field solver."""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import asdict, dataclass, replace

from pvqvoter.errors import InvalidParameter


class Variant(str, enum.Enum):
    """Rule combining the two q-groups of influence."""

    AND = "and"
    OR = "or"

    @classmethod
    def parse(cls, value: "Variant | str") -> "Variant":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise InvalidParameter(
                f"unknown variant {value!r}; expected 'and' or 'or'"
            ) from None


class InitialCondition(str, enum.Enum):
    ALL_NEGATIVE = "all_negative"
    ALL_POSITIVE = "all_positive"
    # A=-1 everywhere, S=+1 everywhere
    POSITIVE_OPINION = "positive_opinion"


@dataclass(frozen=True)
class Params:
    """Every parameter of one Monte Carlo experiment.

    ``a2`` (unadoption probability) is not stored; it is always ``h * a1``.
    """

    side: int = 50
    q: int = 4
    p: float = 0.2
    a1: float = 0.16
    h: float = 0.5
    beta: float = 0.2
    variant: Variant = Variant.AND
    mcs: int = 5000
    reps: int = 10
    master_seed: int = 0
    init: InitialCondition = InitialCondition.ALL_NEGATIVE

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        try:
            object.__setattr__(self, "init", InitialCondition(self.init))
        except ValueError:
            raise InvalidParameter(f"unknown initial condition {self.init!r}") from None
        self.validate()

    def validate(self) -> None:
        if int(self.side) != self.side or self.side < 3:
            raise InvalidParameter(f"side must be an integer >= 3, got {self.side}")
        if int(self.q) != self.q or self.q < 2:
            raise InvalidParameter(f"q must be an integer >= 2, got {self.q}")
        if not 0.0 <= self.p <= 1.0:
            raise InvalidParameter(f"p must lie in [0, 1], got {self.p}")
        if not 0.0 < self.a1 <= 1.0:
            raise InvalidParameter(f"a1 must lie in (0, 1], got {self.a1}")
        if not 0.0 < self.h < 1.0:
            raise InvalidParameter(f"h must lie in (0, 1), got {self.h}")
        if not 0.0 <= self.beta <= 1.0:
            raise InvalidParameter(f"beta must lie in [0, 1], got {self.beta}")
        if int(self.mcs) != self.mcs or self.mcs < 1:
            raise InvalidParameter(f"mcs must be a positive integer, got {self.mcs}")
        if int(self.reps) != self.reps or self.reps < 1:
            raise InvalidParameter(f"reps must be a positive integer, got {self.reps}")

    @property
    def n(self) -> int:
        return self.side * self.side

    @property
    def a2(self) -> float:
        return self.h * self.a1

    def with_(self, **changes) -> "Params":
        return replace(self, **changes)

    def fingerprint(self) -> str:
        """Stable hash of all fields; trajectories sharing it form an ensemble."""
        payload = asdict(self)
        payload["variant"] = self.variant.value
        payload["init"] = self.init.value
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]
