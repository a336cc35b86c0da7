"""Mean-field approximation of the two-layer model.

The state is the pair of concentrations ``(cA, cS)``.  Adoption follows

    dcA/dt = cS (1 - cA) a1 - (1 - cS) cA h a1

and opinions follow a q-voter balance whose conformity terms depend on the
variant (AND needs unanimity on both layers, OR on at least one).

Stationary states lie on the curve ``cA = cS / (cS + h - cS h)``; along it the
opinion equation reduces, after multiplying by ``(cS + h - cS h)**q``, to the
polynomial condition ``(1 - p) f(cS) - p g(cS) = 0`` with ``f`` the variant's
drive term and ``g(cS) = (cS - 1/2)(cS + h - cS h)**q``.  Roots of that
polynomial are found by grid scan plus bracketing, which sidesteps the poles
of the rational form ``p(cS) = f / (f + g)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numba import njit
from scipy.optimize import brentq

from pvqvoter.errors import InvalidParameter, SolverError
from pvqvoter.params import Variant

POLE_TOLERANCE = 1e-14
DEFAULT_DT = 0.01
DEFAULT_EPS = 1e-6
DEFAULT_T_MAX = 1e5


class Stability(str, enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    MARGINAL = "marginal"


@dataclass(frozen=True)
class MfaState:
    cA: float
    cS: float

    def clamped(self) -> "MfaState":
        return MfaState(min(max(self.cA, 0.0), 1.0), min(max(self.cS, 0.0), 1.0))


@dataclass(frozen=True)
class RateTerms:
    """Transition rates whose differences give the mean-field velocity."""

    gain_A: float
    loss_A: float
    gain_S: float
    loss_S: float


@dataclass(frozen=True)
class StationaryPoint:
    cS: float
    cA: float
    p: float
    stability: Stability


@dataclass(frozen=True)
class MfaTrajectory:
    """Output of :func:`integrate`.

    ``times``/``cA``/``cS`` are sampled every ``record_every`` time units and
    always end with the final state; ``time`` is the convergence time (or
    ``t_max`` when ``converged`` is False).
    """

    times: np.ndarray
    cA: np.ndarray
    cS: np.ndarray
    endpoint: MfaState
    time: float
    converged: bool

    @property
    def timed_out(self) -> bool:
        return not self.converged


class StationaryTime(NamedTuple):
    time: float
    converged: bool


# ---------------------------------------------------------------------------
# compiled core


@njit(cache=True)
def _rates(cA, cS, p, h, a1, q, is_or):
    gain_A = cS * (1.0 - cA) * a1
    loss_A = (1.0 - cS) * cA * h * a1
    sq = cS**q
    aq = cA**q
    nsq = (1.0 - cS) ** q
    naq = (1.0 - cA) ** q
    if is_or:
        # probability that a q-group is neither unanimous up nor down
        mixed_A = 1.0 - aq - naq
        mixed_S = 1.0 - sq - nsq
        up = sq * mixed_A + aq * mixed_S + sq * aq
        down = nsq * mixed_A + naq * mixed_S + nsq * naq
    else:
        up = sq * aq
        down = nsq * naq
    gain_S = (1.0 - cS) * (0.5 * p + (1.0 - p) * up)
    loss_S = cS * (0.5 * p + (1.0 - p) * down)
    return gain_A, loss_A, gain_S, loss_S


@njit(cache=True)
def _rhs(cA, cS, p, h, a1, q, is_or):
    gA, lA, gS, lS = _rates(cA, cS, p, h, a1, q, is_or)
    return gA - lA, gS - lS


@njit(cache=True)
def _rk4(cA, cS, p, h, a1, q, is_or, dt, n_max, eps, record_every):
    n_rec = n_max // record_every + 2
    times = np.empty(n_rec)
    rec_A = np.empty(n_rec)
    rec_S = np.empty(n_rec)
    k = 0
    step = 0
    converged = False
    while True:
        dA, dS = _rhs(cA, cS, p, h, a1, q, is_or)
        if abs(dA) < eps and abs(dS) < eps:
            converged = True
            break
        if step >= n_max:
            break
        if step % record_every == 0:
            times[k] = step * dt
            rec_A[k] = cA
            rec_S[k] = cS
            k += 1
        k1A, k1S = dA, dS
        k2A, k2S = _rhs(cA + 0.5 * dt * k1A, cS + 0.5 * dt * k1S, p, h, a1, q, is_or)
        k3A, k3S = _rhs(cA + 0.5 * dt * k2A, cS + 0.5 * dt * k2S, p, h, a1, q, is_or)
        k4A, k4S = _rhs(cA + dt * k3A, cS + dt * k3S, p, h, a1, q, is_or)
        cA += dt / 6.0 * (k1A + 2.0 * k2A + 2.0 * k3A + k4A)
        cS += dt / 6.0 * (k1S + 2.0 * k2S + 2.0 * k3S + k4S)
        cA = min(max(cA, 0.0), 1.0)
        cS = min(max(cS, 0.0), 1.0)
        step += 1
    times[k] = step * dt
    rec_A[k] = cA
    rec_S[k] = cS
    k += 1
    return times[:k], rec_A[:k], rec_S[:k], step, converged


# ---------------------------------------------------------------------------
# dynamical system


def _check(p: float, h: float, a1: float, q: int) -> None:
    if not 0.0 <= p <= 1.0:
        raise InvalidParameter(f"p must lie in [0, 1], got {p}")
    if not 0.0 < h < 1.0:
        raise InvalidParameter(f"h must lie in (0, 1), got {h}")
    if not 0.0 < a1 <= 1.0:
        raise InvalidParameter(f"a1 must lie in (0, 1], got {a1}")
    if int(q) != q or q < 2:
        raise InvalidParameter(f"q must be an integer >= 2, got {q}")


def mfa_rates(state: MfaState, p: float, h: float, a1: float, q: int,
              variant: Variant | str) -> RateTerms:
    _check(p, h, a1, q)
    is_or = Variant.parse(variant) is Variant.OR
    return RateTerms(*_rates(float(state.cA), float(state.cS), float(p), float(h),
                             float(a1), int(q), is_or))


def mfa_rhs(state: MfaState, p: float, h: float, a1: float, q: int,
            variant: Variant | str) -> tuple[float, float]:
    """Return ``(dcA/dt, dcS/dt)`` at ``state``."""
    _check(p, h, a1, q)
    is_or = Variant.parse(variant) is Variant.OR
    return _rhs(float(state.cA), float(state.cS), float(p), float(h), float(a1),
                int(q), is_or)


def integrate(initial: MfaState, p: float, h: float, a1: float, q: int,
              variant: Variant | str, dt: float = DEFAULT_DT,
              t_max: float = DEFAULT_T_MAX, eps: float = DEFAULT_EPS,
              record_every: float = 1.0) -> MfaTrajectory:
    """Integrate with fixed-step classical RK4 until stationary or ``t_max``.

    Stationarity means ``|dcA/dt| < eps`` and ``|dcS/dt| < eps`` at the current
    state; it is tested before every step, so a stationary initial state
    converges at ``t = 0``.  Both coordinates are clamped to [0, 1] after each
    step.
    """
    _check(p, h, a1, q)
    if not 0.0 < dt <= 0.01:
        raise InvalidParameter(f"dt must lie in (0, 0.01], got {dt}")
    if eps <= 0.0:
        raise InvalidParameter(f"eps must be positive, got {eps}")
    if t_max <= 0.0:
        raise InvalidParameter(f"t_max must be positive, got {t_max}")
    start = initial.clamped()
    n_max = int(math.ceil(t_max / dt - 1e-9))
    stride = max(1, int(round(record_every / dt)))
    is_or = Variant.parse(variant) is Variant.OR
    times, ca, cs, steps, converged = _rk4(
        float(start.cA), float(start.cS), float(p), float(h), float(a1), int(q),
        is_or, float(dt), n_max, float(eps), stride,
    )
    return MfaTrajectory(
        times=times,
        cA=ca,
        cS=cs,
        endpoint=MfaState(float(ca[-1]), float(cs[-1])),
        time=steps * dt,
        converged=bool(converged),
    )


def time_to_stationary(initial: MfaState, p: float, h: float, a1: float, q: int,
                       variant: Variant | str, eps: float = DEFAULT_EPS,
                       dt: float = DEFAULT_DT,
                       t_max: float = DEFAULT_T_MAX) -> StationaryTime:
    traj = integrate(initial, p, h, a1, q, variant, dt=dt, t_max=t_max, eps=eps,
                     record_every=t_max)
    return StationaryTime(traj.time, traj.converged)


# ---------------------------------------------------------------------------
# analytic stationary states


def stationary_manifold_cA(cS, h: float):
    """Adoption concentration at which dcA/dt vanishes for opinion ``cS``."""
    return cS / (cS + h - cS * h)


def lemma1_expression(cS, h: float, q: int):
    """``cS^(q-1) - cS^(2q-1) + h^q (1-cS)^(2q-1) - h^q (1-cS)^(q-1)``.

    Strictly positive for cS in [1/2, 1), h in (0, 1), q >= 2; it is the
    last bracket of the OR drive term.
    """
    u = 1.0 - cS
    hq = h**q
    return cS ** (q - 1) - cS ** (2 * q - 1) + hq * u ** (2 * q - 1) - hq * u ** (q - 1)


def _drive_and(cS, h, q):
    u = 1.0 - cS
    return cS * u * (cS ** (2 * q - 1) - h**q * u ** (2 * q - 1))


def _drive_or(cS, h, q):
    u = 1.0 - cS
    d = cS + h - cS * h
    return cS * u * (
        (cS ** (q - 1) - u ** (q - 1)) * d**q
        + cS ** (q - 1) * u ** (q - 1) * (1.0 + h**q) * (2.0 * cS - 1.0)
        + lemma1_expression(cS, h, q)
    )


def _restoring(cS, h, q):
    return (cS - 0.5) * (cS + h - cS * h) ** q


def drive_term(cS, h: float, q: int, variant: Variant | str):
    """Conformity drive along the manifold (vectorised over ``cS``)."""
    if Variant.parse(variant) is Variant.OR:
        return _drive_or(cS, h, q)
    return _drive_and(cS, h, q)


def restoring_term(cS, h: float, q: int):
    """Independence term ``(cS - 1/2)(cS + h - cS h)^q`` (vectorised)."""
    return _restoring(cS, h, q)


def p_of_cS(cS: float, h: float, q: int, variant: Variant | str) -> float | None:
    """Independence level at which ``cS`` is stationary.

    Returns None (the pole marker) where the denominator vanishes to within
    1e-14.
    """
    f = drive_term(cS, h, q, variant)
    denom = f + _restoring(cS, h, q)
    if abs(denom) < POLE_TOLERANCE:
        return None
    return f / denom


def stationarity_residual(cS, p: float, h: float, q: int, variant: Variant | str):
    """``(1-p) f(cS) - p g(cS)``; zero exactly at stationary opinions.

    Equals ``dcS/dt`` on the manifold times ``(cS + h - cS h)**q`` and is free
    of poles.
    """
    return (1.0 - p) * drive_term(cS, h, q, variant) - p * _restoring(cS, h, q)


def classify_stability(point: StationaryPoint, h: float, a1: float, q: int,
                       variant: Variant | str, step: float = 1e-6,
                       tol: float = 1e-8) -> Stability:
    """Sign of the Jacobian eigenvalues, by central differences."""
    jac = jacobian(MfaState(point.cA, point.cS), point.p, h, a1, q, variant, step)
    re = np.linalg.eigvals(jac).real
    if np.all(re < -tol):
        return Stability.STABLE
    if np.any(re > tol):
        return Stability.UNSTABLE
    return Stability.MARGINAL


def jacobian(state: MfaState, p: float, h: float, a1: float, q: int,
             variant: Variant | str, step: float = 1e-6) -> np.ndarray:
    """2x2 Jacobian, rows (dcA, dcS), columns (cA, cS)."""
    is_or = Variant.parse(variant) is Variant.OR
    cA, cS = float(state.cA), float(state.cS)
    args = (float(p), float(h), float(a1), int(q), is_or)
    plus = _rhs(cA + step, cS, *args)
    minus = _rhs(cA - step, cS, *args)
    d_cA = [(a - b) / (2 * step) for a, b in zip(plus, minus)]
    plus = _rhs(cA, cS + step, *args)
    minus = _rhs(cA, cS - step, *args)
    d_cS = [(a - b) / (2 * step) for a, b in zip(plus, minus)]
    return np.array([[d_cA[0], d_cS[0]], [d_cA[1], d_cS[1]]])


def stationary_states(p: float, h: float, q: int, variant: Variant | str,
                      a1: float = 0.5, grid_points: int = 10_000,
                      xtol: float = 1e-12, dedup: float = 1e-8) -> list[StationaryPoint]:
    """All stationary states for independence ``p``, sorted by ``cS``.

    ``a1`` only enters the stability label; the locations do not depend on it.
    """
    _check(p, h, a1, q)
    variant = Variant.parse(variant)
    grid = np.linspace(0.0, 1.0, grid_points + 1)
    values = stationarity_residual(grid, p, h, q, variant)

    roots: list[float] = [float(x) for x in grid[values == 0.0]]
    sign_change = np.nonzero(values[:-1] * values[1:] < 0.0)[0]
    for k in sign_change:
        root = brentq(stationarity_residual, grid[k], grid[k + 1],
                      args=(p, h, q, variant), xtol=xtol, rtol=4 * np.finfo(float).eps)
        roots.append(float(root))
    roots.sort()

    unique: list[float] = []
    for r in roots:
        if not unique or r - unique[-1] > dedup:
            unique.append(r)
    if not unique:
        raise SolverError(f"no stationary state found for p={p}, h={h}, q={q}, {variant.value}")

    points = []
    for cs in unique:
        ca = float(stationary_manifold_cA(cs, h))
        provisional = StationaryPoint(cs, ca, float(p), Stability.MARGINAL)
        points.append(StationaryPoint(cs, ca, float(p),
                                      classify_stability(provisional, h, a1, q, variant)))
    return points
