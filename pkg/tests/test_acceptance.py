"""Acceptance criteria, each pinned at its stated tolerance.

Every test records one PASS/FAIL line (printed, and repeated in the
terminal summary) before asserting.  The Monte Carlo criteria run at full
scale: N=2500, T=5000, 10 replications per cell.
"""

from __future__ import annotations

import os
from collections import Counter

import numpy as np
import pytest
from scipy.signal import find_peaks

from acceptance_log import record
from oracles import binomial_sigma, exact_flip_probability
from pvqvoter import _kernel
from pvqvoter.analysis import Regime, first_passage
from pvqvoter.dynamics import WorldState
from pvqvoter.harness import SeedingSpec, SeedingStrategy, SweepGrid, run_sweep
from pvqvoter.meanfield import (MfaState, integrate, lemma1_expression, mfa_rhs, p_of_cS,
                                stationary_manifold_cA, stationary_states, time_to_stationary)
from pvqvoter.network import build_two_layer
from pvqvoter.params import Params, Variant

WORKERS = os.cpu_count() or 1
SWEEP_P = tuple(round(0.02 * k, 2) for k in range(1, 31))
BASE = Params(side=50, q=4, a1=0.16, h=0.5, beta=0.2, mcs=5000, reps=10, master_seed=0)
CONSENSUS = 8
# tighter than the default 1e-6: the distance of a detected endpoint from the
# true fixed point is about eps / |slowest eigenvalue|
TIGHT_EPS = 1e-10


def verdict(criterion: int, passed: bool, detail: str) -> None:
    record(criterion, passed, detail)
    assert passed, detail


@pytest.fixture(scope="module")
def regime_sweep():
    grid = SweepGrid(SWEEP_P, (BASE.a1,), (BASE.h,), (Variant.AND, Variant.OR), BASE.reps)
    result = run_sweep(grid, BASE, workers=WORKERS)
    assert not result.errors
    return {(c.params.variant, c.params.p): c for c in result.cells}


def consensus_label(cell) -> Regime | None:
    label, count = Counter(cell.regime_counts).most_common(1)[0]
    return label if count >= CONSENSUS else None


def consensus_series(sweep, variant):
    return [(p, consensus_label(sweep[(variant, p)])) for p in SWEEP_P]


def adoption_boundary(sweep, variant) -> float | None:
    return next((p for p, lab in consensus_series(sweep, variant) if lab is Regime.ADOPTED), None)


def mfa_from_origin(p, h, a1, variant, eps=1e-6, t_max=1e5):
    return integrate(MfaState(0.0, 0.0), p, h, a1, 4, variant, eps=eps, t_max=t_max)


# --- 1 ----------------------------------------------------------------------

def test_criterion_01_absorbing_state():
    grid = SweepGrid((0.0,), (0.04, 0.16, 1.0), (0.1, 0.5, 0.9), (Variant.AND, Variant.OR), 10)
    result = run_sweep(grid, BASE, workers=WORKERS)
    bad = [(c.params.variant.value, c.params.a1, c.params.h) for c in result.cells
           if len(c.trajectories) != 10
           or any(t.count_A.any() or t.count_S.any() for t in c.trajectories)]
    verdict(1, not bad and not result.errors,
            f"{len(result.cells)} (a1,h,variant) cells x 10 reps, T=5000: "
            f"{'all exactly zero' if not bad else f'nonzero in {bad}'}")


# --- 2 ----------------------------------------------------------------------

def test_criterion_02_boundary_values():
    worst = 0.0
    for v in Variant:
        for h in np.round(np.arange(0.1, 0.91, 0.1), 1):
            for q in range(2, 7):
                half, one = p_of_cS(0.5, h, q, v), p_of_cS(1.0, h, q, v)
                worst = max(worst, abs(half - 1.0), abs(one))
    verdict(2, worst <= 1e-12, f"max |p(1/2)-1|, |p(1)| over 2x9x5 cases = {worst:.2e} (tol 1e-12)")


# --- 3 ----------------------------------------------------------------------

def test_criterion_03_lemma_positivity():
    cs = np.linspace(0.5, 1 - 1e-6, 200)
    hs = np.linspace(1e-3, 1 - 1e-3, 50)
    failures, smallest = 0, np.inf
    for q in range(2, 9):
        vals = lemma1_expression(cs[:, None], hs[None, :], q)
        failures += int(np.count_nonzero(~(vals > 0)))
        smallest = min(smallest, float(vals.min()))
    verdict(3, failures == 0, f"200x50x7 grid: {failures} non-positive values, min {smallest:.3e}")


# --- 4 ----------------------------------------------------------------------

def test_criterion_04_stationarity_cross_validation():
    rng = np.random.default_rng(4)
    worst_rhs, worst_manifold, points = 0.0, 0.0, 0
    for _ in range(1000):
        p = float(rng.random())
        h = float(rng.uniform(1e-3, 1 - 1e-3))
        q = int(rng.integers(2, 9))
        v = Variant.AND if rng.random() < 0.5 else Variant.OR
        a1 = float(rng.uniform(0.01, 1.0))
        for pt in stationary_states(p, h, q, v, a1=a1):
            dA, dS = mfa_rhs(MfaState(pt.cA, pt.cS), p, h, a1, q, v)
            worst_rhs = max(worst_rhs, abs(dA), abs(dS))
            worst_manifold = max(worst_manifold, abs(pt.cA - pt.cS / (pt.cS + h - pt.cS * h)))
            points += 1
    verdict(4, worst_rhs < 1e-8 and worst_manifold < 1e-10,
            f"{points} points from 1000 tuples: max |rhs| {worst_rhs:.2e} (tol 1e-8), "
            f"max manifold gap {worst_manifold:.2e} (tol 1e-10)")


# --- 5 ----------------------------------------------------------------------

def test_criterion_05_endpoint_on_manifold():
    worst, converged, total, loose = 0.0, 0, 0, 0.0
    for v in Variant:
        for h in (0.5, 0.25):
            for p in np.round(np.arange(0, 1.0001, 0.05), 2):
                total += 1
                traj = mfa_from_origin(p, h, 0.5, v, eps=TIGHT_EPS)
                if not traj.converged:
                    continue
                converged += 1
                roots = stationary_states(p, h, 4, v)
                e = traj.endpoint
                dist = min(max(abs(e.cS - r.cS), abs(e.cA - r.cA)) for r in roots)
                worst = max(worst, dist)
                d = mfa_from_origin(p, h, 0.5, v).endpoint
                loose = max(loose, min(max(abs(d.cS - r.cS), abs(d.cA - r.cA)) for r in roots))
    verdict(5, worst < 1e-6 and converged > 0,
            f"{converged}/{total} converged, max distance to nearest root {worst:.2e} (tol 1e-6, "
            f"eps={TIGHT_EPS:g}; with default eps 1e-6 it is {loose:.1e})")


# --- 6 ----------------------------------------------------------------------

def _compress(labels):
    kept = [lab for lab in labels if lab not in (None, Regime.UNRESOLVED)]
    return [lab for i, lab in enumerate(kept) if i == 0 or kept[i - 1] is not lab]


def test_criterion_06_three_regimes(regime_sweep):
    ok, parts = True, []
    for v in Variant:
        series = consensus_series(regime_sweep, v)
        order = _compress([lab for _, lab in series])
        good = order == [Regime.UNADOPTED, Regime.ADOPTED, Regime.DISORDERED]
        ok = ok and good
        spans = {}
        for p, lab in series:
            name = lab.value if lab else "split"
            spans.setdefault(name, []).append(p)
        parts.append(f"{v.value}: {' -> '.join(x.value for x in order)} "
                     f"(" + ", ".join(f"{k} {min(ps):.2f}-{max(ps):.2f}" for k, ps in spans.items()) + ")")
    verdict(6, ok, "; ".join(parts))


# --- 7 ----------------------------------------------------------------------

def test_criterion_07_and_before_or(regime_sweep):
    grid = np.round(np.arange(0, 1.0001, 0.005), 3)

    def onset(v, test):
        for p in grid:
            if test(mfa_from_origin(p, 0.5, 0.5, v, t_max=2e4)):
                return float(p)
        return np.inf

    reach = {v: onset(v, lambda t: t.cS.max() > 0.9) for v in Variant}
    cross = {v: onset(v, lambda t: t.endpoint.cS > 0.5) for v in Variant}
    mc = {v: adoption_boundary(regime_sweep, v) for v in Variant}
    ok = (reach[Variant.AND] < reach[Variant.OR] and cross[Variant.AND] < cross[Variant.OR]
          and None not in mc.values() and mc[Variant.AND] < mc[Variant.OR])
    verdict(7, ok,
            f"MFA onset cS>0.9: AND {reach[Variant.AND]}, OR {reach[Variant.OR]}; "
            f"endpoint cS>0.5: AND {cross[Variant.AND]}, OR {cross[Variant.OR]}; "
            f"MC adopted boundary: AND {mc[Variant.AND]}, OR {mc[Variant.OR]}")


# --- 8 ----------------------------------------------------------------------

def test_criterion_08_h_effect():
    grid = np.round(np.arange(0, 1.0001, 0.005), 3)
    rows, ok = [], True
    for v in Variant:
        onsets = {}
        for h in (0.25, 0.5):
            adopt = cross = disorder = np.inf
            for p in grid:
                traj = mfa_from_origin(p, h, 0.5, v, t_max=2e4)
                if adopt == np.inf and traj.cS.max() > 0.9:
                    adopt = float(p)
                if cross == np.inf and traj.endpoint.cS > 0.5:
                    cross = float(p)
                # disordered: the opinion never first-passes 0.6 on its way up from zero
                if cross < np.inf and disorder == np.inf and first_above(traj.cS, 0.6) is None:
                    disorder = float(p)
            onsets[h] = (adopt, cross, disorder)
        a25, c25, d25 = onsets[0.25]
        a50, c50, d50 = onsets[0.5]
        good = a25 < a50 and c25 < c50 and d25 > d50
        ok = ok and good
        rows.append(f"{v.value}: adoption(cS>0.9) {a25} vs {a50}, adoption(cS>0.5) {c25} vs {c50}, "
                    f"disorder {d25} vs {d50} (h=0.25 vs 0.5)")
    verdict(8, ok, "; ".join(rows))


def first_above(series, level):
    hits = np.nonzero(series >= level)[0]
    return int(hits[0]) if len(hits) else None


# --- 9 ----------------------------------------------------------------------

def test_criterion_09_mc_mfa_discrepancy(regime_sweep):
    parts, ok = [], True
    for a1 in (0.04, 0.16):
        if a1 == BASE.a1:
            cell = regime_sweep[(Variant.OR, 0.2)]
        else:
            prm = BASE.with_(variant=Variant.OR, p=0.2, a1=a1)
            cell = run_sweep(SweepGrid.single(prm), prm, workers=WORKERS).cells[0]
        reached = sum(first_passage(t, "cS", 0.9 + 1e-12) is not None for t in cell.trajectories)
        mfa = mfa_from_origin(0.2, 0.5, a1, Variant.OR)
        peak = float(mfa.cS.max())
        good = reached > len(cell.trajectories) / 2 and peak < 0.5
        ok = ok and good
        parts.append(f"a1={a1}: MC {reached}/{len(cell.trajectories)} reach cS>0.9, MFA max cS {peak:.4f}")
    verdict(9, ok, "; ".join(parts))


# --- 10 ---------------------------------------------------------------------

def test_criterion_10_ridges():
    grid = np.round(np.arange(0, 1.0001, 0.005), 3)
    found = {}
    for v in Variant:
        times = np.array([time_to_stationary(MfaState(0, 0), p, 0.5, 0.5, 4, v).time for p in grid])
        raw, _ = find_peaks(times)
        # a ridge is pronounced when it rises at least 10 % of the highest time above its surroundings
        strong, _ = find_peaks(times, prominence=0.1 * times.max())
        found[v] = (grid[raw].tolist(), grid[strong].tolist())
    ok = len(found[Variant.AND][0]) == 2 and len(found[Variant.OR][1]) == 1
    verdict(10, ok, f"AND local maxima at p={found[Variant.AND][0]}; OR pronounced maxima at "
                    f"p={found[Variant.OR][1]} (all local maxima {found[Variant.OR][0]})")


# --- 11 ---------------------------------------------------------------------

def test_criterion_11_a1_invariance():
    worst, loose, parts_ok = 0.0, 0.0, True
    cases = [(v, p) for v in Variant for p in (0.05, 0.1, 0.2, 0.3, 0.6)]
    for v, p in cases:
        ends, times = [], []
        for a1 in (0.04, 0.16, 0.5, 1.0):
            traj = mfa_from_origin(p, 0.5, a1, v, eps=TIGHT_EPS)
            ends.append((traj.endpoint.cA, traj.endpoint.cS))
            times.append(traj.time)
            parts_ok = parts_ok and traj.converged
            d = mfa_from_origin(p, 0.5, a1, v).endpoint
            loose = max(loose, abs(d.cA - ends[0][0]), abs(d.cS - ends[0][1]))
        ends = np.array(ends)
        worst = max(worst, float(np.ptp(ends, axis=0).max()))
        parts_ok = parts_ok and len(set(times)) > 1
    verdict(11, worst < 1e-6 and parts_ok,
            f"{len(cases)} (variant,p) cases, a1 in {{0.04,0.16,0.5,1}}: max endpoint spread {worst:.2e} "
            f"(tol 1e-6, eps={TIGHT_EPS:g}; default eps gives {loose:.1e}); times differ")


# --- 12 ---------------------------------------------------------------------

def test_criterion_12_one_step_oracle():
    net = build_two_layer(3, 0.0, 0)
    assert net.spatial.same_structure(net.social)
    rng = np.random.default_rng(12)
    trials, worst_z, fails, checked = 100_000, 0.0, [], 0
    for config in range(20):
        world = WorldState(rng.choice([-1, 1], 9), rng.choice([-1, 1], 9))
        agent = int(rng.integers(9))
        p = float(rng.uniform(0, 0.5))
        for v in Variant:
            exact = exact_flip_probability(world.A.tolist(), world.S.tolist(),
                                           net.spatial.adjacency[agent], net.social.adjacency[agent],
                                           agent, 4, p, v.value)
            flips, n = _kernel.count_flips(agent, world.A.copy(), world.S.copy(),
                                           net.spatial.indptr, net.spatial.indices,
                                           net.social.indptr, net.social.indices, 4, p,
                                           v is Variant.OR, trials, rng)
            freq = flips / n
            sigma = binomial_sigma(exact, n)
            z = abs(freq - exact) / sigma if sigma > 0 else (0.0 if freq == exact else np.inf)
            worst_z = max(worst_z, z)
            checked += 1
            if z > 3:
                fails.append((config, v.value, exact, freq))
    verdict(12, not fails, f"{checked} (world, variant) checks with >= {trials} trials: "
                           f"max |z| {worst_z:.2f} (tol 3){'' if not fails else f'; outside: {fails}'}")


# --- 13 ---------------------------------------------------------------------

CENSOR = BASE.mcs + 1


def _passage_times(cell):
    return np.array([CENSOR if np.isinf(t) else t for t in cell.first_passages(0.9)])


def _iqr(x):
    return tuple(np.percentile(x, [25, 75]))


def test_criterion_13_seeding(regime_sweep):
    strategies = (SeedingStrategy.RANDOM_K, SeedingStrategy.TOP_DEGREE_K)
    parts, ok = [], True
    for v in Variant:
        p = adoption_boundary(regime_sweep, v)
        assert p is not None, f"no adopted regime for {v.value}"
        base = _passage_times(regime_sweep[(v, p)])
        prm = BASE.with_(variant=v, p=p)
        for s in strategies:
            cell = run_sweep(SweepGrid.single(prm), prm, SeedingSpec(s, 100), workers=WORKERS).cells[0]
            seeded = _passage_times(cell)
            lo, hi = _iqr(seeded)
            blo, bhi = _iqr(base)
            if v is Variant.OR:
                good = np.median(seeded) < np.median(base)
            else:
                good = lo <= bhi and blo <= hi
            ok = ok and good
            parts.append(f"{v.value} p={p} {s.value}: median {np.median(seeded):.0f} vs {np.median(base):.0f}, "
                         f"IQR [{lo:.0f},{hi:.0f}] vs [{blo:.0f},{bhi:.0f}]")
    verdict(13, ok, "; ".join(parts))
