"""Compiled Monte Carlo core.

Random draws, in order, for one elementary event on agent ``i``:

1. agent choice ``int(u * N)``;
2. branch ``u < p``;
3. independence: one coin ``u < 1/2``; conformity: neighbour draws
   ``int(u * degree)`` alternating spatial/social, stopping as soon as
   no flip is possible any more;
4. adoption: one ``u`` only when opinion and adoption state disagree.

Skipped draws cannot change the outcome, so the law of the process is that of
drawing everything.  :mod:`pvqvoter.dynamics` mirrors this order exactly.

Uniforms come from a FIFO buffer over the generator's ``random()`` stream;
the unread tail is kept on refill, so the values consumed are exactly those
of successive ``rng.random()`` calls.  The event body is written out in one
loop because numba helper calls taking arrays cost more than the event.
"""

import numpy as np
from numba import njit

BUFFER = 4096


@njit(cache=True, nogil=True)
def _events(A, S, ip1, ix1, ip2, ix2, q, p, a1, a2, is_or, mcs, probe, rng):
    n = A.shape[0]
    need = 2 * q + 3
    size = max(BUFFER, 4 * need)
    buf = np.empty(size)
    pos = size
    count_A = np.zeros(mcs + 1, dtype=np.int64)
    count_S = np.zeros(mcs + 1, dtype=np.int64)
    nA = 0
    nS = 0
    for k in range(n):
        if A[k] == 1:
            nA += 1
        if S[k] == 1:
            nS += 1
    if probe < 0:
        count_A[0] = nA
        count_S[0] = nS
    for t in range(1, mcs + 1):
        flips = 0
        for _ in range(n):
            if pos + need > size:
                tail = size - pos
                buf[:tail] = buf[pos:]
                buf[tail:] = rng.random(size - tail)
                pos = 0
            if probe < 0:
                i = int(buf[pos] * n)
                pos += 1
            else:
                i = probe
            s0 = S[i]
            a0 = A[i]

            # opinion
            u = buf[pos]
            pos += 1
            if u < p:
                u = buf[pos]
                pos += 1
                if u < 0.5:
                    S[i] = -s0
            else:
                b1 = ip1[i]
                d1 = ip1[i + 1] - b1
                b2 = ip2[i]
                d2 = ip2[i + 1] - b2
                opp1 = True
                opp2 = True
                agr1 = True
                agr2 = True
                decided = False
                for _l in range(q):
                    v1 = A[ix1[b1 + int(buf[pos] * d1)]]
                    v2 = S[ix2[b2 + int(buf[pos + 1] * d2)]]
                    pos += 2
                    if v1 == s0:
                        opp1 = False
                    else:
                        agr1 = False
                    if v2 == s0:
                        opp2 = False
                    else:
                        agr2 = False
                    if is_or:
                        if not opp1 and not opp2:
                            decided = True
                            break
                    elif not (opp1 and opp2):
                        decided = True
                        break
                if not decided:
                    if is_or:
                        flip = (opp1 and not agr2) or (not agr1 and opp2)
                    else:
                        flip = opp1 and opp2
                    if flip:
                        S[i] = -s0

            if probe >= 0:
                if S[i] != s0:
                    flips += 1
                    S[i] = s0
                continue

            # adoption
            si = S[i]
            if si != a0:
                u = buf[pos]
                pos += 1
                if si == 1:
                    if u < a1:
                        A[i] = 1
                elif u < a2:
                    A[i] = -1
            if si != s0:
                nS += si
            if A[i] != a0:
                nA += A[i]
        if probe < 0:
            count_A[t] = nA
            count_S[t] = nS
        else:
            count_S[t] = flips
    return count_A, count_S


def run_mcs(A, S, ip1, ix1, ip2, ix2, q, p, a1, a2, is_or, mcs, rng):
    """Advance ``mcs`` steps of N events in place; return positive counts for t=0..mcs."""
    return _events(A, S, ip1, ix1, ip2, ix2, q, p, a1, a2, is_or, mcs, -1, rng)


def count_flips(i, A, S, ip1, ix1, ip2, ix2, q, p, is_or, trials, rng):
    """Run the opinion stage repeatedly on agent ``i`` of a frozen state.

    The state is restored after every flip.  Trials run in batches of N, so
    ``trials`` is rounded up to a multiple of N; returns ``(flips, trials)``.
    """
    n = A.shape[0]
    batches = -(-trials // n)
    _, flips = _events(A, S, ip1, ix1, ip2, ix2, q, p, 0.0, 0.0, is_or, batches, i, rng)
    return int(flips.sum()), batches * n
