"""Independent oracles used only by the test suite.

The generator-closure oracle decides ``q <= q2`` by breadth-first search over
monoidal applications of the atomic arrows, never touching the coordinate
test it is meant to check.  Two quantities make the search finite and the
pruning sound:

* the toxicity profile T never increases along any arrow, and neither does
  the total toxicity count;
* ``N_1 - k * T_D`` never decreases, where ``k`` is the largest number of
  evaluable participants removed per toxicity removed (``1 + r`` once the
  bal_r arrow is present, 1 for the dose-monotone arrows alone).
"""

from collections import deque

from doseorder.tally import Tally


class OracleExhausted(RuntimeError):
    """The search hit its state budget before reaching a verdict."""


def _unit(D, j, t, n):
    return Tally.at(D, j, t, n)


def atomic_arrows(D, r=1, therapeutic=True):
    """(name, lhs, rhs) triples; ``lhs <= rhs`` for each generator."""
    zero = Tally.zero(D)
    arrows = [("tol1", zero, _unit(D, 1, 0, 1))]
    for j in range(2, D + 1):
        arrows.append((f"titro{j}", _unit(D, j - 1, 0, 1), _unit(D, j, 0, 1)))
    for j in range(1, D):
        arrows.append((f"titrx{j}", _unit(D, j, 1, 1), _unit(D, j + 1, 1, 1)))
    arrows.append((f"det{D}", _unit(D, D, 1, 1), zero))
    if therapeutic:
        arrows.append(("bal", _unit(D, D, 1, 2), zero))
        arrows.append((f"bal_{r}", _unit(D, D, 1, 1 + r), zero))
        for j in range(1, D + 1):
            for k in range(j + 1, D + 1):
                lhs = _unit(D, j, 1, 1) + _unit(D, k, 0, 1)
                rhs = _unit(D, j, 0, 1) + _unit(D, k, 1, 1)
                arrows.append((f"exch{j}{k}", lhs, rhs))
    return arrows


def _steps(q, arrows):
    for _, lhs, rhs in arrows:
        t = [a - b + c for a, b, c in zip(q.t, lhs.t, rhs.t)]
        u = [a - b + c for a, b, c in zip(q.u, lhs.u, rhs.u)]
        if min(t) < 0 or min(u) < 0:
            continue
        yield Tally(tuple(t), tuple(tt + uu for tt, uu in zip(t, u)))


def _potential(q, k):
    return sum(q.n) - k * sum(q.t)


def reachable(q, r=1, therapeutic=True, cap=None, max_states=500_000):
    """All tallies reachable from ``q`` whose potential ``N_1 - k*T_D`` is <= cap."""
    arrows = atomic_arrows(q.D, r, therapeutic)
    k = 1 + r if therapeutic else 1
    seen = {q}
    frontier = deque([q])
    while frontier:
        cur = frontier.popleft()
        for nxt in _steps(cur, arrows):
            if nxt in seen or _potential(nxt, k) > cap:
                continue
            seen.add(nxt)
            if len(seen) > max_states:
                raise OracleExhausted(f"more than {max_states} states from {q}")
            frontier.append(nxt)
    return seen


def generator_closure(q, q2, r=1, therapeutic=True, max_states=500_000):
    """True iff ``q2`` is reachable from ``q`` by the generating arrows."""
    if q.D != q2.D:
        raise ValueError("dimension mismatch")
    k = 1 + r if therapeutic else 1
    if _potential(q, k) > _potential(q2, k):
        return False
    return q2 in reachable(q, r, therapeutic, cap=_potential(q2, k), max_states=max_states)


def kan_by_upset(q, table, r):
    """Minimum protocol recommendation over accessible tallies above ``q``."""
    from doseorder.order import leq
    recs = [e.rec for a, e in table.entries.items() if leq(q, a, r)]
    return min(recs) if recs else table.D


def grid(D, nmax):
    """Every tally with ``n_d <= nmax`` at each of D doses."""
    per_dose = [(t, n) for n in range(nmax + 1) for t in range(n + 1)]
    out = [()]
    for _ in range(D):
        out = [prev + (pair,) for prev in out for pair in per_dose]
    return [Tally.from_pairs(p) for p in out]
