"""Evident-safety orders on tallies.

``leq(q, q2, r)`` reads "q2 is evidently at least as safe as q".  It is decided
by the integer coordinates of the formal difference ``q2 - q`` over the basis
of atomic arrows (tol_1, titro_d, exch_{d,d+1}, bal_r): the relation holds iff
every coordinate is non-negative.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, List, Mapping, Optional, Sequence, Tuple

from .tally import Tally, dose_intensities, toxicity_profile

DEFAULT_R = 2


@dataclass(frozen=True)
class SafetyParams:
    D: int
    r: int = DEFAULT_R

    def __post_init__(self):
        if self.D < 1:
            raise ValueError("D must be >= 1")
        if self.r < 1:
            raise ValueError("r must be >= 1")


@dataclass(frozen=True)
class DeltaCoords:
    eta: Tuple[int, ...]
    gamma: Tuple[int, ...]

    def nonnegative(self) -> bool:
        return all(x >= 0 for x in self.eta) and all(x >= 0 for x in self.gamma)


def _check(q: Tally, q2: Tally):
    if q.D != q2.D:
        raise ValueError(f"dimension mismatch: {q.D} vs {q2.D}")


def _coords(dt: Sequence[int], dn: Sequence[int], r: int) -> DeltaCoords:
    D = len(dt)
    gamma = [0] * D
    gamma[0] = -dt[0]
    for d in range(1, D):
        gamma[d] = gamma[d - 1] - dt[d]
    eta = [0] * D
    eta[0] = sum(dn) + (1 + r) * gamma[D - 1]
    for d in range(1, D):
        eta[d] = eta[d - 1] - dn[d - 1]
    return DeltaCoords(tuple(eta), tuple(gamma))


def delta_coords(q: Tally, q2: Tally, r: int = DEFAULT_R) -> DeltaCoords:
    """Coordinates ``(eta, gamma)`` of ``[q2 - q]``."""
    _check(q, q2)
    dt = [b - a for a, b in zip(q.t, q2.t)]
    dn = [b - a for a, b in zip(q.n, q2.n)]
    return _coords(dt, dn, r)


def absolute_coords(q: Tally, r: int = DEFAULT_R) -> DeltaCoords:
    return _coords(q.t, q.n, r)


def from_coords(c: DeltaCoords, r: int = DEFAULT_R) -> Optional[Tally]:
    """Invert :func:`absolute_coords`; ``None`` if the result is not a valid tally."""
    D = len(c.gamma)
    T = [-g for g in c.gamma]
    N = [e + (1 + r) * T[D - 1] for e in c.eta]
    t = [T[0]] + [T[d] - T[d - 1] for d in range(1, D)]
    n = [N[d] - (N[d + 1] if d + 1 < D else 0) for d in range(D)]
    if any(td < 0 or nd < td for td, nd in zip(t, n)):
        return None
    return Tally(tuple(t), tuple(n))


def leq(q: Tally, q2: Tally, r: int = DEFAULT_R) -> bool:
    return delta_coords(q, q2, r).nonnegative()


def lt(q: Tally, q2: Tally, r: int = DEFAULT_R) -> bool:
    return q != q2 and leq(q, q2, r)


def leq0(q: Tally, q2: Tally) -> bool:
    """Dose-monotone order: q2 has no less tolerated intensity and no higher toxicity profile."""
    _check(q, q2)
    U, _ = dose_intensities(q)
    U2, _ = dose_intensities(q2)
    T = toxicity_profile(q)
    T2 = toxicity_profile(q2)
    return all(a <= b for a, b in zip(U, U2)) and all(a >= b for a, b in zip(T, T2))


def _bound(q: Tally, q2: Tally, r: int, pick) -> Optional[Tally]:
    _check(q, q2)
    a = absolute_coords(q, r)
    b = absolute_coords(q2, r)
    c = DeltaCoords(
        tuple(pick(x, y) for x, y in zip(a.eta, b.eta)),
        tuple(pick(x, y) for x, y in zip(a.gamma, b.gamma)),
    )
    return from_coords(c, r)


def meet(q: Tally, q2: Tally, r: int = DEFAULT_R) -> Optional[Tally]:
    """Greatest lower bound, or ``None`` when the coordinate-wise minimum is no valid tally."""
    return _bound(q, q2, r, min)


def join(q: Tally, q2: Tally, r: int = DEFAULT_R) -> Optional[Tally]:
    """Least upper bound, or ``None`` when the coordinate-wise maximum is no valid tally."""
    return _bound(q, q2, r, max)


def maximal_elements(tallies: Iterable[Tally], r: int = DEFAULT_R) -> List[Tally]:
    items = sorted(set(tallies))
    return [
        m for m in items
        if not any(e != m and leq(m, e, r) for e in items)
    ]


@dataclass(frozen=True)
class HasseEdges:
    nodes: Tuple[Tally, ...]
    edges: Tuple[Tuple[Tally, Tally], ...]


def transitive_reduction(tallies: Iterable[Tally], r: int = DEFAULT_R) -> HasseEdges:
    """Covering pairs ``(a, b)`` with ``a < b`` and nothing strictly between."""
    nodes = sorted(set(tallies))
    below = {a: [b for b in nodes if lt(a, b, r)] for a in nodes}
    edges = []
    for a in nodes:
        ups = below[a]
        for b in ups:
            if not any(lt(c, b, r) for c in ups if c != b):
                edges.append((a, b))
    return HasseEdges(tuple(nodes), tuple(edges))


def _node_id(q: Tally) -> str:
    return '"' + str(q) + '"'


def hasse_dot(hasse: HasseEdges, labels: Mapping[Tally, int],
              maxima: Iterable[Tally] = (), name: str = "") -> str:
    """Render a Hasse diagram as DOT, safer tallies toward the top.

    Each node carries ``class="rec<label>"`` and a colour indexed by the label;
    tallies listed in ``maxima`` get a doubled border.
    """
    missing = [q for q in hasse.nodes if q not in labels]
    if missing:
        raise KeyError(f"no label for {missing[0]}")
    palette = ["red", "blue", "green", "orange", "purple", "brown", "cyan",
               "magenta", "gold"]
    maxima = set(maxima)
    head = f"digraph {name} {{" if name else "digraph {"
    lines = [head, "  rankdir=BT;"]
    for q in hasse.nodes:
        rec = labels[q]
        attrs = [f'label="{q}"', f'class="rec{rec}"',
                 f'color="{palette[rec % len(palette)]}"']
        if q in maxima:
            attrs.append("peripheries=2")
        lines.append(f"  {_node_id(q)} [{', '.join(attrs)}];")
    for a, b in hasse.edges:
        lines.append(f"  {_node_id(a)} -> {_node_id(b)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def monotonicity_violations(labels: Mapping[Tally, int],
                            r: int = DEFAULT_R) -> List[Tuple[Tally, Tally]]:
    """All ordered pairs ``(a, b)`` with ``a < b`` but ``labels[a] > labels[b]``."""
    out = []
    for a, b in combinations(sorted(labels), 2):
        for x, y in ((a, b), (b, a)):
            if labels[x] > labels[y] and lt(x, y, r):
                out.append((x, y))
    return sorted(out)
