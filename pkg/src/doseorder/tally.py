"""Dose-wise toxicity tallies and the enrolled state of a trial.

A tally records, for each of D dose levels, ``t/n``: t toxicities among n
evaluable participants.  Dose level 0 ("do not enroll") never appears as a
tally index; it only occurs as a recommendation value.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence, Tuple

_TOKEN = re.compile(r"^(\d+)/(\d+)$")


@dataclass(frozen=True, order=True)
class Tally:
    """Immutable vector of ``t/n`` counts, lowest dose first.

    Ordering (``<``) is lexicographic on ``(t1, n1, ..., tD, nD)`` and is only
    used for canonical sorting; evident-safety comparisons live in
    :mod:`doseorder.order`.
    """

    t: Tuple[int, ...]
    n: Tuple[int, ...]

    def __post_init__(self):
        t = tuple(int(x) for x in self.t)
        n = tuple(int(x) for x in self.n)
        if len(t) != len(n):
            raise ValueError("t and n must have the same length")
        if not t:
            raise ValueError("a tally needs at least one dose level")
        for td, nd in zip(t, n):
            if td < 0 or nd < td:
                raise ValueError(f"invalid count {td}/{nd}")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "n", n)

    # constructors
    @classmethod
    def zero(cls, D: int) -> "Tally":
        return cls((0,) * D, (0,) * D)

    @classmethod
    def at(cls, D: int, j: int, t: int, n: int) -> "Tally":
        """The tally that is ``t/n`` at dose ``j`` (1-based) and 0/0 elsewhere."""
        if not 1 <= j <= D:
            raise ValueError(f"dose {j} outside 1..{D}")
        tt = [0] * D
        nn = [0] * D
        tt[j - 1] = t
        nn[j - 1] = n
        return cls(tuple(tt), tuple(nn))

    @classmethod
    def from_pairs(cls, pairs: Sequence[Tuple[int, int]]) -> "Tally":
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))

    @classmethod
    def parse(cls, text: str) -> "Tally":
        """Parse ``"0/3 0/6 0/0"``.  Commas and enclosing brackets are tolerated."""
        cleaned = text.strip().strip("[]()").replace(",", " ")
        tokens = cleaned.split()
        if not tokens:
            raise ValueError(f"empty tally: {text!r}")
        pairs = []
        for tok in tokens:
            m = _TOKEN.match(tok)
            if m is None:
                raise ValueError(f"bad tally token {tok!r}")
            pairs.append((int(m.group(1)), int(m.group(2))))
        return cls.from_pairs(pairs)

    # accessors
    @property
    def D(self) -> int:
        return len(self.t)

    @property
    def u(self) -> Tuple[int, ...]:
        return tuple(nd - td for td, nd in zip(self.t, self.n))

    def pairs(self):
        return list(zip(self.t, self.n))

    def __add__(self, other: "Tally") -> "Tally":
        return tally_add(self, other)

    def __str__(self):
        return " ".join(f"{td}/{nd}" for td, nd in zip(self.t, self.n))

    def __repr__(self):
        return f"Tally({str(self)!r})"


def _check_dims(a: Tally, b: Tally):
    if a.D != b.D:
        raise ValueError(f"dimension mismatch: {a.D} vs {b.D}")


def tally_add(a: Tally, b: Tally) -> Tally:
    _check_dims(a, b)
    return Tally(
        tuple(x + y for x, y in zip(a.t, b.t)),
        tuple(x + y for x, y in zip(a.n, b.n)),
    )


def _upper_tails(values):
    out = []
    acc = 0
    for v in reversed(values):
        acc += v
        out.append(acc)
    return tuple(reversed(out))


def _lower_tails(values):
    out = []
    acc = 0
    for v in values:
        acc += v
        out.append(acc)
    return tuple(out)


def toxicity_profile(q: Tally) -> Tuple[int, ...]:
    """Cumulative toxicities ``T_d = t_1 + ... + t_d`` (non-decreasing)."""
    return _lower_tails(q.t)


def dose_intensities(q: Tally) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """Return ``(U, N)``: tolerated and net dose intensity (upper tails of u and n)."""
    return _upper_tails(q.u), _upper_tails(q.n)


def sigma_embed(q: Tally) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """Map a tally to its ``(T, U)`` pair."""
    U, _ = dose_intensities(q)
    return toxicity_profile(q), U


def sigma_invert(T: Sequence[int], U: Sequence[int]) -> Tally:
    """Inverse of :func:`sigma_embed` by successive differencing."""
    D = len(T)
    if len(U) != D:
        raise ValueError("T and U must have equal length")
    t = [T[0]] + [T[d] - T[d - 1] for d in range(1, D)]
    u = [U[d] - (U[d + 1] if d + 1 < D else 0) for d in range(D)]
    return Tally(tuple(t), tuple(td + ud for td, ud in zip(t, u)))


@dataclass(frozen=True)
class EnrolledState:
    """Resolved tally together with per-dose pending assessment counts."""

    tally: Tally
    pending: Tuple[int, ...]

    def __post_init__(self):
        pending = tuple(int(p) for p in self.pending)
        if len(pending) != self.tally.D:
            raise ValueError("pending counts must have one entry per dose")
        if any(p < 0 for p in pending):
            raise ValueError("pending counts must be non-negative")
        object.__setattr__(self, "pending", pending)


def pessimize(state: EnrolledState) -> Tally:
    """Count every pending assessment as a toxicity at its dose."""
    worst = Tally(state.pending, state.pending)
    return tally_add(state.tally, worst)
