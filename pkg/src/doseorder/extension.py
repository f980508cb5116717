"""Dose-assignment rules defined on every tally, derived from a protocol table.

``KanRule`` recommends the minimum protocol recommendation over a tally's
up-set among the accessible tallies, computed from the maximal elements of
each fiber.  ``GaloisRule`` is the coarser rule parametrized by a chain of
threshold tallies ``g_0 <= ... <= g_{D-1}``: the recommendation is the
smallest ``d`` with ``q <= g_d``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import reduce
from typing import Dict, List, Tuple

from .order import DEFAULT_R, SafetyParams, join, leq, maximal_elements
from .protocol33 import ProtocolTable
from .tally import Tally


class InvalidJoin(ValueError):
    """A fiber join did not correspond to a valid tally."""


def _check_dim(q: Tally, D: int):
    if q.D != D:
        raise ValueError(f"dimension mismatch: tally has {q.D} doses, rule has {D}")


@dataclass(frozen=True)
class KanRule:
    params: SafetyParams
    fiber_maxima: Dict[int, Tuple[Tally, ...]]

    kind = "kan"

    def __call__(self, q: Tally) -> int:
        return kan_recommend(q, self)

    def to_dict(self) -> dict:
        return {
            "rule": self.kind,
            "D": self.params.D,
            "r": self.params.r,
            "fiber_maxima": {
                str(d): [str(m) for m in ms]
                for d, ms in sorted(self.fiber_maxima.items())
            },
        }


@dataclass(frozen=True)
class GaloisRule:
    params: SafetyParams
    thresholds: Tuple[Tally, ...]

    kind = "galois"

    def __post_init__(self):
        r = self.params.r
        for lo, hi in zip(self.thresholds, self.thresholds[1:]):
            if not leq(lo, hi, r):
                raise ValueError(f"thresholds not a chain: {lo} vs {hi}")

    def __call__(self, q: Tally) -> int:
        return galois_recommend(q, self)

    def to_dict(self) -> dict:
        return {
            "rule": self.kind,
            "D": self.params.D,
            "r": self.params.r,
            "thresholds": [str(g) for g in self.thresholds],
        }


def build_kan(table: ProtocolTable, r: int = DEFAULT_R) -> KanRule:
    maxima = {
        d: tuple(maximal_elements(table.fiber(d), r))
        for d in range(table.D)
        if table.fiber(d)
    }
    return KanRule(SafetyParams(table.D, r), maxima)


def kan_recommend(q: Tally, rule: KanRule) -> int:
    D, r = rule.params.D, rule.params.r
    _check_dim(q, D)
    for d in range(D):
        if any(leq(q, m, r) for m in rule.fiber_maxima.get(d, ())):
            return d
    return D


def _join_all(tallies: List[Tally], r: int) -> Tally:
    def step(a, b):
        j = join(a, b, r)
        if j is None:
            raise InvalidJoin(f"join of {a} and {b} is not a valid tally")
        return j
    return reduce(step, tallies)


def build_galois(table: ProtocolTable, r: int = DEFAULT_R) -> GaloisRule:
    """Thresholds from fiber joins, made cumulative so they form a chain.

    A fiber that is empty inherits the previous threshold (or, for d = 0, is
    an error, since nothing would then ever be recommended 0).
    """
    gs: List[Tally] = []
    for d in range(table.D):
        fiber = table.fiber(d)
        if gs:
            fiber = fiber + [gs[-1]]
        if not fiber:
            raise InvalidJoin(f"fiber {d} is empty")
        gs.append(_join_all(fiber, r))
    return GaloisRule(SafetyParams(table.D, r), tuple(gs))


def galois_recommend(q: Tally, rule: GaloisRule) -> int:
    _check_dim(q, rule.params.D)
    r = rule.params.r
    for d, g in enumerate(rule.thresholds):
        if leq(q, g, r):
            return d
    return rule.params.D


def rule_to_json(rule) -> str:
    return json.dumps(rule.to_dict(), indent=2) + "\n"


def build_rule(kind: str, table: ProtocolTable, r: int = DEFAULT_R):
    if kind == "kan":
        return build_kan(table, r)
    if kind == "galois":
        return build_galois(table, r)
    raise ValueError(f"unknown rule {kind!r} (expected 'kan' or 'galois')")
