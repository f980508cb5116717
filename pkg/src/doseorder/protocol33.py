"""The 3+3 dose-escalation protocol as an enumerable state machine.

Cohorts of 3 are enrolled at the current dose, with at most 6 participants
per dose.  With ``t/n`` the cumulative tally at the current dose ``d``:

* after a first cohort (n = 3): 0 toxicities escalate (or, at the top dose,
  call a confirmatory second cohort), 1 toxicity calls a second cohort at
  ``d``, 2 or more de-escalate;
* after a second cohort (n = 6): at most 1 toxicity escalates, or stops
  recommending ``d`` if ``d`` is the top dose or ``d + 1`` has already
  been tried; otherwise de-escalate;
* de-escalating from ``d`` stops with 0 at ``d = 1``; otherwise a dose
  ``d - 1`` with only 3 treated gets its second cohort, and a dose with 6
  treated is recommended.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from math import comb
from typing import Dict, List, Mapping, Sequence, Tuple

from .order import DEFAULT_R, leq
from .tally import Tally

COHORT = 3


@dataclass(frozen=True)
class CohortOutcome:
    dose: int
    tox: int

    def __str__(self):
        return f"d{self.dose}:{self.tox}"


@dataclass(frozen=True)
class PathRecord:
    outcomes: Tuple[CohortOutcome, ...]
    final_tally: Tally
    recommendation: int

    def outcome_string(self) -> str:
        return " ".join(str(o) for o in self.outcomes)


@dataclass(frozen=True)
class TableEntry:
    rec: int
    terminal: bool


@dataclass(frozen=True)
class ProtocolTable:
    D: int
    entries: Mapping[Tally, TableEntry]
    paths: Tuple[PathRecord, ...]

    @property
    def F(self) -> Dict[Tally, int]:
        return {a: e.rec for a, e in self.entries.items()}

    def tallies(self) -> List[Tally]:
        return sorted(self.entries)

    def fiber(self, d: int) -> List[Tally]:
        return sorted(a for a, e in self.entries.items() if e.rec == d)


def _next_step(t, n, d, D):
    """Decide after a cohort at dose ``d``: ``("enroll", dose)`` or ``("stop", rec)``."""
    i = d - 1
    if n[i] == COHORT:
        if t[i] == 0:
            return ("enroll", d + 1) if d < D else ("enroll", d)
        if t[i] == 1:
            return ("enroll", d)
        return _deescalate(t, n, d)
    if t[i] <= 1:
        if d < D and n[i + 1] == 0:
            return ("enroll", d + 1)
        return ("stop", d)
    return _deescalate(t, n, d)


def _deescalate(t, n, d):
    while True:
        if d == 1:
            return ("stop", 0)
        below = d - 2
        if n[below] == COHORT:
            return ("enroll", d - 1)
        if t[below] <= 1:
            return ("stop", d - 1)
        d -= 1


def enumerate_protocol(D: int) -> ProtocolTable:
    """Enumerate every cohort-outcome path of the D-dose 3+3 protocol."""
    if not 1 <= D <= 8:
        raise ValueError("D must lie in 1..8")
    entries: Dict[Tally, TableEntry] = {}
    paths: List[PathRecord] = []

    def record(q: Tally, rec: int, terminal: bool):
        entry = TableEntry(rec, terminal)
        prior = entries.setdefault(q, entry)
        if prior != entry:
            raise RuntimeError(f"inconsistent labels for {q}: {prior} vs {entry}")

    def expand(t: List[int], n: List[int], dose: int, outcomes: list):
        for k in range(COHORT + 1):
            t2 = list(t)
            n2 = list(n)
            t2[dose - 1] += k
            n2[dose - 1] += COHORT
            seq = outcomes + [CohortOutcome(dose, k)]
            q = Tally(tuple(t2), tuple(n2))
            kind, value = _next_step(t2, n2, dose, D)
            if kind == "stop":
                record(q, value, True)
                paths.append(PathRecord(tuple(seq), q, value))
            else:
                record(q, value, False)
                expand(t2, n2, value, seq)

    record(Tally.zero(D), 1, False)
    expand([0] * D, [0] * D, 1, [])
    return ProtocolTable(D, entries, tuple(paths))


def final_rec(q: Tally) -> int:
    """Highest assessed dose with fewer than 2 toxicities, else 0."""
    for d in range(q.D, 0, -1):
        if q.n[d - 1] > 0 and q.t[d - 1] < 2:
            return d
    return 0


def rectify(table: ProtocolTable, r: int = DEFAULT_R) -> Dict[Tally, int]:
    """Greatest monotone map below F on the accessible tallies (minimum over up-sets)."""
    F = table.F
    return {
        a2: min(F[a] for a in F if leq(a2, a, r))
        for a2 in F
    }


def path_probability(path: PathRecord, p: Sequence[float]) -> float:
    D = path.final_tally.D
    if len(p) != D:
        raise ValueError(f"expected {D} toxicity probabilities, got {len(p)}")
    prob = 1.0
    for o in path.outcomes:
        pd = p[o.dose - 1]
        prob *= comb(COHORT, o.tox) * pd ** o.tox * (1.0 - pd) ** (COHORT - o.tox)
    return prob


def outcome_probabilities(D: int, p: Sequence[float], table: ProtocolTable = None) -> List[float]:
    """Exact probability of each final recommendation 0..D."""
    if table is None:
        table = enumerate_protocol(D)
    if any(not 0.0 <= x <= 1.0 for x in p):
        raise ValueError("toxicity probabilities must lie in [0, 1]")
    probs = [0.0] * (D + 1)
    for path in table.paths:
        probs[path.recommendation] += path_probability(path, p)
    return probs


def paths_csv(table: ProtocolTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["path", "outcomes", "final_tally", "recommendation"])
    for i, path in enumerate(table.paths, start=1):
        w.writerow([i, path.outcome_string(), str(path.final_tally), path.recommendation])
    return buf.getvalue()


def tallies_csv(table: ProtocolTable, rectified: Mapping[Tally, int] = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["tally", "F", "terminal"]
    if rectified is not None:
        header.append("F_rectified")
    w.writerow(header)
    for a in table.tallies():
        e = table.entries[a]
        row = [str(a), e.rec, int(e.terminal)]
        if rectified is not None:
            row.append(rectified[a])
        w.writerow(row)
    return buf.getvalue()
