"""Continuous-time rolling-enrollment trial simulation with up-titration.

Time is measured in toxicity-assessment periods: a tolerated dose resolves
exactly 1 period after administration, while a toxicity at dose level ``Rx``
in a participant with threshold ``mtd < Rx`` resolves after ``mtd / Rx``.
Thresholds live on the dose-level scale, so dose ``d`` is toxic iff
``d > mtd``.

Each arrival is dosed at the current recommendation of the pessimized tally
(pending first doses counted as toxicities) unless that recommendation is 0
or others are already waiting, in which case the arrival joins a FIFO queue.
Each tolerated dose below the top level schedules an up-titration
``titr_wait`` periods later, provided that falls before ``Scenario.horizon``
(an infinite wait therefore disables titration).  With ``Scenario.pessimize_titrations`` set, a
scheduled titration is also counted as a toxicity at its dose from the moment
it is scheduled.  After any tolerated assessment the queue is drained while
the recommendation stays positive.
"""

from __future__ import annotations

import csv
import heapq
import io
import json
import math
from collections import Counter, deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .tally import EnrolledState, Tally, pessimize

ARRIVAL = "arrival"
ENROLL = "enroll"
TITRATE = "titrate"


def tox_probabilities(D: int, mean: float, sd: float) -> List[float]:
    """P(mtd < d) for d = 1..D under a normal threshold on the dose-level scale."""
    if sd <= 0:
        raise ValueError("sd must be positive")
    dist = NormalDist(mean, sd)
    return [dist.cdf(d) for d in range(1, D + 1)]


def sample_arrivals(rate: float, n: int, rng: np.random.Generator) -> List[float]:
    """Arrival times of a Poisson process started at 0 (first arrival after one gap)."""
    if rate <= 0:
        raise ValueError("arrival rate must be positive")
    if n == 0:
        return []
    return np.cumsum(rng.exponential(1.0 / rate, size=n)).tolist()


@dataclass(frozen=True)
class Scenario:
    D: int = 3
    mtd_mean: float = 3.0
    mtd_sd: float = math.log(1.5) / math.log(1.4)
    arrival_rate: float = 2.5
    n_participants: int = 40
    titr_wait: float = 1.0
    reps: int = 1000
    seed: int = 20250701
    pessimize_titrations: bool = False
    horizon: float = math.inf  # titrations due at or after this time are never given

    def __post_init__(self):
        if self.D < 1:
            raise ValueError("D must be >= 1")
        if self.mtd_sd <= 0:
            raise ValueError("mtd_sd must be positive")
        if self.arrival_rate <= 0:
            raise ValueError("arrival_rate must be positive")
        if self.n_participants < 0 or self.reps < 1:
            raise ValueError("n_participants must be >= 0 and reps >= 1")
        if self.titr_wait < 0:
            raise ValueError("titr_wait must be >= 0")


@dataclass
class Dosing:
    dose: int
    start: float
    resolve: float
    outcome: Optional[str] = None  # "o" tolerated, "x" toxicity


@dataclass
class Participant:
    id: int
    mtd: float
    arrival: float
    history: List[Dosing] = field(default_factory=list)


@dataclass
class TrialResult:
    final_tally: Tally
    final_rec: int
    events: List[dict]
    queue_leftover: int
    participants: List[Participant]

    @property
    def n_dosed(self) -> int:
        return sum(1 for p in self.participants if p.history)

    @property
    def n_titrations(self) -> int:
        return sum(max(0, len(p.history) - 1) for p in self.participants)

    @property
    def n_toxicities(self) -> int:
        return sum(self.final_tally.t)


def _resolution_delay(dose: int, mtd: float) -> float:
    if dose <= mtd:
        return 1.0
    return max(0.0, min(mtd, dose)) / dose


def run_trial(scenario: Scenario, rule: Callable[[Tally], int],
              rng: np.random.Generator, arrivals: Sequence[Tuple[float, float]] = None,
              check: bool = False) -> TrialResult:
    """Simulate one trial.

    ``arrivals`` optionally supplies ``(time, mtd)`` pairs, bypassing ``rng``.
    With ``check`` set, pessimization dominance is asserted at every decision.
    """
    D = scenario.D
    if arrivals is None:
        times = sample_arrivals(scenario.arrival_rate, scenario.n_participants, rng)
        mtds = rng.normal(scenario.mtd_mean, scenario.mtd_sd, size=len(times)).tolist()
        arrivals = list(zip(times, mtds))
    people = [Participant(i, float(m), float(z)) for i, (z, m) in enumerate(arrivals)]

    t = [0] * D
    n = [0] * D
    pending = [0] * D  # every unresolved assessment
    pending_first = [0] * D  # unresolved enrolling doses only
    queue: deque = deque()
    events: List[dict] = []
    heap: list = []
    seq = 0

    def push(time, kind, pid, dose):
        nonlocal seq
        heapq.heappush(heap, (time, seq, kind, pid, dose))
        seq += 1

    def log(time, kind, pid=None, dose=None, outcome=None):
        events.append({"time": time, "kind": kind, "participant": pid,
                       "dose": dose, "outcome": outcome})

    def current_rec():
        resolved = Tally(tuple(t), tuple(n))
        counted = pending if scenario.pessimize_titrations else pending_first
        rx = rule(pessimize(EnrolledState(resolved, tuple(counted))))
        if check and rx > rule(resolved):
            raise AssertionError("pessimized recommendation exceeds resolved one")
        return rx

    def administer(p: Participant, dose: int, now: float):
        resolve = now + _resolution_delay(dose, p.mtd)
        p.history.append(Dosing(dose, now, resolve))
        pending[dose - 1] += 1
        pending_first[dose - 1] += 1
        push(resolve, ENROLL, p.id, dose)

    for p in people:
        push(p.arrival, ARRIVAL, p.id, None)

    while heap:
        now, _, kind, pid, dose = heapq.heappop(heap)
        p = people[pid]
        if kind == ARRIVAL:
            rx = current_rec()
            if rx > 0 and not queue:
                administer(p, rx, now)
                log(now, "enroll", pid, rx)
            else:
                queue.append(p)
                log(now, "enqueue", pid)
            continue

        pending[dose - 1] -= 1
        if kind == ENROLL:
            pending_first[dose - 1] -= 1
        step = p.history[-1]
        i = dose - 1
        if dose > p.mtd:
            step.outcome = "x"
            t[i] += 1
            n[i] += 1
            log(now, "x", pid, dose, "toxicity")
            continue

        step.outcome = "o"
        n[i] += 1
        if kind == TITRATE:
            n[i - 1] -= 1
        log(now, "o", pid, dose, "tolerated")
        start = now + scenario.titr_wait
        if dose < D and start < scenario.horizon:
            resolve = start + _resolution_delay(dose + 1, p.mtd)
            p.history.append(Dosing(dose + 1, start, resolve))
            pending[dose] += 1
            push(resolve, TITRATE, pid, dose + 1)
            log(now, "updose", pid, dose + 1)
        # freeze-frame: tolerations are the only events that can raise the rec
        while queue:
            rx = current_rec()
            if rx == 0:
                break
            w = queue.popleft()
            administer(w, rx, now)
            log(now, "dequeue", w.id, rx)

    final = Tally(tuple(t), tuple(n))
    final_rec = rule(final) if not queue else 0
    log(now if events else 0.0, "next", None, final_rec)
    return TrialResult(final, final_rec, events, len(queue), people)


@dataclass(frozen=True)
class Summary:
    rec_freq: Tuple[float, ...]
    mean_tox: float
    mean_titrations: float
    reps: int
    seed: int

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        D = len(self.rec_freq) - 1
        w.writerow([f"rec{d}" for d in range(D + 1)]
                   + ["mean_tox", "mean_titrations", "reps", "seed"])
        w.writerow([f"{x:.4f}" for x in self.rec_freq]
                   + [f"{self.mean_tox:.4f}", f"{self.mean_titrations:.4f}",
                      self.reps, self.seed])
        return buf.getvalue()


def replicate_streams(seed: int, reps: int) -> List[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(reps)


def iter_trials(scenario: Scenario, rule: Callable[[Tally], int]):
    """Yield the full :class:`TrialResult` of every replicate, in order."""
    for stream in replicate_streams(scenario.seed, scenario.reps):
        yield run_trial(scenario, rule, np.random.default_rng(stream))


def _run_one(args):
    scenario, rule, stream = args
    res = run_trial(scenario, rule, np.random.default_rng(stream))
    return res.final_rec, res.n_toxicities, res.n_titrations


def replicate(scenario: Scenario, rule: Callable[[Tally], int], jobs: int = 1) -> Summary:
    """Run ``scenario.reps`` independent trials; replicate i uses the i-th spawned stream."""
    tasks = [(scenario, rule, s) for s in replicate_streams(scenario.seed, scenario.reps)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one, tasks, chunksize=32))
    else:
        results = [_run_one(task) for task in tasks]
    recs = Counter(r for r, _, _ in results)
    reps = scenario.reps
    return Summary(
        tuple(recs[d] / reps for d in range(scenario.D + 1)),
        sum(x for _, x, _ in results) / reps,
        sum(x for _, _, x in results) / reps,
        reps,
        scenario.seed,
    )


def events_jsonl(result: TrialResult) -> str:
    return "".join(json.dumps(e) + "\n" for e in result.events)
