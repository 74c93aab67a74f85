"""Multi-start campaigns under four schedules.

NAI runs starts one at a time, SFA runs all of them as one block, BAT(r)
runs fixed blocks of ``r`` to completion, OTF(r) keeps ``r`` slots busy and
refills a slot as soon as its run stops.  All four see the same starts and
the same per-run arithmetic, so only sweep counts and wall time differ.
"""

import time
from dataclasses import dataclass, field

from .solver import SolverConfig, Status, generate_start, run_schedule

__all__ = ["STRATEGIES", "MultiStartPlan", "MultiStartReport", "run_multistart", "sweep_stats"]

STRATEGIES = ("NAI", "SFA", "BAT", "OTF")


@dataclass(frozen=True)
class MultiStartPlan:
    l: int
    strategy: str = "OTF"
    r: int = None
    seed: int = 0
    scheme: str = "gaussian-sphere"

    def __post_init__(self):
        strategy = self.strategy.upper()
        object.__setattr__(self, "strategy", strategy)
        if strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}")
        if int(self.l) != self.l or self.l < 1:
            raise ValueError("l must be a positive integer")
        r = self.r
        if strategy == "NAI":
            if r not in (None, 1):
                raise ValueError("NAI runs with r = 1")
            r = 1
        elif strategy == "SFA":
            if r not in (None, self.l):
                raise ValueError("SFA runs with r = l")
            r = self.l
        elif r is None or not 1 <= r <= self.l:
            raise ValueError(f"{strategy} needs 1 <= r <= l (l={self.l}, r={r})")
        object.__setattr__(self, "r", int(r))

    @property
    def label(self):
        if self.strategy in ("BAT", "OTF"):
            return f"{self.strategy}{self.r}"
        return self.strategy


@dataclass
class MultiStartReport:
    best: object
    all_results: list
    total_sweeps: int
    column_iterations: int
    wall_time: float
    plan: MultiStartPlan = None
    per_start_iterations: list = field(default_factory=list)

    @property
    def objectives(self):
        return [res.objective for res in self.all_results]


def _pick_best(results):
    best = results[0]
    for res in results[1:]:
        if res.objective > best.objective:
            best = res
    return best


def run_multistart(form, A, plan, cfg=SolverConfig()):
    """Run ``plan.l`` starts ``generate_start(p, plan.seed, 0..l-1)`` and keep the best.

    A run that ends degenerate or at a zero loading is reported like any
    other; it never aborts the campaign.
    """
    starts = [(i, generate_start(A.p, plan.seed, i, plan.scheme)) for i in range(plan.l)]
    t0 = time.perf_counter()
    out = run_schedule(form, A, cfg, starts, width=plan.r, refill=plan.strategy == "OTF")
    wall = time.perf_counter() - t0
    results = out.results
    return MultiStartReport(
        best=_pick_best(results),
        all_results=results,
        total_sweeps=out.sweeps,
        column_iterations=out.column_iterations,
        wall_time=wall,
        plan=plan,
        per_start_iterations=[res.iterations for res in results],
    )


def sweep_stats(report, baseline=None):
    """Summary numbers for one campaign; ``speedup`` is wall time relative to ``baseline`` (or 1.0)."""
    its = report.per_start_iterations
    ref = baseline if baseline is not None else report
    speedup = ref.wall_time / report.wall_time if report.wall_time > 0 else float("inf")
    statuses = {}
    for res in report.all_results:
        statuses[res.status] = statuses.get(res.status, 0) + 1
    return {
        "strategy": report.plan.label if report.plan else None,
        "starts": len(report.all_results),
        "mean_iterations": sum(its) / len(its),
        "total_sweeps": report.total_sweeps,
        "column_iterations": report.column_iterations,
        "wall_time": report.wall_time,
        "speedup": speedup,
        "sweep_ratio": ref.total_sweeps / report.total_sweeps,
        "converged": statuses.get(Status.CONVERGED, 0),
        "statuses": statuses,
    }
