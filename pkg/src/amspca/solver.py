"""Alternating maximization for a single start and for a batch of starts.

One *sweep* advances every run in a block by one iteration: ``U = A X``,
column-wise y-steps, ``V = A.T Y``, column-wise x-steps.  The merit of the new
pair, ``F(x_new, y) = v.x_new`` (minus the penalty), costs no extra product.
"""

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import formulations as fm
from .matrix import mult, mult_t

__all__ = [
    "SolverConfig",
    "SolverState",
    "RunResult",
    "Status",
    "generate_start",
    "generate_starts",
    "stop_rule",
    "am_solve",
    "am_solve_batch",
    "run_schedule",
    "am_iterates",
]


class Status:
    RUNNING = "running"
    CONVERGED = "converged"
    MAX_ITERATIONS = "max-iterations"
    DEGENERATE = "degenerate"
    ZERO_LOADING = "zero-loading"


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 200
    tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ValueError("max_iterations must be a positive integer")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


@dataclass
class SolverState:
    x: np.ndarray
    y: np.ndarray = None
    k: int = 0
    merit_history: list = field(default_factory=list)
    status: str = Status.RUNNING
    start_index: int = 0


@dataclass
class RunResult:
    loading: np.ndarray
    objective: float
    iterations: int
    status: str
    start_index: int = 0
    merit_history: list = field(default_factory=list, repr=False)


def generate_start(p, seed, index, scheme="gaussian-sphere"):
    """Starting direction number ``index`` for ``seed``.

    ``gaussian-sphere`` draws a normalized standard normal vector from a
    generator keyed on ``(seed, index)``; ``column`` returns the basis vector
    ``e_{index mod p}``.
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    if scheme == "column":
        x = np.zeros(p)
        x[index % p] = 1.0
        return x
    if scheme != "gaussian-sphere":
        raise ValueError(f"unknown start scheme {scheme!r}")
    rng = np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, int(index)])
    while True:
        x = rng.standard_normal(p)
        nrm = math.sqrt(float(x @ x))
        if nrm > 0:
            return x / nrm


def generate_starts(p, seed, count, scheme="gaussian-sphere", offset=0):
    """Stack ``count`` starts as columns of a ``(p, count)`` array."""
    X = np.empty((p, count), order="F")
    for j in range(count):
        X[:, j] = generate_start(p, seed, offset + j, scheme)
    return X


def stop_rule(f_new, f_old, tol):
    """Relative-improvement test, falling back to an absolute test near zero."""
    if f_old > 1e-12:
        return f_new / f_old <= 1.0 + tol
    return f_new - f_old <= tol * max(1.0, abs(f_new))


class _Slot:
    __slots__ = ("state", "f_prev", "loading")

    def __init__(self, start_index, x0):
        self.state = SolverState(x=x0, start_index=start_index)
        self.f_prev = None
        self.loading = None


def _advance(form, cfg, slot, u):
    """y-step for one run; returns y or None once the run has finished."""
    st = slot.state
    try:
        y = fm.y_step(form, u)
    except fm.DegenerateIterate:
        st.status = Status.DEGENERATE
        slot.loading = st.x
        return None
    st.y = y
    return y


def _update(form, cfg, slot, v):
    """x-step and stopping test for one run; returns the new x (or None if it stopped without one)."""
    st = slot.state
    try:
        x = fm.x_step(form, v)
    except fm.ZeroLoading:
        if form.constrained:
            st.status = Status.DEGENERATE
            slot.loading = st.x
        else:
            st.status = Status.ZERO_LOADING
            slot.loading = np.zeros_like(st.x)
        return None
    f_new = fm.merit_from_products(form, v, x)
    st.k += 1
    st.merit_history.append(f_new)
    st.x = x
    if slot.f_prev is not None and stop_rule(f_new, slot.f_prev, cfg.tol):
        st.status = Status.CONVERGED
    elif st.k >= cfg.max_iterations:
        st.status = Status.MAX_ITERATIONS
    slot.f_prev = f_new
    if st.status != Status.RUNNING:
        slot.loading = x
    return x


def _finalize(form, A, slots):
    """Score finished runs with one batched product."""
    X = np.empty((A.p, len(slots)), order="F")
    for j, slot in enumerate(slots):
        X[:, j] = slot.loading
    U = mult(A, X)
    out = []
    for j, slot in enumerate(slots):
        st = slot.state
        out.append(
            RunResult(
                loading=slot.loading.copy(),
                objective=fm.objective_from_product(form, U[:, j], slot.loading),
                iterations=st.k,
                status=st.status,
                start_index=st.start_index,
                merit_history=st.merit_history,
            )
        )
    return out


@dataclass
class ScheduleOutcome:
    results: list
    sweeps: int
    column_iterations: int


def run_schedule(form, A, cfg, starts, width, refill=False):
    """Run every ``(start_index, x0)`` in ``starts`` through AM, ``width`` at a time.

    With ``refill=False`` the starts are cut into consecutive batches; each
    batch keeps its full block width until its slowest run stops (finished
    columns are still multiplied but no longer updated).  With ``refill=True``
    a finished slot immediately takes the next pending start; once the queue
    is empty the block shrinks to the runs still going.

    Results come back in the order of ``starts``.
    """
    form.check_dimension(A.p)
    starts = list(starts)
    if width < 1:
        raise ValueError("width must be at least 1")
    order = {idx: pos for pos, (idx, _) in enumerate(starts)}
    if len(order) != len(starts):
        raise ValueError("start indices must be unique")
    results = [None] * len(starts)
    queue = deque(starts)
    sweeps = 0
    col_iters = 0

    def install(x0, idx):
        x0 = np.asarray(x0, dtype=np.float64)
        if x0.shape != (A.p,):
            raise ValueError(f"start must have shape ({A.p},)")
        return _Slot(idx, x0.copy())

    while queue:
        w = min(width, len(queue))
        slots = [install(x0, idx) for idx, x0 in (queue.popleft() for _ in range(w))]
        X = np.empty((A.p, w), order="F")
        for j, slot in enumerate(slots):
            X[:, j] = slot.state.x
        Y = np.zeros((A.n, w), order="F")
        live = list(range(w))

        while live:
            if refill:
                cols = live
                Xb = X[:, cols] if len(cols) < w else X
            else:
                cols = list(range(w))
                Xb = X
            colpos = {c: t for t, c in enumerate(cols)}
            U = mult(A, Xb)
            sweeps += 1
            col_iters += len(cols)

            finished = []
            stepped = []
            for c in live:
                y = _advance(form, cfg, slots[c], U[:, colpos[c]])
                if y is None:
                    finished.append(c)
                else:
                    Y[:, c] = y
                    stepped.append(c)
            Yb = Y[:, cols] if len(cols) < w else Y
            V = mult_t(A, Yb)
            for c in stepped:
                x = _update(form, cfg, slots[c], V[:, colpos[c]])
                if x is not None:
                    X[:, c] = x
                if slots[c].state.status != Status.RUNNING:
                    finished.append(c)

            if finished:
                finished.sort()
                for res in _finalize(form, A, [slots[c] for c in finished]):
                    results[order[res.start_index]] = res
                done = set(finished)
                live = [c for c in live if c not in done]
                if refill:
                    for c in finished:
                        if not queue:
                            break
                        idx, x0 = queue.popleft()
                        slots[c] = install(x0, idx)
                        X[:, c] = slots[c].state.x
                        live.append(c)
                    live.sort()

    return ScheduleOutcome(results=results, sweeps=sweeps, column_iterations=col_iters)


def am_solve_batch(form, A, X0, cfg=SolverConfig(), start_indices=None):
    """Run AM from every column of ``X0`` as one fixed-width block.

    Returns ``(results, converged)`` where ``converged`` is a boolean mask over
    the columns.  Each result is bitwise identical to :func:`am_solve` from the
    same column.
    """
    X0 = np.asarray(X0, dtype=np.float64)
    if X0.ndim == 1:
        X0 = X0[:, None]
    r = X0.shape[1]
    if start_indices is None:
        start_indices = range(r)
    for j in range(r):
        nrm = math.sqrt(float(X0[:, j] @ X0[:, j]))
        if abs(nrm - 1.0) > 1e-8:
            raise ValueError(f"start column {j} is not unit norm (norm={nrm})")
    starts = [(idx, X0[:, j]) for j, idx in enumerate(start_indices)]
    out = run_schedule(form, A, cfg, starts, width=max(r, 1))
    mask = np.array([res.status == Status.CONVERGED for res in out.results])
    return out.results, mask


def am_solve(form, A, x0, cfg=SolverConfig(), start_index=0):
    """Run AM from one unit start ``x0`` until the stopping rule or ``cfg.max_iterations``."""
    results, _ = am_solve_batch(form, A, np.asarray(x0)[:, None], cfg, [start_index])
    return results[0]


def am_iterates(form, A, x0, iterations):
    """Raw AM iterates with no stopping test: ``(xs, ys)`` with ``xs[k] = x^(k)``, ``ys[k] = y^(k)``.

    Stops early only if a step is undefined (degenerate or zero loading).
    """
    x = np.asarray(x0, dtype=np.float64)
    xs, ys = [x], []
    for _ in range(iterations):
        y = fm.y_step(form, mult(A, x))
        ys.append(y)
        x = fm.x_step(form, mult_t(A, y))
        xs.append(x)
    ys.append(fm.y_step(form, mult(A, x)))
    return xs, ys
