import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from amspca import formulations as fm
from amspca.formulations import Formulation
from amspca.matrix import DataMatrix

ROWS = [
    (1, "L2", "L0", "constraint"),
    (2, "L1", "L0", "constraint"),
    (3, "L2", "L1", "constraint"),
    (4, "L1", "L1", "constraint"),
    (5, "L2", "L0", "penalty"),
    (6, "L1", "L0", "penalty"),
    (7, "L2", "L1", "penalty"),
    (8, "L1", "L1", "penalty"),
]


@pytest.mark.parametrize("index, variance, sparsity, mode", ROWS)
def test_table_rows(index, variance, sparsity, mode):
    form = Formulation.from_index(index, 2)
    assert (form.variance, form.sparsity, form.mode) == (variance, sparsity, mode)
    assert form.index == index
    assert Formulation(variance.lower(), sparsity.lower(), mode, **({"s": 2} if mode == "constraint" else {"gamma": 2})) == form


def test_validation():
    with pytest.raises(ValueError):
        Formulation("L2", "L0", "constraint", s=1.5)
    with pytest.raises(ValueError):
        Formulation("L2", "L0", "constraint", gamma=1.0)
    with pytest.raises(ValueError):
        Formulation("L2", "L0", "penalty", gamma=-1.0)
    with pytest.raises(ValueError):
        Formulation("L3", "L0", "penalty", gamma=1.0)
    with pytest.raises(ValueError):
        Formulation.from_index(1, 5).check_dimension(3)
    Formulation("L2", "L1", "constraint", s=1.5).check_dimension(2)


def test_objective_examples():
    A = DataMatrix(np.diag([3.0, 1.0]))
    x = np.array([1.0, 0.0])
    assert fm.objective(Formulation.from_index(1, 1), A, x) == 3.0
    assert fm.objective(Formulation.from_index(5, 2.0), A, x) == 7.0
    A2 = DataMatrix([[1.0, 2.0], [3.0, 4.0]])
    e2 = np.array([0.0, 1.0])
    assert fm.objective(Formulation.from_index(2, 1), A2, e2) == 6.0
    assert fm.objective(Formulation.from_index(1, 1), A2, e2) == pytest.approx(math.sqrt(20))


def test_objective_rejects_infeasible():
    A = DataMatrix(np.eye(3))
    x = np.ones(3) / math.sqrt(3)
    with pytest.raises(fm.InfeasibleLoading):
        fm.objective(Formulation.from_index(1, 2), A, x)
    with pytest.raises(fm.InfeasibleLoading):
        fm.objective(Formulation.from_index(3, 2), A, x)
    assert fm.objective(Formulation.from_index(3, 3), A, x) == pytest.approx(1.0)


def test_external_zero_tolerance():
    A = DataMatrix(np.eye(2))
    x = np.array([1.0, 1e-13])
    assert fm.objective(Formulation.from_index(1, 1), A, x) == pytest.approx(1.0)
    assert fm.objective(Formulation.from_index(5, 0.5), A, x) == pytest.approx(0.5)


def test_y_step_degenerate():
    with pytest.raises(fm.DegenerateIterate):
        fm.y_step(Formulation.from_index(1, 1), np.zeros(3))
    np.testing.assert_array_equal(fm.y_step(Formulation.from_index(2, 1), np.array([0.0, -2.0])), [0, -1])


def test_x_step_zero_loading():
    with pytest.raises(fm.ZeroLoading):
        fm.x_step(Formulation.from_index(5, 100.0), np.array([1.0, 2.0]))
    with pytest.raises(fm.ZeroLoading):
        fm.x_step(Formulation.from_index(3, 1.5), np.zeros(3))


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_steps_maximize_merit(index, seed):
    """Each half step beats random feasible competitors."""
    rng = np.random.default_rng(seed)
    n, p = 5, 6
    A = DataMatrix(rng.standard_normal((n, p)))
    a = A.toarray()
    param = int(rng.integers(1, p + 1)) if index <= 4 else float(rng.uniform(0, 1))
    form = Formulation.from_index(index, param)
    x = rng.standard_normal(p)
    x /= np.linalg.norm(x)
    if form.constrained and form.sparsity == "L0":
        x = fm.x_step(form, x)
    if form.constrained and form.sparsity == "L1":
        x = x * min(1.0, math.sqrt(form.s) / np.abs(x).sum())
    y = fm.y_step(form, a @ x)
    best_y = fm.merit(form, A, x, y)
    for _ in range(50):
        z = rng.standard_normal(n)
        z = np.sign(z) if form.variance == "L1" else z / np.linalg.norm(z)
        assert fm.merit(form, A, x, z) <= best_y + 1e-10
    try:
        x_new = fm.x_step(form, a.T @ y)
    except fm.ZeroLoading:
        return
    assert fm.is_feasible(form, x_new)
    best_x = fm.merit(form, A, x_new, y)
    for _ in range(50):
        z = rng.standard_normal(p)
        if form.constrained and form.sparsity == "L0":
            z = fm.x_step(form, z)
        z /= np.linalg.norm(z)
        if form.constrained and form.sparsity == "L1":
            z = z * min(1.0, math.sqrt(form.s) / np.abs(z).sum())
        assert fm.merit(form, A, z, y) <= best_x + 1e-9 * max(1.0, abs(best_x))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_merit_at_best_y_is_objective(index, seed):
    rng = np.random.default_rng(seed)
    A = DataMatrix(rng.standard_normal((4, 5)))
    form = Formulation.from_index(index, 2 if index <= 4 else 0.3)
    x = fm.x_step(form, rng.standard_normal(5) * 3)
    y = fm.y_step(form, A.toarray() @ x)
    assert fm.merit(form, A, x, y) == pytest.approx(fm.objective(form, A, x), rel=1e-10, abs=1e-12)


def test_penalty_scale_kills_everything():
    rng = np.random.default_rng(3)
    A = DataMatrix(rng.standard_normal((6, 4)))
    for index in (5, 6, 7, 8):
        form = Formulation.from_index(index, 0.0)
        form = form.with_param(fm.penalty_scale(A, form) * 1.0001)
        y = fm.y_step(form, A.toarray() @ rng.standard_normal(4))
        with pytest.raises(fm.ZeroLoading):
            fm.x_step(form, A.toarray().T @ y)
