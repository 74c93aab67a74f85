import numpy as np

from amspca.formulations import Formulation, y_step
from amspca.matrix import DataMatrix


def random_matrix(rng, n, p):
    return DataMatrix(rng.standard_normal((n, p)))


def pick_gamma(index, A, rng, q=0.5):
    """Penalty weight at the q-quantile of first-iteration scores from a random start.

    Keeps roughly a (1-q) share of coordinates alive at the first x-step, so
    penalized problems are neither trivial nor all-zero.
    """
    a = A.toarray()
    x = rng.standard_normal(A.p)
    variance = "L2" if index % 2 == 1 else "L1"
    y = y_step(Formulation(variance, "L0", "penalty", gamma=0.0), a @ x)
    v = np.abs(a.T @ y)
    score = v ** 2 if index in (5, 6) else v
    return float(np.quantile(score, q))


def make_form(index, A, rng, s=None, q=0.5):
    if index <= 4:
        if s is None:
            s = max(1, A.p // 4)
        return Formulation.from_index(index, s)
    return Formulation.from_index(index, pick_gamma(index, A, rng, q))


def unit(rng, p):
    x = rng.standard_normal(p)
    return x / np.linalg.norm(x)
