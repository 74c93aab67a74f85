"""The eight single-component sparse PCA problems and their AM step maps.

A problem is fixed by three choices: the norm measuring variance (L2 or
L1), the sparsity-inducing norm (L0 or L1) and whether sparsity enters as a
constraint (budget ``s``) or a penalty (weight ``gamma``).  Rows are
numbered 1-8 in the order (L2,L0,con), (L1,L0,con), (L2,L1,con),
(L1,L1,con), (L2,L0,pen), (L1,L0,pen), (L2,L1,pen), (L1,L1,pen).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import operators as ops
from ._kernels import seq_dot, seq_norm1, seq_norm2
from .matrix import mult, mult_t

__all__ = [
    "Formulation",
    "DegenerateIterate",
    "ZeroLoading",
    "InfeasibleLoading",
    "objective",
    "objective_from_product",
    "merit",
    "merit_from_products",
    "y_step",
    "x_step",
    "is_feasible",
    "l0_norm",
    "penalty_scale",
]

VARIANCE_NORMS = ("L2", "L1")
SPARSITY_NORMS = ("L0", "L1")
MODES = ("constraint", "penalty")

# external vectors may carry round-off in place of exact zeros
EXTERNAL_ZERO_TOL = 1e-12
FEAS_TOL = 1e-8


class DegenerateIterate(ArithmeticError):
    """``Ax = 0`` under L2 variance: the y-step has no maximizer direction."""


class ZeroLoading(ArithmeticError):
    """The thresholded score vector vanished, so the x-step optimum is ``x = 0``."""


class InfeasibleLoading(ValueError):
    pass


@dataclass(frozen=True)
class Formulation:
    variance: str
    sparsity: str
    mode: str
    s: float = None
    gamma: float = None

    def __post_init__(self):
        object.__setattr__(self, "variance", self.variance.upper())
        object.__setattr__(self, "sparsity", self.sparsity.upper())
        object.__setattr__(self, "mode", self.mode.lower())
        if self.variance not in VARIANCE_NORMS:
            raise ValueError(f"variance norm must be one of {VARIANCE_NORMS}")
        if self.sparsity not in SPARSITY_NORMS:
            raise ValueError(f"sparsity norm must be one of {SPARSITY_NORMS}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.mode == "constraint":
            if self.s is None or self.gamma is not None:
                raise ValueError("constraint mode takes s, not gamma")
            if self.sparsity == "L0" and int(self.s) != self.s:
                raise ValueError("s must be an integer for the L0 constraint")
            if not self.s >= 1:
                raise ValueError("s must be at least 1")
        else:
            if self.gamma is None or self.s is not None:
                raise ValueError("penalty mode takes gamma, not s")
            if not self.gamma >= 0:
                raise ValueError("gamma must be nonnegative")

    @classmethod
    def from_index(cls, index, param):
        """Build table row ``index`` (1-8) with ``param`` as s or gamma."""
        if not 1 <= index <= 8:
            raise ValueError("formulation index must be in 1..8")
        i = index - 1
        variance = VARIANCE_NORMS[i % 2]
        sparsity = SPARSITY_NORMS[(i // 2) % 2]
        mode = MODES[i // 4]
        if mode == "constraint":
            return cls(variance, sparsity, mode, s=param)
        return cls(variance, sparsity, mode, gamma=param)

    @property
    def index(self):
        return (
            1
            + VARIANCE_NORMS.index(self.variance)
            + 2 * SPARSITY_NORMS.index(self.sparsity)
            + 4 * MODES.index(self.mode)
        )

    @property
    def constrained(self):
        return self.mode == "constraint"

    @property
    def param(self):
        return self.s if self.constrained else self.gamma

    @property
    def threshold(self):
        """The :class:`ThresholdParam` behind this row's x-step (None for the L1 constraint)."""
        if self.constrained:
            if self.sparsity == "L0":
                return ops.ThresholdParam("hard-cardinality", s=int(self.s))
            return None
        kind = "hard-square-penalty" if self.sparsity == "L0" else "soft-l1"
        return ops.ThresholdParam(kind, gamma=self.gamma)

    def check_dimension(self, p):
        if self.constrained and self.s > p:
            raise ValueError(f"s must be in [1, p] (p={p}), got {self.s}")

    def with_param(self, value):
        if self.constrained:
            return Formulation(self.variance, self.sparsity, self.mode, s=value)
        return Formulation(self.variance, self.sparsity, self.mode, gamma=value)

    def describe(self):
        return {
            "index": self.index,
            "variance": self.variance.lower(),
            "sparsity": self.sparsity.lower(),
            "mode": self.mode,
            "param_name": "s" if self.constrained else "gamma",
            "param": self.param,
        }

    def __str__(self):
        name = "s" if self.constrained else "gamma"
        return f"#{self.index} {self.variance} variance, {self.sparsity} {self.mode} ({name}={self.param})"


def l0_norm(x, tol=0.0):
    """Number of entries with ``|x_i| > tol``."""
    return int(np.count_nonzero(np.abs(x) > tol))


def is_feasible(form, x, tol=FEAS_TOL):
    x = np.asarray(x, dtype=np.float64)
    if seq_norm2(x) > 1 + tol:
        return False
    if form.constrained:
        if form.sparsity == "L0":
            return l0_norm(x, EXTERNAL_ZERO_TOL) <= form.s
        return seq_norm1(x) <= math.sqrt(form.s) + tol
    return True


def objective_from_product(form, u, x, zero_tol=0.0):
    """``f(x)`` given ``u = A x``."""
    var = seq_norm2(u) if form.variance == "L2" else seq_norm1(u)
    if form.constrained:
        return var
    if form.sparsity == "L0":
        return var * var - form.gamma * l0_norm(x, zero_tol)
    return var - form.gamma * seq_norm1(x)


def objective(form, A, x, check=True):
    """Evaluate ``f(x)``.

    Entries with ``|x_i| <= 1e-12`` count as zero in the L0 terms, since
    external vectors may carry round-off where the solver would place an
    exact zero.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (A.p,):
        raise ValueError(f"x must have shape ({A.p},), got {x.shape}")
    if check and not is_feasible(form, x):
        raise InfeasibleLoading(f"x is infeasible for formulation {form}")
    return objective_from_product(form, mult(A, x), x, EXTERNAL_ZERO_TOL)


def merit_from_products(form, v, x):
    """``F(x, y)`` given ``v = A.T y``, using ``y.T A x = v.x``."""
    t = seq_dot(v, x)
    if form.constrained:
        return t
    if form.sparsity == "L0":
        return t * t - form.gamma * l0_norm(x)
    return t - form.gamma * seq_norm1(x)


def merit(form, A, x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != (A.p,) or y.shape != (A.n,):
        raise ValueError(f"dimension mismatch: x {x.shape}, y {y.shape} for A {A.shape}")
    return merit_from_products(form, mult_t(A, y), x)


def y_step(form, u):
    """Maximize F over y given ``u = A x``."""
    u = np.asarray(u, dtype=np.float64)
    if form.variance == "L1":
        return np.sign(u)
    nrm = seq_norm2(u)
    if nrm == 0.0:
        raise DegenerateIterate("A x = 0 under L2 variance")
    return u / nrm


def x_step(form, v):
    """Maximize F over x given ``v = A.T y``; always returns a unit vector.

    Raises :class:`ZeroLoading` if thresholding leaves nothing.
    """
    v = np.asarray(v, dtype=np.float64)
    if form.constrained:
        if form.sparsity == "L0":
            z = ops.hard_threshold_top_s(v, int(form.s))
        else:
            if not np.any(v):
                raise ZeroLoading("A.T y = 0")
            z = ops.soft_threshold(v, ops.lambda_s(v, form.s))
    elif form.sparsity == "L0":
        z = ops.hard_threshold_penalty(v, form.gamma)
    else:
        z = ops.soft_threshold(v, form.gamma)
    nrm = seq_norm2(z)
    if nrm == 0.0:
        raise ZeroLoading("thresholded vector is zero")
    return z / nrm


def penalty_scale(A, form):
    """Largest gamma that still leaves a nonzero x-step for some feasible y.

    For L2 variance scores are bounded by the column Euclidean norms, for L1
    variance by the column L1 norms; L0 penalties compare squared scores.
    Useful for choosing gamma as a fraction of this scale.
    """
    if form.variance == "L2":
        bound = float(np.max(A.column_norms))
    else:
        if A.is_sparse:
            bound = float(np.max(abs(A.tocsc()).sum(axis=0)))
        else:
            bound = float(np.max(np.abs(A.toarray()).sum(axis=0)))
    return bound * bound if form.sparsity == "L0" else bound
