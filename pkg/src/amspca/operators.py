"""Closed-form maximizers for the alternating-maximization subproblems.

All operators act on 1-D float arrays and return new arrays.  ``sgn(0) = 0``
throughout, which also makes :func:`hard_threshold_penalty` drop entries
sitting exactly on the threshold.
"""

import math

import numpy as np

from ._kernels import seq_norm1, seq_norm2

__all__ = [
    "ThresholdParam",
    "DegenerateInput",
    "sgn",
    "hard_threshold_top_s",
    "hard_threshold_penalty",
    "soft_threshold",
    "lambda_s",
    "s1_maximizer",
    "s2_maximizer",
    "s4_maximizer",
]


class DegenerateInput(ValueError):
    """The subproblem has no unit-norm maximizer for this input."""


class ThresholdParam:
    """Thresholding parameter: a cardinality budget ``s`` or a penalty ``gamma``.

    ``kind`` is one of ``"hard-cardinality"`` (uses ``s``), ``"soft-l1"`` or
    ``"hard-square-penalty"`` (both use ``gamma``).
    """

    KINDS = ("hard-cardinality", "soft-l1", "hard-square-penalty")

    __slots__ = ("kind", "s", "gamma")

    def __init__(self, kind, s=None, gamma=None):
        if kind not in self.KINDS:
            raise ValueError(f"unknown threshold kind {kind!r}")
        if kind == "hard-cardinality":
            if s is None or gamma is not None:
                raise ValueError("hard-cardinality takes s only")
            if int(s) != s or s < 0:
                raise ValueError("s must be a nonnegative integer")
            s = int(s)
        else:
            if gamma is None or s is not None:
                raise ValueError(f"{kind} takes gamma only")
            if not gamma >= 0:
                raise ValueError("gamma must be nonnegative")
            gamma = float(gamma)
        self.kind, self.s, self.gamma = kind, s, gamma

    def apply(self, a):
        if self.kind == "hard-cardinality":
            return hard_threshold_top_s(a, self.s)
        if self.kind == "soft-l1":
            return soft_threshold(a, self.gamma)
        return hard_threshold_penalty(a, self.gamma)

    def __repr__(self):
        val = f"s={self.s}" if self.s is not None else f"gamma={self.gamma!r}"
        return f"ThresholdParam({self.kind!r}, {val})"


def sgn(t):
    """Sign with ``sgn(0) = 0``; works elementwise on arrays."""
    if np.ndim(t) == 0:
        return float((t > 0) - (t < 0))
    return np.sign(np.asarray(t, dtype=np.float64))


def hard_threshold_top_s(a, s):
    """Keep the ``s`` entries of largest magnitude, zero the rest.

    Ties at the cutoff keep the lowest index.
    """
    a = np.asarray(a, dtype=np.float64)
    m = a.shape[0]
    if int(s) != s or not 0 <= s <= m:
        raise ValueError(f"s must be an integer in [0, {m}], got {s}")
    s = int(s)
    if s == m:
        return a.copy()
    out = np.zeros_like(a)
    if s == 0:
        return out
    # stable sort on -|a| keeps ascending index among equal magnitudes
    keep = np.argsort(-np.abs(a), kind="stable")[:s]
    out[keep] = a[keep]
    return out


def hard_threshold_penalty(a, gamma):
    """``a_i`` where ``a_i**2 > gamma``, else 0."""
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    a = np.asarray(a, dtype=np.float64)
    return np.where(a * a > gamma, a, 0.0)


def soft_threshold(a, gamma):
    """``sgn(a_i) * max(|a_i| - gamma, 0)``."""
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    a = np.asarray(a, dtype=np.float64)
    return np.sign(a) * np.maximum(np.abs(a) - gamma, 0.0)


def _norm_ratio(a, lam):
    v = soft_threshold(a, lam)
    n2 = seq_norm2(v)
    if n2 == 0.0:
        return 1.0
    return seq_norm1(v) / n2


def _support_root(mags, lam, s):
    """Exact stationary point of ``lam*sqrt(s) + ||V_lam(a)||_2`` on the support of ``V_lam``.

    On a fixed support of size k the condition ``||V||_1 = sqrt(s) ||V||_2``
    is a quadratic in lam; returns the root or None if it leaves the support's
    interval.
    """
    inside = mags > lam
    k = int(np.count_nonzero(inside))
    if k <= s:
        return None
    kept = mags[inside]
    s1 = float(np.sum(kept))
    # k*sum(a^2) - (sum a)^2, written without the cancellation
    dev = kept - s1 / k
    disc = s * k * float(np.dot(dev, dev)) / (k - s)
    if disc < 0:
        return None
    root = (s1 - math.sqrt(disc)) / k
    upper = float(kept.min())
    below = mags[~inside]
    lower = float(below.max()) if below.size else 0.0
    if lower <= root < upper:
        return root
    return None


def lambda_s(a, s):
    """Minimizer over ``lam >= 0`` of ``lam*sqrt(s) + ||soft_threshold(a, lam)||_2``.

    Bisects on the norm ratio ``||V_lam(a)||_1 / ||V_lam(a)||_2`` (nonincreasing
    in lam) against ``sqrt(s)``, then snaps to the exact root on the bracketed
    support when it exists.  Returns 0 when the L1 constraint is inactive.
    """
    a = np.asarray(a, dtype=np.float64)
    m = a.shape[0]
    if not 1 <= s <= m:
        raise ValueError(f"s must lie in [1, {m}], got {s}")
    amax = float(np.max(np.abs(a))) if m else 0.0
    if amax == 0.0:
        raise DegenerateInput("lambda_s of the zero vector")
    root_s = math.sqrt(s)
    if _norm_ratio(a, 0.0) <= root_s * (1.0 + 1e-12):
        return 0.0

    lo, hi = 0.0, amax
    width = 1e-10 * amax
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if _norm_ratio(a, mid) > root_s:
            lo = mid
        else:
            hi = mid

    # snap to the exact root on the bracketed support; with tied magnitudes the
    # "root" can be rounding noise, so every candidate is scored on the dual
    mags = np.abs(a)

    def dual(c):
        return c * root_s + seq_norm2(soft_threshold(a, c))

    cands = [hi, lo] + mags[(mags >= lo) & (mags <= hi)].tolist()
    vals = [dual(c) for c in cands]
    i = int(np.argmin(vals))
    for probe in (hi, lo):
        root = _support_root(mags, probe, s)
        # the root wins unless it is clearly worse (flat dual near the optimum)
        if root is not None and dual(root) <= vals[i] + 1e-12 * abs(vals[i]):
            return root
    return float(cands[i])


def s1_maximizer(a):
    """Maximize ``a.z`` over the unit Euclidean ball: ``a/||a||_2`` with value ``||a||_2``."""
    a = np.asarray(a, dtype=np.float64)
    nrm = seq_norm2(a)
    if nrm == 0.0:
        raise DegenerateInput("zero vector has no normalized direction")
    return a / nrm, nrm


def s2_maximizer(a):
    """Maximize ``a.z`` over the unit infinity ball: ``sgn(a)`` with value ``||a||_1``."""
    a = np.asarray(a, dtype=np.float64)
    return np.sign(a), seq_norm1(a)


def s4_maximizer(a, s):
    """Maximize ``a.z`` subject to ``||z||_2 <= 1`` and ``||z||_1 <= sqrt(s)``.

    Returns the unit maximizer and the dual value
    ``lambda_s(a)*sqrt(s) + ||V_{lambda_s(a)}(a)||_2``.
    """
    lam = lambda_s(a, s)
    v = soft_threshold(a, lam)
    nrm = seq_norm2(v)
    if nrm == 0.0:
        raise DegenerateInput("soft-thresholded vector vanished")
    return v / nrm, lam * math.sqrt(s) + nrm
