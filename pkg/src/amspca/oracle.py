"""Reference solvers for checking the AM solver.

Everything here works on plain dense numpy arrays with BLAS products, so it
shares no arithmetic path with the fixed-order kernels used by the solver.
The thresholding operators are shared on purpose: identical tie-breaking is
what makes iterate-by-iterate comparison meaningful.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from . import formulations as fm
from . import operators as ops
from .matrix import DataMatrix

__all__ = [
    "OracleResult",
    "EnumerationTooLarge",
    "gpower_step",
    "gpower_iterates",
    "power_method_sigma_max",
    "brute_force_l0_constrained",
    "brute_force_penalized",
    "random_uniform_matrix",
]


class EnumerationTooLarge(ValueError):
    pass


@dataclass
class OracleResult:
    optimum: float
    argmax_support: tuple
    certificate: str
    certified: bool = True


def _dense(A):
    if isinstance(A, DataMatrix):
        return A.toarray()
    return np.asarray(A, dtype=np.float64)


# ---------------------------------------------------------------------------
# GPower


def gpower_step(form, A, z):
    """One linearize-and-maximize step.

    Constrained rows iterate on the loading ``x`` and maximize the linearization
    of ``F_Y(x) = max_y F(x, y)`` over the loading set.  Penalized rows iterate on
    the dummy ``y`` and maximize the linearization of ``F_X(y)`` over the y-ball.
    """
    a = _dense(A)
    z = np.asarray(z, dtype=np.float64)
    if form.constrained:
        az = a @ z
        if form.variance == "L2":
            nrm = np.linalg.norm(az)
            if nrm == 0.0:
                raise fm.DegenerateIterate("A x = 0")
            grad = a.T @ az / nrm
        else:
            grad = a.T @ np.sign(az)
        if form.sparsity == "L0":
            w = ops.hard_threshold_top_s(grad, int(form.s))
        else:
            if not np.any(grad):
                raise fm.ZeroLoading("zero subgradient")
            w = ops.soft_threshold(grad, ops.lambda_s(grad, form.s))
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            raise fm.ZeroLoading("zero subgradient")
        return w / nrm

    scores = a.T @ z
    if form.sparsity == "L0":
        kept = ops.hard_threshold_penalty(scores, form.gamma)
    else:
        kept = ops.soft_threshold(scores, form.gamma)
    if not np.any(kept):
        raise fm.ZeroLoading("every score thresholded away")
    if form.sparsity == "L0":
        # gradient of sum_i [(a_i.y)^2 - gamma]_+
        grad = 2.0 * (a @ kept)
    else:
        # gradient of ||V_gamma(A.T y)||_2
        grad = a @ kept / np.linalg.norm(kept)
    if form.variance == "L2":
        nrm = np.linalg.norm(grad)
        if nrm == 0.0:
            raise fm.DegenerateIterate("zero subgradient")
        return grad / nrm
    return np.sign(grad)


def gpower_iterates(form, A, x0, iterations):
    """GPower iterate stream matching AM's: x-iterates for constrained rows, y-iterates otherwise.

    Penalized rows start from ``y0 = argmax_y F(x0, y)``.
    """
    a = _dense(A)
    x0 = np.asarray(x0, dtype=np.float64)
    if form.constrained:
        z = x0
    else:
        u = a @ x0
        if form.variance == "L2":
            z = u / np.linalg.norm(u)
        else:
            z = np.sign(u)
    out = [z]
    for _ in range(iterations):
        z = gpower_step(form, a, z)
        out.append(z)
    return out


# ---------------------------------------------------------------------------
# power method


def power_method_sigma_max(A, tol=1e-12, max_iter=100000, seed=0):
    """Largest singular value by power iteration on ``A.T A``.

    Stops when the Rayleigh estimate ``||A x||_2`` changes by at most ``tol``
    relative.  A zero matrix gives 0.
    """
    a = _dense(A)
    if not np.any(a):
        return 0.0
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(a.shape[1])
    x /= np.linalg.norm(x)
    sigma = np.linalg.norm(a @ x)
    for _ in range(max_iter):
        w = a.T @ (a @ x)
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            # start landed in the null space
            x = rng.standard_normal(a.shape[1])
            x /= np.linalg.norm(x)
            continue
        x = w / nrm
        new = np.linalg.norm(a @ x)
        if abs(new - sigma) <= tol * new:
            return float(new)
        sigma = new
    return float(sigma)


def _batched_sigma_max(sub, tol=1e-14, max_iter=20000):
    """Largest singular value of each matrix in a stack ``(m, n, k)``."""
    m, _, k = sub.shape
    gram = np.einsum("mik,mij->mkj", sub, sub)
    x = np.ones((m, k)) + 0.01 * np.arange(1, k + 1)
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    rho = np.einsum("mk,mkj,mj->m", x, gram, x)
    done = np.zeros(m, dtype=bool)
    for _ in range(max_iter):
        w = np.einsum("mkj,mj->mk", gram, x)
        nrm = np.linalg.norm(w, axis=1)
        nz = nrm > 0
        x[nz] = w[nz] / nrm[nz, None]
        new = np.einsum("mk,mkj,mj->m", x, gram, x)
        done |= np.abs(new - rho) <= tol * np.maximum(new, 1e-300)
        rho = new
        if done.all():
            break
    return np.sqrt(np.maximum(rho, 0.0))


def _sign_matrix(n):
    """All sign vectors with first entry +1 (y and -y give the same values), as rows."""
    if n > 22:
        raise EnumerationTooLarge("sign enumeration limited to n <= 22")
    rows = np.array(list(itertools.product((1.0, -1.0), repeat=n - 1))).reshape(-1, n - 1)
    return np.hstack([np.ones((rows.shape[0], 1)), rows])


def _l1_variance_sq(a, supports, chunk=4096):
    """``max_y ||A_S.T y||_2^2`` over sign vectors y, for each support (0/1 rows)."""
    signs = _sign_matrix(a.shape[0])
    ind = np.asarray(supports, dtype=np.float64).T
    best = np.full(ind.shape[1], -np.inf)
    for lo in range(0, signs.shape[0], chunk):
        w2 = (signs[lo:lo + chunk] @ a) ** 2
        best = np.maximum(best, np.max(w2 @ ind, axis=0))
    return best


def _supports_of_size(p, k):
    combos = list(itertools.combinations(range(p), k))
    mask = np.zeros((len(combos), p), dtype=bool)
    for row, c in enumerate(combos):
        mask[row, list(c)] = True
    return combos, mask


def _support_values(a, k, variance):
    """(supports, best variance value) for all supports of size k."""
    combos, mask = _supports_of_size(a.shape[1], k)
    if variance == "L2":
        sub = np.stack([a[:, list(c)] for c in combos])
        vals = _batched_sigma_max(sub)
    else:
        vals = np.sqrt(_l1_variance_sq(a, mask))
    return combos, vals


def brute_force_l0_constrained(A, s, variance="L2"):
    """Global optimum of ``max ||A x|| s.t. ||x||_2 <= 1, ||x||_0 <= s`` by support enumeration.

    Only supports of size ``min(s, p)`` are scanned: adding a column never
    lowers the best value on a support, so smaller supports are dominated.
    L2 uses the top singular value of ``A_S``; L1 takes
    ``max_y ||A_S.T y||_2`` over all sign vectors y.
    """
    a = _dense(A)
    n, p = a.shape
    variance = variance.upper()
    if p > 14 or (variance == "L1" and n > 14):
        raise EnumerationTooLarge(f"instance {n}x{p} too large for enumeration")
    if not 1 <= s <= p:
        raise ValueError("s must lie in [1, p]")
    k = int(s)
    combos, vals = _support_values(a, k, variance)
    i = int(np.argmax(vals))
    ncomb = len(combos)
    how = "top singular value" if variance == "L2" else f"{2 ** (n - 1)} sign vectors"
    return OracleResult(
        optimum=float(vals[i]),
        argmax_support=combos[i],
        certificate=f"enumerated {ncomb} supports of size {k}; {how} each",
    )


def brute_force_penalized(A, form):
    """Global optimum for the penalized rows on small instances.

    L0 penalties enumerate every support S and take the fixed-support optimum
    minus ``gamma |S|``.  The L1-penalized L1-variance row enumerates sign
    vectors y and evaluates ``||V_gamma(A.T y)||_2``.  The L1-penalized
    L2-variance row cannot be enumerated; it returns a best-found value from
    sampled y directions polished by GPower steps, with ``certified=False``.
    """
    if form.constrained:
        raise ValueError("brute_force_penalized handles penalty rows only")
    a = _dense(A)
    n, p = a.shape
    gamma = form.gamma
    if p > 12 or (form.variance == "L1" and n > 12):
        raise EnumerationTooLarge(f"instance {n}x{p} too large for enumeration")

    if form.sparsity == "L0":
        best, best_support = 0.0, ()
        total = 1
        for k in range(1, p + 1):
            combos, vals = _support_values(a, k, form.variance)
            total += len(combos)
            scores = vals ** 2 - gamma * k
            i = int(np.argmax(scores))
            if scores[i] > best:
                best, best_support = float(scores[i]), combos[i]
        return OracleResult(best, best_support, f"enumerated all {total} supports")

    if form.variance == "L1":
        signs = _sign_matrix(n)
        best, arg = -np.inf, None
        for lo in range(0, signs.shape[0], 4096):
            w = signs[lo:lo + 4096] @ a
            shrunk = np.maximum(np.abs(w) - gamma, 0.0)
            vals = np.sqrt(np.sum(shrunk ** 2, axis=1))
            i = int(np.argmax(vals))
            if vals[i] > best:
                best, arg = float(vals[i]), lo + i
        support = tuple(int(j) for j in np.flatnonzero(np.abs(signs[arg] @ a) > gamma))
        return OracleResult(best, support, f"enumerated {signs.shape[0]} sign vectors")

    # L2 variance, L1 penalty: best-found only
    rng = np.random.default_rng(12345)
    ys = rng.standard_normal((20000, n))
    ys /= np.linalg.norm(ys, axis=1, keepdims=True)
    vals = np.linalg.norm(np.maximum(np.abs(ys @ a) - gamma, 0.0), axis=1)
    top = np.argsort(-vals)[:50]
    best, best_y = float(vals[top[0]]), ys[top[0]]
    for i in top:
        y = ys[i]
        for _ in range(500):
            try:
                y_new = gpower_step(form, a, y)
            except (fm.ZeroLoading, fm.DegenerateIterate):
                break
            if np.allclose(y_new, y, rtol=0, atol=1e-15):
                break
            y = y_new
        val = float(np.linalg.norm(np.maximum(np.abs(a.T @ y) - gamma, 0.0)))
        if val > best:
            best, best_y = val, y
    support = tuple(int(j) for j in np.flatnonzero(np.abs(a.T @ best_y) > gamma))
    return OracleResult(best, support, "best-found: 20000 sampled y directions, top 50 polished by GPower", certified=False)


# ---------------------------------------------------------------------------
# experiment data


def random_uniform_matrix(n, p, seed=0, renormalize=True):
    """Entries uniform on [-1, 1]; optionally rescale columns to norms drawn uniformly from [0, 1]."""
    rng = np.random.default_rng(seed)
    a = rng.uniform(-1.0, 1.0, size=(n, p))
    if renormalize:
        target = rng.uniform(0.0, 1.0, size=p)
        a *= target / np.linalg.norm(a, axis=0)
    return a
