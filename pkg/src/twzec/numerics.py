"""Shared numeric kernels: simplex projection, projected gradient ascent,
LP/SDP wrappers, and eigenvalue helpers.

Every randomized routine in this package draws from ``numpy.random.default_rng``
with an explicit seed (default 0) so repeated runs produce identical output.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

DEFAULT_SEED = 0

_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53)


def project_simplex(v):
    """Euclidean projection of a real vector onto the probability simplex.

    Sorted cumulative-sum rule: with entries sorted decreasingly, find the
    largest k such that u_k - (sum of top k - 1)/k > 0, then shift and clip.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("expected a nonempty 1-d vector")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ks = np.arange(1, v.size + 1)
    k = int(np.nonzero(u - css / ks > 0)[0][-1]) + 1
    tau = css[k - 1] / k
    return np.maximum(v - tau, 0.0)


def project_simplex_rows(m):
    """Row-wise :func:`project_simplex` for a 2-d array."""
    m = np.asarray(m, dtype=float)
    u = np.sort(m, axis=1)[:, ::-1]
    css = np.cumsum(u, axis=1) - 1.0
    ks = np.arange(1, m.shape[1] + 1)
    # the index set where the condition holds is always a prefix
    k = np.maximum((u - css / ks > 0).sum(axis=1), 1)
    tau = css[np.arange(m.shape[0]), k - 1] / k
    return np.maximum(m - tau[:, None], 0.0)


@dataclass
class SimplexMax:
    point: np.ndarray
    value: float
    residual: float
    iterations: int


def maximize_concave_on_simplex(f, grad, start, tol=1e-9, max_iter=5000):
    """Projected gradient ascent with backtracking on the probability simplex.

    Parameters
    ----------
    f, grad : callables
        Objective value and gradient at a simplex point.
    start : array_like
        Initial point; projected onto the simplex before use.
    tol : float
        Stop when the unit-step gradient mapping residual
        ``||P(x + g) - x||_inf`` falls below this.

    Returns
    -------
    SimplexMax
        Final point, value, residual, and iteration count.
    """
    def gmap_residual(pt, g=None):
        if g is None:
            g = np.asarray(grad(pt), dtype=float)
        return float(np.max(np.abs(project_simplex(pt + g) - pt)))

    x = project_simplex(start)
    fx = f(x)
    step = 1.0
    good_step = 0.25
    it = 0
    for it in range(1, max_iter + 1):
        g = np.asarray(grad(x), dtype=float)
        residual = gmap_residual(x, g)
        if residual <= tol:
            break
        step = min(step * 2.0, 1e6)
        accepted = False
        while step > 1e-16:
            y = project_simplex(x + step * g)
            fy = f(y)
            if fy >= fx + 1e-4 * float(g.dot(y - x)):
                accepted = True
                good_step = step
                break
            step *= 0.5
        if accepted and fy - fx <= 1e-13 * (1.0 + abs(fx)):
            # progress is below float resolution of f
            accepted = False
            x, fx = y, fy
        if not accepted:
            # float plateau: objective increments fall below machine noise
            # long before the gradient-mapping residual reaches tol, so
            # finish with small fixed steps driving the residual directly
            # (safe for concave objectives at this scale).
            s = good_step
            while s > 1e-12 and residual > tol:
                y = project_simplex(x + s * np.asarray(grad(x), dtype=float))
                ry = gmap_residual(y)
                if ry < residual:
                    x, residual = y, ry
                else:
                    s *= 0.5
            fx = f(x)
            break
        x, fx = y, fy
    residual = gmap_residual(x)
    return SimplexMax(point=x, value=fx, residual=residual, iterations=it)


def simplex_start_pool(dim, count, seed=DEFAULT_SEED):
    """Deterministic pool of starting points on the ``dim``-simplex.

    First the uniform point, then a Kronecker low-discrepancy sequence pushed
    through an exponential-spacing map, then Dirichlet(1) draws from the
    seeded generator.  Always returns exactly ``count`` rows.
    """
    if dim < 1 or count < 1:
        raise ValueError("dim and count must be positive")
    pts = [np.full(dim, 1.0 / dim)]
    alphas = np.sqrt(np.asarray(_PRIMES[:dim], dtype=float))
    k = 1
    while len(pts) < max(1, count // 2):
        u = np.mod(k * alphas, 1.0)
        e = -np.log1p(-np.clip(u, 0.0, 1.0 - 1e-12))
        pts.append(e / e.sum())
        k += 1
    rng = np.random.default_rng(seed)
    while len(pts) < count:
        pts.append(rng.dirichlet(np.ones(dim)))
    return np.asarray(pts[:count])


@dataclass
class LpProblem:
    """Minimize ``c @ x`` subject to ``a_ub @ x <= b_ub``, ``a_eq @ x == b_eq``,
    and elementwise bounds (default ``x >= 0``)."""

    c: np.ndarray
    a_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    a_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    bounds: tuple = (0, None)


@dataclass
class LpSolution:
    value: float
    primal: np.ndarray
    dual_ub: np.ndarray
    dual_eq: np.ndarray
    gap: float


def solve_lp(problem, gap_tol=1e-8):
    """Solve an LP with HiGHS and report the primal-dual objective gap."""
    from scipy.optimize import linprog

    res = linprog(
        c=np.asarray(problem.c, dtype=float),
        A_ub=problem.a_ub,
        b_ub=problem.b_ub,
        A_eq=problem.a_eq,
        b_eq=problem.b_eq,
        bounds=problem.bounds,
        method="highs",
    )
    if not res.success:
        raise RuntimeError(f"LP solve failed: {res.message}")
    dual_ub = -res.ineqlin.marginals if problem.a_ub is not None else np.zeros(0)
    dual_eq = res.eqlin.marginals if problem.a_eq is not None else np.zeros(0)
    dual_obj = 0.0
    if problem.b_ub is not None:
        dual_obj += float(np.dot(-dual_ub, np.asarray(problem.b_ub, dtype=float)))
    if problem.b_eq is not None:
        dual_obj += float(np.dot(dual_eq, np.asarray(problem.b_eq, dtype=float)))
    # contributions of finite variable bounds
    lo, hi = problem.bounds if isinstance(problem.bounds, tuple) else (None, None)
    if isinstance(problem.bounds, tuple):
        low = np.full(res.x.size, 0.0 if lo is None else float(lo))
        if lo is not None and lo != 0:
            dual_obj += float(np.dot(res.lower.marginals, low))
        if hi is not None:
            dual_obj += float(np.dot(res.upper.marginals, np.full(res.x.size, float(hi))))
    gap = abs(float(res.fun) - dual_obj)
    if gap > gap_tol:
        raise RuntimeError(f"LP duality gap {gap:.3e} exceeds {gap_tol:.1e}")
    return LpSolution(
        value=float(res.fun),
        primal=np.asarray(res.x, dtype=float),
        dual_ub=dual_ub,
        dual_eq=dual_eq,
        gap=gap,
    )


def solve_lp_exact(c, a_ub=None, b_ub=None, a_eq=None, b_eq=None):
    """Two-phase primal simplex over exact rationals with Bland's rule.

    Minimizes ``c @ x`` subject to ``a_ub @ x <= b_ub``, ``a_eq @ x == b_eq``,
    ``x >= 0``.  Every coefficient is handled as a ``Fraction``.  Intended for
    the small certified problems (tens of variables); returns
    ``(value, x)`` as Fractions.
    """
    c = [Fraction(v) for v in c]
    rows = []
    kinds = []
    if a_ub is not None:
        for row, b in zip(a_ub, b_ub):
            rows.append(([Fraction(v) for v in row], Fraction(b)))
            kinds.append("ub")
    if a_eq is not None:
        for row, b in zip(a_eq, b_eq):
            rows.append(([Fraction(v) for v in row], Fraction(b)))
            kinds.append("eq")
    n = len(c)
    m = len(rows)
    if m == 0:
        raise ValueError("LP needs at least one constraint")

    # normalize to b >= 0, add slacks for ub rows, artificials where needed
    ncols = n
    slack_col = {}
    for i, kind in enumerate(kinds):
        if kind == "ub":
            slack_col[i] = ncols
            ncols += 1
    art_col = {}
    tableau = []
    basis = []
    for i, ((row, b), kind) in enumerate(zip(rows, kinds)):
        sign = Fraction(1)
        if b < 0:
            sign = Fraction(-1)
            row = [-v for v in row]
            b = -b
        full = row + [Fraction(0)] * (ncols - n)
        if kind == "ub":
            full[slack_col[i]] = sign
        needs_art = kind == "eq" or sign < 0
        tableau.append((full, b))
        basis.append(slack_col[i] if (kind == "ub" and sign > 0) else None)
        if needs_art:
            art_col[i] = None  # assign below
    total = ncols + len(art_col)
    grid = []
    rhs = []
    next_art = ncols
    for i, (full, b) in enumerate(tableau):
        ext = full + [Fraction(0)] * (total - ncols)
        if i in art_col:
            art_col[i] = next_art
            ext[next_art] = Fraction(1)
            basis[i] = next_art
            next_art += 1
        grid.append(ext)
        rhs.append(b)

    def pivot(grid, rhs, obj, obj_val, r, col):
        piv = grid[r][col]
        grid[r] = [v / piv for v in grid[r]]
        rhs[r] /= piv
        for i in range(len(grid)):
            if i != r and grid[i][col] != 0:
                factor = grid[i][col]
                grid[i] = [a - factor * b for a, b in zip(grid[i], grid[r])]
                rhs[i] -= factor * rhs[r]
        if obj[col] != 0:
            factor = obj[col]
            for j in range(len(obj)):
                obj[j] -= factor * grid[r][j]
            obj_val[0] -= factor * rhs[r]

    def run_simplex(grid, rhs, obj, obj_val, basis):
        while True:
            col = next((j for j, v in enumerate(obj) if v < 0), None)
            if col is None:
                return
            ratios = [
                (rhs[i] / grid[i][col], basis[i], i)
                for i in range(len(grid))
                if grid[i][col] > 0
            ]
            if not ratios:
                raise RuntimeError("LP is unbounded")
            _, _, r = min(ratios, key=lambda t: (t[0], t[1]))
            pivot(grid, rhs, obj, obj_val, r, col)
            basis[r] = col

    if art_col:
        phase1 = [Fraction(0)] * total
        for i in art_col.values():
            phase1[i] = Fraction(1)
        obj_val = [Fraction(0)]
        for i, b in enumerate(basis):
            if b in art_col.values():
                phase1 = [a - g for a, g in zip(phase1, grid[i])]
                obj_val[0] -= rhs[i]
        run_simplex(grid, rhs, phase1, obj_val, basis)
        if -obj_val[0] != 0:
            raise RuntimeError("LP is infeasible")

    obj = c + [Fraction(0)] * (total - n)
    obj_val = [Fraction(0)]
    for i, b in enumerate(basis):
        if obj[b] != 0:
            factor = obj[b]
            obj = [a - factor * g for a, g in zip(obj, grid[i])]
            obj_val[0] -= factor * rhs[i]
    # forbid re-entering artificial columns
    for j in art_col.values():
        obj[j] = Fraction(10**9)
    run_simplex(grid, rhs, obj, obj_val, basis)
    x = [Fraction(0)] * n
    for i, b in enumerate(basis):
        if b < n:
            x[b] = rhs[i]
    value = sum(ci * xi for ci, xi in zip(c, x))
    return value, x


@dataclass
class SdpProblem:
    """Maximize ``<objective, X>`` over symmetric PSD ``X`` subject to
    ``<a, X> == b`` for each pair in ``eq_constraints`` and ``X[i, j] == 0``
    for each index pair in ``zero_entries``."""

    objective: np.ndarray
    eq_constraints: list = field(default_factory=list)
    zero_entries: list = field(default_factory=list)


@dataclass
class SdpSolution:
    value: float
    matrix: np.ndarray
    residuals: dict


def solve_sdp(problem, gap_tol=1e-7):
    """Solve a small SDP with cvxpy/Clarabel and validate the residuals."""
    import cvxpy as cp

    c = np.asarray(problem.objective, dtype=float)
    n = c.shape[0]
    x = cp.Variable((n, n), symmetric=True)
    cons = [x >> 0]
    for a, b in problem.eq_constraints:
        cons.append(cp.sum(cp.multiply(np.asarray(a, dtype=float), x)) == float(b))
    for i, j in problem.zero_entries:
        cons.append(x[i, j] == 0)
        if i != j:
            cons.append(x[j, i] == 0)
    prob = cp.Problem(cp.Maximize(cp.sum(cp.multiply(c, x))), cons)
    with warnings.catch_warnings():
        # near-degenerate branches report "inaccurate"; the residual block
        # below is the actual accuracy gate
        warnings.simplefilter("ignore")
        prob.solve(
            solver=cp.CLARABEL,
            tol_gap_abs=1e-11,
            tol_gap_rel=1e-11,
            tol_feas=1e-11,
        )
    if prob.status not in ("optimal", "optimal_inaccurate"):
        raise RuntimeError(f"SDP solve failed with status {prob.status}")
    mat = np.asarray(x.value, dtype=float)
    mat = 0.5 * (mat + mat.T)
    eq_viol = 0.0
    for a, b in problem.eq_constraints:
        eq_viol = max(eq_viol, abs(float(np.sum(np.asarray(a) * mat)) - float(b)))
    zero_viol = 0.0
    for i, j in problem.zero_entries:
        zero_viol = max(zero_viol, abs(mat[i, j]), abs(mat[j, i]))
    residuals = {
        "status": prob.status,
        "min_eigenvalue": min_eigenvalue(mat),
        "eq_violation": eq_viol,
        "zero_violation": zero_viol,
    }
    if prob.status != "optimal" and eq_viol > gap_tol:
        raise RuntimeError(f"SDP residuals too large: {residuals}")
    return SdpSolution(value=float(prob.value), matrix=mat, residuals=residuals)


def min_eigenvalue(a):
    """Smallest eigenvalue of a symmetric matrix (via ``eigvalsh``)."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.allclose(a, a.T, atol=1e-8):
        raise ValueError("matrix is not symmetric")
    return float(np.linalg.eigvalsh(0.5 * (a + a.T))[0])
