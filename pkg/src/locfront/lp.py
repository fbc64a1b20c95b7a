"""Dense LP solver for "minimize v.b subject to A b >= y" with free variables.

The fitting problem is small and dense (a handful of polynomial coefficients,
up to a few hundred data constraints), so the solver is a self-contained
two-phase primal simplex on the standard-form transform: free variables are
split into differences of nonnegative ones and each >= row gets a surplus
variable. Rows are oriented so the right-hand side is nonnegative; rows that
then lack a usable surplus column receive a phase-1 artificial. When no
artificials are needed (every rhs entry <= 0, which the estimator arranges by
shifting responses) phase 1 is skipped entirely.

Boundedness of the minimization is equivalent to feasibility of
{g >= 0 : A^T g = v}; ``check_bounded`` decides that with a phase-1
construction of its own and returns the multipliers as a certificate.

Cycling on degenerate instances (collinear data points) is handled by
switching to Bland's rule after a budget of degenerate pivots.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np


class SimplexIterationError(RuntimeError):
    """Pivot limit exceeded; signals numerical trouble, not a problem status."""


@dataclass(frozen=True)
class LpProblem:
    """minimize objective . b   subject to   constraints @ b >= rhs,  b free."""

    objective: np.ndarray
    constraints: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.objective, dtype=float)
        A = np.asarray(self.constraints, dtype=float)
        y = np.asarray(self.rhs, dtype=float)
        if v.ndim != 1 or A.ndim != 2 or y.ndim != 1:
            raise ValueError("objective and rhs must be vectors, constraints a matrix")
        m, p = A.shape
        if m < 1 or p < 1:
            raise ValueError("need at least one constraint and one variable")
        if v.shape[0] != p:
            raise ValueError(f"objective length {v.shape[0]} != {p} columns")
        if y.shape[0] != m:
            raise ValueError(f"rhs length {y.shape[0]} != {m} rows")
        if not (np.isfinite(v).all() and np.isfinite(A).all() and np.isfinite(y).all()):
            raise ValueError("problem data must be finite")
        object.__setattr__(self, "objective", v)
        object.__setattr__(self, "constraints", A)
        object.__setattr__(self, "rhs", y)

    @property
    def shape(self) -> tuple[int, int]:
        return self.constraints.shape


@dataclass(frozen=True)
class Optimal:
    solution: np.ndarray
    objective_value: float


@dataclass(frozen=True)
class Unbounded:
    pass


@dataclass(frozen=True)
class Infeasible:
    pass


LpOutcome = Optimal | Unbounded | Infeasible


@dataclass(frozen=True)
class BoundednessCertificate:
    """Nonnegative multipliers g with A^T g = v (within tolerance)."""

    multipliers: np.ndarray


def _pivot(T: np.ndarray, basis: list[int], r: int, k: int) -> None:
    T[r] /= T[r, k]
    col = T[:, k].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])
    # keep the pivot column an exact unit vector
    T[:, k] = 0.0
    T[r, k] = 1.0
    basis[r] = k


def _run_simplex(
    T: np.ndarray, basis: list[int], tol: float, max_iter: int, bland_after: int
) -> str:
    """Iterate to optimality on a tableau with nonnegative rhs column.

    Returns "optimal" or "unbounded"; raises SimplexIterationError on the
    pivot budget. Dantzig entering rule with a largest-pivot tie-break,
    falling back to Bland's rule once ``bland_after`` degenerate pivots
    accumulate.
    """
    m = T.shape[0] - 1
    n = T.shape[1] - 1
    degenerate = 0
    bland = False
    for _ in range(max_iter):
        costs = T[-1, :n]
        if bland:
            entering = np.nonzero(costs < -tol)[0]
            if entering.size == 0:
                return "optimal"
            k = int(entering[0])
        else:
            k = int(np.argmin(costs))
            if costs[k] >= -tol:
                return "optimal"
        col = T[:m, k]
        positive = col > tol
        if not positive.any():
            return "unbounded"
        ratios = np.full(m, np.inf)
        ratios[positive] = T[:m, n][positive] / col[positive]
        theta = float(ratios.min())
        near = np.nonzero(ratios <= theta + tol * (1.0 + abs(theta)))[0]
        if bland:
            basis_arr = np.asarray(basis)
            r = int(near[np.argmin(basis_arr[near])])
        else:
            r = int(near[np.argmax(col[near])])
        if theta <= tol:
            degenerate += 1
            if degenerate > bland_after:
                bland = True
        else:
            degenerate = 0
        _pivot(T, basis, r, k)
    raise SimplexIterationError(
        f"simplex exceeded {max_iter} pivots on a {m}x{n} tableau"
    )


def _phase1(
    M: np.ndarray,
    rhs: np.ndarray,
    basis_cols: list[int],
    art_rows: np.ndarray,
    tol: float,
    max_iter: int,
    bland_after: int,
) -> tuple[np.ndarray, list[int], float, np.ndarray]:
    """Drive artificial variables on ``art_rows`` to zero.

    Returns (tableau without artificial columns, basis, phase-1 optimum,
    indices of surviving rows). Redundant rows whose artificials cannot be
    pivoted out are dropped.
    """
    m, n_real = M.shape
    n_art = art_rows.size
    T = np.zeros((m + 1, n_real + n_art + 1))
    T[:m, :n_real] = M
    T[np.asarray(art_rows), n_real + np.arange(n_art)] = 1.0
    T[:m, -1] = rhs
    basis = list(basis_cols)
    for slot, i in enumerate(art_rows):
        basis[i] = n_real + slot
    # reduced phase-1 costs: unit cost on artificials, then eliminate basics
    T[-1, n_real : n_real + n_art] = 1.0
    for i in art_rows:
        T[-1] -= T[i]
    status = _run_simplex(T, basis, tol, max_iter, bland_after)
    if status != "optimal":
        # the artificial sum is bounded below by zero; anything else is breakdown
        raise SimplexIterationError(f"phase 1 ended with status {status!r}")
    opt = -float(T[-1, -1])

    keep = np.ones(m, dtype=bool)
    for i in range(m):
        if basis[i] >= n_real:
            # basic artificial at zero: pivot it out or drop the redundant row
            row = T[i, :n_real]
            candidates = np.nonzero(np.abs(row) > tol * 10)[0]
            if candidates.size:
                _pivot(T, basis, i, int(candidates[0]))
            else:
                keep[i] = False
    rows = np.nonzero(keep)[0]
    kept_T = np.zeros((rows.size + 1, n_real + 1))
    kept_T[:-1, :n_real] = T[rows, :n_real]
    kept_T[:-1, -1] = T[rows, -1]
    kept_basis = [basis[i] for i in rows]
    return kept_T, kept_basis, opt, rows


def solve(prob: LpProblem, tol: float = 1e-9, max_iter: int | None = None) -> LpOutcome:
    """Solve the LP, reporting Optimal / Unbounded / Infeasible.

    Parameters
    ----------
    prob : LpProblem
    tol : float
        Internal pivoting and feasibility tolerance.
    max_iter : int, optional
        Pivot budget; exceeding it raises SimplexIterationError rather than
        returning an outcome.
    """
    A = prob.constraints
    v = prob.objective
    y = prob.rhs
    m, p = A.shape
    n_real = 2 * p + m
    if max_iter is None:
        max_iter = 500 + 20 * (m + n_real)
    bland_after = 50 * (m + p)

    # orient rows to nonnegative rhs; flipped rows get a usable +1 surplus
    sign = np.where(y <= 0.0, -1.0, 1.0)
    M = np.zeros((m, n_real))
    M[:, :p] = sign[:, None] * A
    M[:, p : 2 * p] = -M[:, :p]
    M[np.arange(m), 2 * p + np.arange(m)] = -sign
    rhs = sign * y

    art_rows = np.nonzero(sign > 0)[0]
    if art_rows.size:
        # flipped rows keep their surplus as basic; the rest get artificials
        basis_cols = [(2 * p + i) if sign[i] < 0 else -1 for i in range(m)]
        T, basis, p1_opt, _ = _phase1(
            M, rhs, basis_cols, art_rows, tol, max_iter, bland_after
        )
        scale = max(1.0, float(np.abs(y).max()))
        if p1_opt > 100 * tol * scale:
            return Infeasible()
        m_eff = T.shape[0] - 1
    else:
        m_eff = m
        T = np.zeros((m + 1, n_real + 1))
        T[:m, :n_real] = M
        T[:m, -1] = rhs
        basis = [2 * p + i for i in range(m)]

    # phase-2 costs reduced against the current basis
    c = np.zeros(n_real)
    c[:p] = v
    c[p : 2 * p] = -v
    T[-1, :n_real] = c
    T[-1, -1] = 0.0
    for i in range(m_eff):
        cb = c[basis[i]]
        if cb != 0.0:
            T[-1] -= cb * T[i]

    status = _run_simplex(T, basis, tol, max_iter, bland_after)
    if status == "unbounded":
        return Unbounded()
    z = np.zeros(n_real)
    for i in range(m_eff):
        z[basis[i]] = T[i, -1]
    b = z[:p] - z[p : 2 * p]
    return Optimal(solution=b, objective_value=float(v @ b))


def check_bounded(
    prob: LpProblem, tol: float = 1e-9, max_iter: int | None = None
) -> BoundednessCertificate | None:
    """Certificate g >= 0 with A^T g = v, or None when no such g exists.

    Absence of a certificate is equivalent to the minimization being
    unbounded below on a nonempty feasible set.
    """
    A = prob.constraints
    v = prob.objective
    m, p = A.shape
    if max_iter is None:
        max_iter = 500 + 20 * (m + p)
    bland_after = 50 * (m + p)

    sign = np.where(v < 0.0, -1.0, 1.0)
    M = sign[:, None] * A.T
    rhs = sign * v
    art_rows = np.arange(p)
    T, basis, p1_opt, _ = _phase1(
        M, rhs, [-1] * p, art_rows, tol, max_iter, bland_after
    )
    scale = max(1.0, float(np.abs(v).max()))
    if p1_opt > 100 * tol * scale:
        return None
    g = np.zeros(m)
    for i, bj in enumerate(basis):
        if bj < m:
            g[bj] = T[i, -1]
    return BoundednessCertificate(multipliers=g)


def enumerate_vertices_oracle(
    prob: LpProblem, feas_tol: float = 1e-9
) -> list[np.ndarray]:
    """All basic feasible points of {b : A b >= y}, by exhaustion. Test oracle.

    Every subset of p linearly independent rows is intersected and kept if it
    satisfies the remaining constraints. Only intended for small instances
    (p <= 6, m <= 10); larger problems are rejected.
    """
    A = prob.constraints
    y = prob.rhs
    m, p = A.shape
    if p > 6 or m > 10:
        raise ValueError(f"oracle limited to p <= 6, m <= 10, got p={p}, m={m}")
    scale = max(1.0, float(np.abs(y).max()))
    vertices = []
    for rows in itertools.combinations(range(m), p):
        sub = A[list(rows)]
        sv = np.linalg.svd(sub, compute_uv=False)
        if sv[-1] <= 1e-10 * sv[0]:
            continue
        b = np.linalg.solve(sub, y[list(rows)])
        if np.all(A @ b >= y - feas_tol * scale):
            vertices.append(b)
    return vertices
