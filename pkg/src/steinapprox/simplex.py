"""Dense two-phase primal simplex.

Solves ``min c.x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq`` and
``0 <= x <= upper``. Dantzig pricing, switching to Bland's rule after a
run of degenerate pivots so the method cannot cycle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["LpResult", "linprog"]


@dataclass
class LpResult:
    status: str  # optimal | infeasible | unbounded | iteration_limit
    x: np.ndarray | None
    objective: float
    iterations: int


def _pivot(T: np.ndarray, basis: np.ndarray, r: int, col: int) -> None:
    T[r] /= T[r, col]
    f = T[:, col].copy()
    f[r] = 0.0
    nz = np.flatnonzero(np.abs(f) > 0)
    if nz.size:
        T[nz] -= np.outer(f[nz], T[r])
    basis[r] = col


def _run(T, basis, ncols, tol, max_iter, it0):
    """Minimise the objective in the last row over columns ``< ncols``."""
    m = T.shape[0] - 1
    it = it0
    degenerate = 0
    bland = False
    while True:
        if it >= max_iter:
            return "iteration_limit", it
        d = T[-1, :ncols]
        if bland:
            cand = np.flatnonzero(d < -tol)
            if cand.size == 0:
                return "optimal", it
            col = int(cand[0])
        else:
            col = int(np.argmin(d))
            if d[col] >= -tol:
                return "optimal", it
        a = T[:m, col]
        rows = np.flatnonzero(a > tol)
        if rows.size == 0:
            return "unbounded", it
        ratios = T[rows, -1] / a[rows]
        best = ratios.min()
        ties = rows[ratios <= best + tol]
        r = int(ties[np.argmin(basis[ties])])
        degenerate = degenerate + 1 if best <= tol else 0
        if degenerate > 50:
            bland = True
        _pivot(T, basis, r, col)
        it += 1


def linprog(
    c,
    A_ub=None,
    b_ub=None,
    A_eq=None,
    b_eq=None,
    upper=None,
    tol: float = 1e-9,
    max_iter: int = 100_000,
) -> LpResult:
    c = np.asarray(c, dtype=float)
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float).reshape(-1, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, n)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)
    if upper is not None:
        upper = np.broadcast_to(np.asarray(upper, dtype=float), (n,))
        fin = np.flatnonzero(np.isfinite(upper))
        A_ub = np.vstack([A_ub, np.eye(n)[fin]])
        b_ub = np.concatenate([b_ub, upper[fin]])

    mu, me = A_ub.shape[0], A_eq.shape[0]
    m = mu + me
    # columns: x | slacks | artificials
    A = np.zeros((m, n + mu))
    A[:mu, :n] = A_ub
    A[:mu, n:] = np.eye(mu)
    A[mu:, :n] = A_eq
    b = np.concatenate([b_ub, b_eq])
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1

    # rows whose slack is a valid starting basis need no artificial
    need_art = [i for i in range(m) if i >= mu or neg[i]]
    na = len(need_art)
    ncol = n + mu + na
    T = np.zeros((m + 1, ncol + 1))
    T[:m, : n + mu] = A
    T[:m, -1] = b
    basis = np.empty(m, dtype=np.int64)
    for i in range(mu):
        basis[i] = n + i
    for j, i in enumerate(need_art):
        T[i, n + mu + j] = 1.0
        basis[i] = n + mu + j

    it = 0
    if na:
        T[-1, :] = 0.0
        for i in need_art:
            T[-1, :] -= T[i, :]
        for j in range(na):
            T[-1, n + mu + j] = 0.0
        status, it = _run(T, basis, ncol, tol, max_iter, it)
        if status == "iteration_limit":
            return LpResult(status, None, np.nan, it)
        if -T[-1, -1] > tol * max(1.0, np.abs(b).max(initial=0.0)) * 10:
            return LpResult("infeasible", None, np.nan, it)
        # drive remaining artificials out of the basis
        keep = np.ones(m, dtype=bool)
        for r in range(m):
            if basis[r] >= n + mu:
                row = T[r, : n + mu]
                cand = np.flatnonzero(np.abs(row) > tol)
                if cand.size:
                    _pivot(T, basis, r, int(cand[0]))
                else:
                    keep[r] = False
        rows = np.concatenate([np.flatnonzero(keep), [m]])
        T = np.delete(T[rows], np.s_[n + mu : ncol], axis=1)
        basis = basis[keep]
        m = basis.size
        ncol = n + mu

    cost = np.zeros(ncol)
    cost[:n] = c
    T[-1, :] = 0.0
    T[-1, :ncol] = cost
    for r in range(m):
        cb = cost[basis[r]]
        if cb != 0.0:
            T[-1, :] -= cb * T[r, :]
    status, it = _run(T, basis, ncol, tol, max_iter, it)
    if status != "optimal":
        return LpResult(status, None, np.nan, it)
    x = np.zeros(ncol)
    x[basis] = T[:m, -1]
    x = x[:n]
    x[np.abs(x) < tol] = 0.0
    return LpResult("optimal", x, float(c @ x), it)
