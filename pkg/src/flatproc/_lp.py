"""Dense primal simplex for small linear programs.

Solves  max c.x  subject to  A x <= b, x >= 0  with b >= 0, so the slack
basis is feasible and no phase-1 is needed.  Pivoting uses Bland's rule,
which cannot cycle.  Degenerate instances can take long pivot paths, so the
tableau is refactorized from the original data at a fixed cadence and the
claimed optimum is re-verified against a fresh factorization before
returning; this keeps the solve bit-reproducible and accurate at the
support sizes the measure metrics use.
"""
from __future__ import annotations

import numpy as np

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-7  # entries below this never pivot (keeps the basis regular)
REFACTOR_EVERY = 120


class SimplexError(RuntimeError):
    pass


def _build_tableau(full: np.ndarray, b: np.ndarray, cost: np.ndarray,
                   basis: np.ndarray) -> np.ndarray:
    """Exact tableau for the given basis, straight from the original data."""
    m = full.shape[0]
    bmat = full[:, basis]
    body = np.linalg.solve(bmat, full)
    rhs = np.linalg.solve(bmat, b)
    y = np.linalg.solve(bmat.T, cost[basis])
    tab = np.zeros((m + 1, full.shape[1] + 1))
    tab[:m, :-1] = body
    tab[:m, -1] = rhs
    tab[m, :-1] = y @ full - cost
    tab[m, -1] = y @ b
    return tab


def linprog_max(c: np.ndarray, a_ub: np.ndarray, b_ub: np.ndarray,
                max_iter: int = 200_000) -> tuple[np.ndarray, float]:
    """Maximize c.x over {x >= 0 : A x <= b} with b >= 0.

    Returns (x, value).  Raises SimplexError on unboundedness or when the
    iteration cap is hit.
    """
    c = np.asarray(c, dtype=float)
    a = np.asarray(a_ub, dtype=float)
    b = np.asarray(b_ub, dtype=float)
    m, n = a.shape
    if b.shape != (m,) or c.shape != (n,):
        raise ValueError("inconsistent LP dimensions")
    if np.any(b < -FEAS_TOL):
        raise ValueError("this solver requires b >= 0 (slack basis feasible)")

    full = np.hstack([a, np.eye(m)])
    cost = np.concatenate([c, np.zeros(m)])
    rhs = np.maximum(b, 0.0)
    basis = np.arange(n, n + m)
    tab = _build_tableau(full, rhs, cost, basis)

    iterations = 0
    since_refactor = 0
    while iterations < max_iter:
        red = tab[m, :-1]
        candidates = np.nonzero(red < -FEAS_TOL)[0]
        if candidates.size == 0:
            # re-verify on a fresh factorization; continue if round-off hid
            # a profitable column
            tab = _build_tableau(full, rhs, cost, basis)
            since_refactor = 0
            if np.all(tab[m, :-1] >= -FEAS_TOL):
                break
            continue
        col = int(candidates[0])  # Bland: smallest index enters
        ratios = np.full(m, np.inf)
        positive = tab[:m, col] > PIVOT_TOL
        if not np.any(positive):
            if np.all(tab[:m, col] <= FEAS_TOL):
                raise SimplexError("unbounded linear program")
            positive = tab[:m, col] > FEAS_TOL
        ratios[positive] = tab[:m, -1][positive] / tab[:m, col][positive]
        best = np.min(ratios)
        ties = np.nonzero(ratios <= best + FEAS_TOL * (1.0 + abs(best)))[0]
        row = int(ties[np.argmin(basis[ties])])  # Bland: smallest basic leaves
        pivot = tab[row, col]
        tab[row, :] /= pivot
        for r in range(m + 1):
            if r != row and tab[r, col] != 0.0:
                tab[r, :] -= tab[r, col] * tab[row, :]
        basis[row] = col
        iterations += 1
        since_refactor += 1
        if since_refactor >= REFACTOR_EVERY:
            tab = _build_tableau(full, rhs, cost, basis)
            since_refactor = 0
    else:
        raise SimplexError("simplex iteration cap exceeded")

    x = np.zeros(n + m)
    x[basis] = tab[:m, -1]
    return x[:n], float(tab[m, -1])
