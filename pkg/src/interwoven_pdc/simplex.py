"""Two-phase simplex for ``min c.x`` subject to ``A x = b, x >= 0``, Bland's rule.

Works on float arrays or on object arrays of :class:`fractions.Fraction` (exact
mode, tolerance zero).  Both phases report the simplex multipliers ``y``:
after an infeasible phase 1 they form a Farkas certificate (``y @ A <= 0``
column-wise, ``y @ b > 0``); after phase 2 they are optimal duals.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np


class PrecisionError(ArithmeticError):
    """Float pivoting lost too much accuracy; retry in exact mode."""


class UnboundedError(ArithmeticError):
    """The phase-2 objective is unbounded below."""


@dataclass
class LpResult:
    feasible: bool
    x: np.ndarray
    duals: np.ndarray
    infeasibility: float | Fraction
    iterations: int
    exact: bool
    objective: float | Fraction | None = None


class _Tableau:
    def __init__(self, A, b, tol, exact):
        if exact:
            A = np.array([[Fraction(v) for v in row] for row in np.asarray(A, dtype=object)],
                         dtype=object)
            b = np.array([Fraction(v) for v in np.asarray(b, dtype=object)], dtype=object)
            self.zero, self.one, self.eps, self.floor = Fraction(0), Fraction(1), 0, 0
        else:
            A = np.asarray(A, dtype=float)
            b = np.asarray(b, dtype=float)
            self.zero, self.one, self.eps, self.floor = 0.0, 1.0, tol, 1e-9
        self.exact = exact
        m, n = A.shape
        if b.shape != (m,):
            raise ValueError("b has the wrong shape")
        self.m, self.n = m, n
        self.flip = np.array([-1 if v < 0 else 1 for v in b])
        dtype = object if exact else float
        tab = np.empty((m, n + m + 1), dtype=dtype)
        tab[:, :n] = A * self.flip[:, None]
        tab[:, n:n + m] = np.array([[self.one if i == j else self.zero for j in range(m)]
                                    for i in range(m)], dtype=dtype)
        tab[:, -1] = b * self.flip
        self.tab = tab
        self.basis = list(range(n, n + m))
        self.iterations = 0
        self.max_iter = 50 * (n + m)

    def _negative(self, row):
        if self.exact:
            return np.array([v < -self.eps for v in row], dtype=bool)
        return row < -self.eps

    def pivot(self, r, j):
        tab = self.tab
        tab[r] = tab[r] / tab[r, j]
        factors = tab[:, j].copy()
        factors[r] = self.zero
        if self.exact:
            nz = [i for i in range(self.m) if factors[i] != 0]
            for i in nz:
                f = factors[i]
                tab[i] = np.array([a - f * v for a, v in zip(tab[i], tab[r])], dtype=object)
        else:
            nz = np.flatnonzero(factors)
            if nz.size:
                tab[nz] -= np.outer(factors[nz], tab[r])
        self.basis[r] = j
        self.iterations += 1
        if self.iterations > self.max_iter:
            raise PrecisionError(f"simplex exceeded {self.max_iter} pivots")

    def run(self, cost, allowed: int):
        """Pivot until no column below ``allowed`` has negative reduced cost.

        ``cost`` is the reduced-cost row (length ``n + m + 1``); it is updated
        in place alongside the tableau.
        """
        tab = self.tab
        slack = 0 if self.exact else 1e-15
        while True:
            candidates = np.flatnonzero(self._negative(cost[:allowed]))
            if candidates.size == 0:
                return cost
            j = int(candidates[0])
            col = tab[:, j]
            best = None
            for i in range(self.m):
                if col[i] > self.floor:
                    ratio = tab[i, -1] / col[i]
                    # Bland: minimum ratio, ties broken by the smallest leaving index
                    if best is None or ratio < best[0] - slack or (
                            abs(ratio - best[0]) <= slack and self.basis[i] < best[1]):
                        best = (ratio, self.basis[i], i)
            if best is None:
                raise UnboundedError(f"column {j} has no pivot row")
            r = best[2]
            self.pivot(r, j)
            cost = cost - cost[j] * tab[r]
            if not self.exact:
                tab[np.abs(tab) < 1e-300] = 0.0

    def solution(self):
        x = np.array([self.zero] * (self.n + self.m), dtype=object if self.exact else float)
        for i, var in enumerate(self.basis):
            x[var] = self.tab[i, -1]
        return x

    def multipliers(self, c_basic):
        """``c_B B^-1`` in the original (unflipped) row coordinates."""
        inv = self.tab[:, self.n:self.n + self.m]
        return (c_basic @ inv) * self.flip


def _phase_one(t: _Tableau, tol):
    n, m = t.n, t.m
    cost = -t.tab.sum(axis=0)
    cost[n:n + m] = t.zero
    t.run(cost, n + m)
    x = t.solution()
    infeas = sum(x[n:], t.zero)
    c_b = np.array([t.one if var >= n else t.zero for var in t.basis],
                   dtype=object if t.exact else float)
    y = t.multipliers(c_b)
    if not t.exact and np.any(x < -1e-9):
        raise PrecisionError("negative basic variable after pivoting")
    feasible = infeas == 0 if t.exact else infeas <= tol
    return feasible, x, y, infeas


def phase_one(A, b, tol: float = 1e-11, exact: bool = False) -> LpResult:
    """Feasibility of ``A x = b, x >= 0``."""
    t = _Tableau(A, b, tol, exact)
    feasible, x, y, infeas = _phase_one(t, tol)
    return LpResult(bool(feasible), x[:t.n], y, infeas, t.iterations, exact)


def solve_lp(c, A, b, tol: float = 1e-11, exact: bool = False) -> LpResult:
    """``min c.x`` over ``A x = b, x >= 0``; duals ``y`` satisfy ``y @ A <= c``."""
    t = _Tableau(A, b, tol, exact)
    feasible, x, y, infeas = _phase_one(t, tol)
    if not feasible:
        return LpResult(False, x[:t.n], y, infeas, t.iterations, exact)
    n, m = t.n, t.m
    # drive zero-valued artificials out of the basis where possible
    for r, var in enumerate(list(t.basis)):
        if var >= n:
            row = t.tab[r, :n]
            big = [j for j in range(n) if abs(row[j]) > (0 if exact else 1e-9)]
            if big:
                t.pivot(r, big[0])
    dtype = object if exact else float
    c_full = np.array([t.zero] * (n + m + 1), dtype=dtype)
    c_full[:n] = np.array([Fraction(v) for v in c], dtype=object) if exact else np.asarray(c, float)
    c_b = np.array([c_full[var] for var in t.basis], dtype=dtype)
    cost = c_full - c_b @ t.tab
    # artificials never re-enter
    t.run(cost, n)
    x = t.solution()
    c_b = np.array([c_full[var] for var in t.basis], dtype=dtype)
    y = t.multipliers(c_b)
    objective = c_full[:n] @ x[:n]
    if not exact:
        A = np.asarray(A, dtype=float)
        primal = np.max(np.abs(A @ x[:n] - np.asarray(b, dtype=float)))
        dual = np.max(y @ A - np.asarray(c, dtype=float))
        if primal > 1e3 * tol or x[:n].min() < -1e3 * tol or dual > 1e3 * tol:
            raise PrecisionError(f"phase-2 solution inaccurate (primal {primal:.3g}, "
                                 f"dual {dual:.3g}, min x {x[:n].min():.3g})")
    return LpResult(True, x[:n], y, infeas, t.iterations, exact, objective)
