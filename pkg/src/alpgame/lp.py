"""Exact rational linear programming.

A two-phase revised simplex over :class:`fractions.Fraction` with
Bland's anti-cycling rule, plus a Gaussian-elimination solver for square
systems.  Problem sizes here are tiny (a handful of rows, at most a few
thousand columns), so a dense basis inverse is plenty.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ZERO = Fraction(0)


class SolverInvariantError(RuntimeError):
    """An internal consistency check failed; this is a bug, not bad input."""


@dataclass
class LPResult:
    status: str
    x: list[Fraction] = field(default_factory=list)
    value: Fraction | None = None
    # dual prices for the equality rows as given (zero for dropped redundant rows)
    dual: list[Fraction] = field(default_factory=list)
    basis: list[int] = field(default_factory=list)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def solve_linear(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> list[Fraction] | None:
    """Solve the square system ``A x = b`` exactly; ``None`` when singular."""
    n = len(A)
    M = [[Fraction(v) for v in row] + [Fraction(rhs)] for row, rhs in zip(A, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        p = M[col][col]
        M[col] = [v / p for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * c for a, c in zip(M[r], M[col])]
    return [M[r][n] for r in range(n)]


class _Revised:
    """Revised simplex state: basis, its inverse and the basic values.

    Columns are priced lazily against the current duals, so a pass stops at
    the first improving column under Bland's rule.  With a handful of rows
    this is far cheaper than updating a full tableau.
    """

    def __init__(self, cols: list[list[Fraction]], b: list[Fraction], basis: list[int]):
        self.cols = cols
        self.m = len(b)
        self.basis = basis
        self.Binv = [[Fraction(int(i == k)) for k in range(self.m)] for i in range(self.m)]
        self.xB = list(b)

    def duals(self, cost: Sequence[Fraction]) -> list[Fraction]:
        m = self.m
        cB = [cost[j] for j in self.basis]
        return [sum((cB[i] * self.Binv[i][k] for i in range(m) if cB[i]), ZERO) for k in range(m)]

    def direction(self, j: int) -> list[Fraction]:
        col = self.cols[j]
        nz = [k for k in range(self.m) if col[k]]
        return [sum((self.Binv[i][k] * col[k] for k in nz), ZERO) for i in range(self.m)]

    def pivot(self, row: int, j: int, d: list[Fraction]) -> None:
        Binv, xB = self.Binv, self.xB
        p = d[row]
        Binv[row] = [v / p for v in Binv[row]]
        xB[row] = xB[row] / p
        for i in range(self.m):
            if i != row and d[i]:
                f = d[i]
                Binv[i] = [a - f * r for a, r in zip(Binv[i], Binv[row])]
                xB[i] -= f * xB[row]
        self.basis[row] = j

    def run(self, cost: Sequence[Fraction], allowed: int) -> str:
        """Iterate over entering columns ``0 .. allowed - 1`` until optimal."""
        while True:
            y = self.duals(cost)
            in_basis = set(self.basis)
            entering = None
            for j in range(allowed):
                if j in in_basis:
                    continue
                col = self.cols[j]
                if cost[j] - sum((y[k] * col[k] for k in range(self.m) if col[k] and y[k]), ZERO) > 0:
                    entering = j
                    break
            if entering is None:
                return OPTIMAL
            d = self.direction(entering)
            best = None
            for i in range(self.m):
                if d[i] > 0:
                    key = (self.xB[i] / d[i], self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return UNBOUNDED
            self.pivot(best[1], entering, d)


def simplex(
    c: Sequence[Fraction],
    A_eq: Sequence[Sequence[Fraction]],
    b_eq: Sequence[Fraction],
) -> LPResult:
    """Maximize ``c x`` subject to ``A_eq x = b_eq`` and ``x >= 0``, exactly.

    Phase one drives artificial variables to zero; an artificial that stays
    basic at level zero marks a redundant row and gets a zero dual price.
    """
    m = len(A_eq)
    n = len(c)
    c = [Fraction(v) for v in c]
    if m == 0:
        if any(v > 0 for v in c):
            return LPResult(UNBOUNDED)
        return LPResult(OPTIMAL, [ZERO] * n, ZERO, [], [])

    signs = [-1 if Fraction(rhs) < 0 else 1 for rhs in b_eq]
    b = [Fraction(rhs) * s for rhs, s in zip(b_eq, signs)]
    cols = [[Fraction(A_eq[i][j]) * signs[i] for i in range(m)] for j in range(n)]
    cols += [[Fraction(int(i == k)) for i in range(m)] for k in range(m)]
    rs = _Revised(cols, b, [n + i for i in range(m)])

    rs.run([ZERO] * n + [Fraction(-1)] * m, allowed=n)
    if any(rs.xB[i] != 0 for i in range(m) if rs.basis[i] >= n):
        return LPResult(INFEASIBLE)
    for i in range(m):
        if rs.basis[i] >= n:
            in_basis = set(rs.basis)
            for j in range(n):
                if j not in in_basis:
                    d = rs.direction(j)
                    if d[i] != 0:
                        rs.pivot(i, j, d)
                        break

    cost = c + [ZERO] * m
    if rs.run(cost, allowed=n) == UNBOUNDED:
        return LPResult(UNBOUNDED)

    x = [ZERO] * n
    for i, j in enumerate(rs.basis):
        if j < n:
            x[j] = rs.xB[i]
    value = sum((c[j] * x[j] for j in range(n) if x[j]), ZERO)
    dual = [yk * s for yk, s in zip(rs.duals(cost), signs)]
    return LPResult(OPTIMAL, x, value, dual, list(rs.basis))


def maximize(
    c: Sequence[Fraction],
    A_ub: Sequence[Sequence[Fraction]] = (),
    b_ub: Sequence[Fraction] = (),
    A_eq: Sequence[Sequence[Fraction]] = (),
    b_eq: Sequence[Fraction] = (),
) -> LPResult:
    """Maximize ``c x`` with ``A_ub x <= b_ub``, ``A_eq x = b_eq``, ``x >= 0``.

    Slack variables are appended internally; the returned ``x`` holds only
    the original variables.
    """
    n = len(c)
    k = len(A_ub)
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    for i, (row, bi) in enumerate(zip(A_ub, b_ub)):
        slack = [Fraction(0)] * k
        slack[i] = Fraction(1)
        rows.append([Fraction(v) for v in row] + slack)
        rhs.append(Fraction(bi))
    for row, bi in zip(A_eq, b_eq):
        rows.append([Fraction(v) for v in row] + [Fraction(0)] * k)
        rhs.append(Fraction(bi))
    res = simplex(list(c) + [Fraction(0)] * k, rows, rhs)
    if res.optimal:
        res.x = res.x[:n]
    return res
