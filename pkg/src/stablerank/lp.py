"""Exact rational linear programming with primal-dual certificates.

Problems are minimizations of ``c . x`` subject to ``A x >= b`` and
``x >= 0`` with rational data.  The solver is a two-phase primal simplex on
the standard-form tableau with Bland's anti-cycling rule, so every run
terminates and an optimal run yields an exactly optimal basis.  The dual
vector is read off the optimal basis, giving a certificate with
``c . x == b . y`` as an identity of rationals, no tolerances anywhere.

The public API speaks ``fractions.Fraction``; the pivot loop uses
``gmpy2.mpq`` when available (several times faster on big numerators).
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction

try:
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    _Q = Fraction

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_ROW_CAP_ENV = "STABLERANK_MAX_LP_ROWS"


class LPSizeError(RuntimeError):
    """Raised when an LP exceeds the configured row cap."""


SparseRow = tuple[tuple[int, Fraction], ...]


def _as_fraction(v) -> Fraction:
    # plain-int internals: Fraction(mpq) would keep mpz fields around
    return Fraction(int(v.numerator), int(v.denominator))


def _canonical_row(row, num_vars: int) -> SparseRow:
    acc: dict[int, Fraction] = {}
    for col, coeff in row:
        col = int(col)
        if not 0 <= col < num_vars:
            raise ValueError(f"column {col} out of range for {num_vars} variables")
        c = Fraction(coeff)
        if c:
            acc[col] = acc.get(col, Fraction(0)) + c
    return tuple(sorted((j, c) for j, c in acc.items() if c))


@dataclass(frozen=True)
class LinearProgram:
    """Minimize ``objective . x`` subject to ``rows @ x >= rhs`` and ``x >= 0``.

    Constraint rows are sparse ``(column, coefficient)`` tuples.
    """

    objective: tuple[Fraction, ...]
    rows: tuple[SparseRow, ...]
    rhs: tuple[Fraction, ...]

    def __init__(self, objective, rows, rhs):
        obj = tuple(Fraction(c) for c in objective)
        rhs_t = tuple(Fraction(b) for b in rhs)
        rows_t = tuple(_canonical_row(r, len(obj)) for r in rows)
        if len(rows_t) != len(rhs_t):
            raise ValueError("row count does not match rhs length")
        object.__setattr__(self, "objective", obj)
        object.__setattr__(self, "rows", rows_t)
        object.__setattr__(self, "rhs", rhs_t)

    @property
    def num_vars(self) -> int:
        return len(self.objective)

    @property
    def num_rows(self) -> int:
        return len(self.rhs)

    @staticmethod
    def from_dense(objective, matrix, rhs) -> "LinearProgram":
        rows = [
            [(j, a) for j, a in enumerate(row) if a]
            for row in matrix
        ]
        return LinearProgram(objective, rows, rhs)


@dataclass(frozen=True)
class LPSolution:
    """Outcome of a solve; for status "optimal" the pair (x, y) is a
    primal-dual optimal pair satisfying strong duality exactly."""

    status: str
    value: Fraction | None
    x: tuple[Fraction, ...]
    y: tuple[Fraction, ...]

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "value": None if self.value is None else str(self.value),
            "x": [str(v) for v in self.x],
            "y": [str(v) for v in self.y],
        }


def _row_cap() -> int | None:
    raw = os.environ.get(_ROW_CAP_ENV)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise LPSizeError(f"{_ROW_CAP_ENV} must be an integer, got {raw!r}")


def _run_simplex(objective, rows, rhs):
    """Two-phase primal simplex with Bland's rule.

    Returns ``(status, x, y)`` over the internal rational type.  ``y`` is the
    dual vector for the original inequality rows, read from the bookkeeping
    columns of the optimal tableau.
    """
    n = len(objective)
    m = len(rhs)
    zero = _Q(0)
    one = _Q(1)
    width = n + 2 * m  # structural | surplus | per-row bookkeeping
    enter_limit = n + m  # bookkeeping columns never enter

    tab: list[list] = []
    b: list = []
    sigma: list[int] = []
    for i in range(m):
        row = [zero] * width
        for j, a in rows[i]:
            row[j] = _Q(a)
        row[n + i] = -one
        bi = _Q(rhs[i])
        if bi < 0:
            row = [-v for v in row]
            bi = -bi
            sigma.append(-1)
        else:
            sigma.append(1)
        row[n + m + i] = one  # identity after the sign flip
        tab.append(row)
        b.append(bi)

    basis: list[int] = []
    art_rows: list[int] = []
    for i in range(m):
        if sigma[i] == -1:
            basis.append(n + i)  # flipped surplus column is +e_i
        else:
            basis.append(n + m + i)
            art_rows.append(i)

    def pivot(i_out: int, j_in: int, cost: list) -> None:
        row = tab[i_out]
        inv = one / row[j_in]
        for j in range(width):
            if row[j]:
                row[j] *= inv
        b[i_out] *= inv
        for i in range(len(tab)):
            if i == i_out:
                continue
            f = tab[i][j_in]
            if f:
                ri = tab[i]
                for j in range(width):
                    rj = row[j]
                    if rj:
                        ri[j] -= f * rj
                b[i] -= f * b[i_out]
        f = cost[j_in]
        if f:
            for j in range(width):
                rj = row[j]
                if rj:
                    cost[j] -= f * rj
        basis[i_out] = j_in

    def bland(cost: list) -> str:
        while True:
            j_in = -1
            for j in range(enter_limit):
                if cost[j] < 0:
                    j_in = j
                    break
            if j_in < 0:
                return OPTIMAL
            i_out = -1
            best = None
            for i in range(len(tab)):
                a = tab[i][j_in]
                if a > 0:
                    ratio = b[i] / a
                    if (
                        best is None
                        or ratio < best
                        or (ratio == best and basis[i] < basis[i_out])
                    ):
                        best = ratio
                        i_out = i
            if i_out < 0:
                return UNBOUNDED
            pivot(i_out, j_in, cost)

    if art_rows:
        # Phase I: minimize the sum of the artificial starting variables.
        cost = [zero] * width
        for i in art_rows:
            ri = tab[i]
            for j in range(width):
                if ri[j]:
                    cost[j] -= ri[j]
        status = bland(cost)
        if status != OPTIMAL:  # pragma: no cover - phase I is bounded below
            raise AssertionError("phase I cannot be unbounded")
        total = sum((b[i] for i in range(len(tab)) if basis[i] >= n + m), zero)
        if total > 0:
            return INFEASIBLE, [], []
        # Drive leftover zero-level artificials out; drop redundant rows.
        for i in reversed(range(len(tab))):
            if basis[i] < n + m:
                continue
            j_in = next((j for j in range(enter_limit) if tab[i][j]), -1)
            if j_in >= 0:
                pivot(i, j_in, cost)
            else:
                del tab[i], b[i], basis[i]

    # Phase II on the original objective.
    cost = [zero] * width
    for j in range(n):
        cost[j] = _Q(objective[j])
    for i in range(len(tab)):
        cb = _Q(objective[basis[i]]) if basis[i] < n else zero
        if cb:
            ri = tab[i]
            for j in range(width):
                if ri[j]:
                    cost[j] -= cb * ri[j]
    status = bland(cost)
    if status != OPTIMAL:
        return status, [], []

    x = [zero] * n
    for i in range(len(tab)):
        if basis[i] < n:
            x[basis[i]] = b[i]
    # cost[n + m + k] equals -(dual of flipped row k); undo the sign flips.
    y = [-sigma[k] * cost[n + m + k] for k in range(m)]
    return OPTIMAL, x, y


def _dual_program(lp: LinearProgram) -> LinearProgram:
    """The dual ``max b.y : A^T y <= c, y >= 0`` recast in solver min-form."""
    cols: list[list[tuple[int, Fraction]]] = [[] for _ in range(lp.num_vars)]
    for i, row in enumerate(lp.rows):
        for j, a in row:
            cols[j].append((i, -a))
    return LinearProgram(
        [-bi for bi in lp.rhs],
        cols,
        [-cj for cj in lp.objective],
    )


def solve(lp: LinearProgram, force_direct: bool = False) -> LPSolution:
    """Solve an LP exactly, producing a primal-dual optimal pair.

    When the LP has many more rows than variables, the pivoting runs on the
    dual formulation (whose tableau is far smaller) and the pair is mapped
    back; the returned solution is identical in meaning.  Deterministic:
    identical input yields an identical solution.
    """
    cap = _row_cap()
    if cap is not None and lp.num_rows > cap:
        raise LPSizeError(
            f"LP has {lp.num_rows} rows, exceeding {_ROW_CAP_ENV}={cap}"
        )
    if not force_direct and lp.num_rows > 2 * lp.num_vars + 8:
        dual = _dual_program(lp)
        status, ys, xs = _run_simplex(dual.objective, dual.rows, dual.rhs)
        if status == OPTIMAL:
            x = tuple(_as_fraction(v) for v in xs)
            y = tuple(_as_fraction(v) for v in ys)
            value = sum(
                (c * v for c, v in zip(lp.objective, x)), Fraction(0)
            )
            return LPSolution(OPTIMAL, value, x, y)
        # Non-optimal dual status does not pin the primal status; fall back.
    status, xs, ys = _run_simplex(lp.objective, lp.rows, lp.rhs)
    if status != OPTIMAL:
        return LPSolution(status, None, (), ())
    x = tuple(_as_fraction(v) for v in xs)
    y = tuple(_as_fraction(v) for v in ys)
    value = sum((c * v for c, v in zip(lp.objective, x)), Fraction(0))
    return LPSolution(OPTIMAL, value, x, y)


def verify_certificate(lp: LinearProgram, sol: LPSolution) -> bool:
    """Re-check optimality from scratch with exact arithmetic.

    Confirms primal feasibility, dual feasibility, and that the two
    objectives coincide with the reported value.  Independent of the solver:
    only the problem data and the claimed vectors are used.
    """
    if sol.status != OPTIMAL or sol.value is None:
        return False
    if len(sol.x) != lp.num_vars or len(sol.y) != lp.num_rows:
        return False
    x = [Fraction(v) for v in sol.x]
    y = [Fraction(v) for v in sol.y]
    if any(v < 0 for v in x) or any(v < 0 for v in y):
        return False
    for row, b in zip(lp.rows, lp.rhs):
        if sum((a * x[j] for j, a in row), Fraction(0)) < b:
            return False
    col_sums = [Fraction(0)] * lp.num_vars
    for i, row in enumerate(lp.rows):
        yi = y[i]
        if yi:
            for j, a in row:
                col_sums[j] += a * yi
    if any(s > c for s, c in zip(col_sums, lp.objective)):
        return False
    primal_value = sum((c * v for c, v in zip(lp.objective, x)), Fraction(0))
    dual_value = sum((b * v for b, v in zip(lp.rhs, y)), Fraction(0))
    return primal_value == dual_value == Fraction(sol.value)
