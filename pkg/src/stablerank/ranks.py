"""Stable rank computations at the level of a fixed basis.

The torus-restricted stable rank of a tensor depends only on its support
and is the optimum of a small covering LP over the support; its dual has a
variable per support element.  The slice rank relative to the fixed basis
is the 0/1 version of the same program, solved here by branch and bound on
the LP relaxation.  Searching over invertible basis changes turns the
support-level rank into an upper bound for the basis-free stable rank, and
the same search computes the non-commutative rank of a matrix tuple.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .lp import OPTIMAL, LinearProgram, solve, verify_certificate
from .tensors import (
    Index,
    SparseTensor,
    Support,
    Weight,
    as_weight,
    mod_domain,
    mode_transform,
    modulus_of,
    ones_weight,
    support_of,
)


class SliceLimitError(RuntimeError):
    """Raised when a slice-cover instance exceeds the configured size cap."""


class SubspaceLimitError(RuntimeError):
    """Raised when non-commutative rank enumeration would be too large."""


def _offsets(shape: Sequence[int]) -> list[int]:
    off = [0]
    for n in shape:
        off.append(off[-1] + n)
    return off[:-1]


def build_lp(support: Support, alpha) -> LinearProgram:
    """The covering LP of a support: one variable per (mode, slice),
    one constraint per support element, objective weighted by alpha."""
    w = as_weight(alpha, support.order)
    off = _offsets(support.shape)
    objective: list[Fraction] = []
    for i, n in enumerate(support.shape):
        objective.extend([w[i]] * n)
    rows = [
        [(off[i] + s[i], Fraction(1)) for i in range(support.order)]
        for s in support.sorted_elements
    ]
    return LinearProgram(objective, rows, [Fraction(1)] * len(rows))


@dataclass(frozen=True)
class TRankResult:
    """Exact rank value with its optimal primal/dual pair.

    ``primal[i][j]`` is the weight put on slice j of mode i; ``dual`` maps
    each support element to its multiplier.  The two objectives agree
    exactly, and ``certificate_ok`` records an independent re-check.
    """

    value: Fraction
    primal: tuple[tuple[Fraction, ...], ...]
    dual: Mapping[Index, Fraction]
    certificate_ok: bool

    def to_json(self) -> dict:
        return {
            "value": str(self.value),
            "primal": [[str(v) for v in mode] for mode in self.primal],
            "dual": [
                {"idx": list(idx), "val": str(self.dual[idx])}
                for idx in sorted(self.dual)
            ],
            "certificate_ok": self.certificate_ok,
        }


def _zero_result(shape: Sequence[int]) -> TRankResult:
    primal = tuple(tuple(Fraction(0) for _ in range(n)) for n in shape)
    return TRankResult(Fraction(0), primal, {}, True)


def _split_by_mode(values: Sequence[Fraction], shape) -> tuple[tuple[Fraction, ...], ...]:
    out = []
    pos = 0
    for n in shape:
        out.append(tuple(values[pos : pos + n]))
        pos += n
    return tuple(out)


def trank(support: Support, alpha=None) -> TRankResult:
    """Stable rank of a support: the exact optimum of its covering LP.

    The zero tensor (empty support) has rank 0 by convention.
    """
    if alpha is None:
        alpha = ones_weight(support.order)
    if not support.elements:
        return _zero_result(support.shape)
    lp = build_lp(support, alpha)
    sol = solve(lp)
    if sol.status != OPTIMAL:  # covering LPs are always feasible and bounded
        raise RuntimeError(f"support LP unexpectedly {sol.status}")
    ok = verify_certificate(lp, sol)
    dual = dict(zip(support.sorted_elements, sol.y))
    return TRankResult(sol.value, _split_by_mode(sol.x, support.shape), dual, ok)


def _dual_lp(support: Support, alpha: Weight) -> LinearProgram:
    # max sum y(s) : sum_{s_i=j} y(s) <= alpha_i, y >= 0, in solver min-form
    elements = support.sorted_elements
    pos = {s: k for k, s in enumerate(elements)}
    rows = []
    rhs = []
    for i, n in enumerate(support.shape):
        buckets: list[list[tuple[int, Fraction]]] = [[] for _ in range(n)]
        for s in elements:
            buckets[s[i]].append((pos[s], Fraction(-1)))
        for j in range(n):
            rows.append(buckets[j])
            rhs.append(-alpha[i])
    return LinearProgram([Fraction(-1)] * len(elements), rows, rhs)


def dual_trank(support: Support, alpha=None) -> TRankResult:
    """Solve the dual covering program directly.

    Variables are multipliers on the support elements, constrained so that
    each slice carries at most its alpha weight.  The optimum equals
    :func:`trank` exactly; the primal vector is recovered from the dual of
    this formulation.
    """
    if alpha is None:
        alpha = ones_weight(support.order)
    w = as_weight(alpha, support.order)
    if not support.elements:
        return _zero_result(support.shape)
    lp = _dual_lp(support, w)
    sol = solve(lp)
    if sol.status != OPTIMAL:
        raise RuntimeError(f"dual support LP unexpectedly {sol.status}")
    ok = verify_certificate(lp, sol)
    dual = dict(zip(support.sorted_elements, sol.x))
    return TRankResult(-sol.value, _split_by_mode(sol.y, support.shape), dual, ok)


def check_slackness(support: Support, alpha, primal, dual: Mapping[Index, Fraction]) -> bool:
    """Exact complementary slackness for a feasible primal/dual pair:
    every slice is saturated or unused, every element is tight or unpaid."""
    d = support.order
    w = as_weight(alpha, d)
    elements = support.sorted_elements
    for i in range(d):
        for j in range(support.shape[i]):
            load = sum(
                (Fraction(dual.get(s, 0)) for s in elements if s[i] == j),
                Fraction(0),
            )
            if load != w[i] and Fraction(primal[i][j]) != 0:
                return False
    for s in elements:
        cover = sum((Fraction(primal[i][s[i]]) for i in range(d)), Fraction(0))
        if cover != 1 and Fraction(dual.get(s, 0)) != 0:
            return False
    return True


@dataclass(frozen=True)
class TSliceResult:
    """Minimum slice cover: size and one optimal set of (mode, slice) pairs."""

    value: int
    chosen: frozenset[tuple[int, int]]

    def to_json(self) -> dict:
        return {"value": self.value, "chosen": [list(c) for c in sorted(self.chosen)]}


def _ceil(q: Fraction) -> int:
    return -((-q.numerator) // q.denominator)


def tslice(support: Support, limit: int = 40) -> TSliceResult:
    """Minimum number of coordinate slices covering a support.

    Exact 0/1 optimum via branch and bound on the covering LP relaxation.
    Branches on the fractional slice closest to 1/2, ties broken by (mode,
    slice) order, taking the slice before discarding it.
    """
    total = sum(support.shape)
    if total > limit:
        raise SliceLimitError(
            f"support has {total} slices (limit {limit}); raise the limit or "
            "use grank_upper_search for a cheaper upper bound"
        )
    elements = support.sorted_elements
    if not elements:
        return TSliceResult(0, frozenset())
    d = support.order

    def cover_lp(remaining, banned):
        slots = [
            (i, j)
            for i in range(d)
            for j in range(support.shape[i])
            if (i, j) not in banned
        ]
        col = {slot: k for k, slot in enumerate(slots)}
        rows = [
            [(col[(i, s[i])], Fraction(1)) for i in range(d) if (i, s[i]) in col]
            for s in remaining
        ]
        lp = LinearProgram([Fraction(1)] * len(slots), rows, [Fraction(1)] * len(rows))
        return lp, slots

    best_val: int | None = None
    best_cover: frozenset | None = None

    def consider(cover: frozenset) -> None:
        nonlocal best_val, best_cover
        if best_val is None or len(cover) < best_val:
            best_val = len(cover)
            best_cover = cover

    # Initial incumbent: slices with LP weight >= 1/d always form a cover.
    root_sol = solve(build_lp(support, ones_weight(d)))
    off = _offsets(support.shape)
    rounded = frozenset(
        (i, j)
        for i in range(d)
        for j in range(support.shape[i])
        if root_sol.x[off[i] + j] >= Fraction(1, d)
    )
    consider(rounded)

    def explore(fixed: frozenset, banned: frozenset, remaining) -> None:
        if not remaining:
            consider(fixed)
            return
        for s in remaining:
            if all((i, s[i]) in banned for i in range(d)):
                return  # element can no longer be covered
        lp, slots = cover_lp(remaining, banned)
        sol = solve(lp)
        if sol.status != OPTIMAL:
            return
        if best_val is not None and len(fixed) + _ceil(sol.value) >= best_val:
            return
        x = dict(zip(slots, sol.x))
        fractional = [
            (abs(v - Fraction(1, 2)), slot) for slot, v in x.items() if 0 < v < 1
        ]
        if not fractional:
            ones = {slot for slot, v in x.items() if v == 1}
            consider(fixed | ones)
            return
        _, slot = min(fractional)
        i, j = slot
        explore(fixed | {slot}, banned, tuple(s for s in remaining if s[i] != j))
        explore(fixed, banned | {slot}, remaining)

    explore(frozenset(), frozenset(), elements)
    assert best_val is not None and best_cover is not None
    return TSliceResult(best_val, best_cover)


def _det_rational(mat: Sequence[Sequence[Fraction]]) -> Fraction:
    n = len(mat)
    a = [[Fraction(v) for v in row] for row in mat]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), -1)
        if piv < 0:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        inv = 1 / a[col][col]
        for r in range(col + 1, n):
            f = a[r][col] * inv
            if f:
                for c in range(col, n):
                    a[r][c] -= f * a[col][c]
    return det


def _rank_mod_p(vectors: Sequence[Sequence[int]], p: int) -> int:
    rows = [list(v) for v in vectors if any(x % p for x in v)]
    rank = 0
    width = len(rows[0]) if rows else 0
    for col in range(width):
        piv = next((r for r in range(rank, len(rows)) if rows[r][col] % p), -1)
        if piv < 0:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][col], p - 2, p)
        rows[rank] = [(v * inv) % p for v in rows[rank]]
        for r in range(len(rows)):
            if r != rank and rows[r][col] % p:
                f = rows[r][col]
                rows[r] = [(a - f * b) % p for a, b in zip(rows[r], rows[rank])]
        rank += 1
        if rank == len(rows):
            break
    return rank


def _random_invertible(rng: random.Random, n: int, p: int | None):
    """Random basis-change matrix: small integer entries over the rationals,
    uniform entries mod p; rejection sampled to be invertible."""
    for _ in range(64):
        if p is None:
            mat = [[rng.choice((-1, 0, 1)) for _ in range(n)] for _ in range(n)]
            if _det_rational(mat):
                return mat
        else:
            mat = [[rng.randrange(p) for _ in range(n)] for _ in range(n)]
            if _rank_mod_p(mat, p) == n:
                return mat
    return _permutation(rng, n)  # vanishing-probability fallback


def _permutation(rng: random.Random, n: int):
    perm = rng.sample(range(n), n)
    return [[1 if c == perm[r] else 0 for c in range(n)] for r in range(n)]


def _transvection(rng: random.Random, n: int, p: int | None):
    mat = [[1 if r == c else 0 for c in range(n)] for r in range(n)]
    if n == 1:
        return mat
    a, b = rng.sample(range(n), 2)
    mat[a][b] = rng.choice((1, -1)) if p is None else rng.randrange(1, p)
    return mat


def _basis_change(rng: random.Random, n: int, p: int | None, kind: int):
    if kind == 0:
        return _permutation(rng, n)
    if kind == 1:
        return _transvection(rng, n, p)
    return _random_invertible(rng, n, p)


def grank_upper_search(v: SparseTensor, alpha=None, budget: int = 64, seed: int = 0) -> Fraction:
    """Upper bound for the basis-free stable rank by sampling basis changes.

    Evaluates the support rank of ``g . v`` over ``budget`` invertible
    per-mode basis changes (identity first, then permutations, elementary
    transvections, and dense random matrices in rotation) and returns the
    minimum.  Every sampled value is a valid upper bound; the reported
    number carries no tightness claim.  Deterministic for a fixed seed.
    """
    if alpha is None:
        alpha = ones_weight(v.order)
    w = as_weight(alpha, v.order)
    if v.is_zero():
        return Fraction(0)
    cache: dict[frozenset, Fraction] = {}

    def rank_of(t: SparseTensor) -> Fraction:
        s = support_of(t)
        key = s.elements
        if key not in cache:
            cache[key] = trank(s, w).value
        return cache[key]

    best = rank_of(v)
    rng = random.Random(seed)
    p = modulus_of(v.domain)
    for count in range(1, max(1, budget)):
        kind = count % 3
        mats = [_basis_change(rng, n, p, kind) for n in v.shape]
        best = min(best, rank_of(mode_transform(v, mats)))
    return best


@dataclass(frozen=True)
class MatrixTuple:
    """A tuple of equally sized matrices over a prime field."""

    modulus: int
    matrices: tuple[tuple[tuple[int, ...], ...], ...]

    def __init__(self, matrices, modulus: int):
        p = modulus_of(mod_domain(modulus))
        mats = []
        for m in matrices:
            mats.append(tuple(tuple(int(v) % p for v in row) for row in m))
        if not mats:
            raise ValueError("matrix tuple must contain at least one matrix")
        rows = len(mats[0])
        cols = len(mats[0][0]) if rows else 0
        if rows < 1 or cols < 1:
            raise ValueError("matrices must be nonempty")
        for m in mats:
            if len(m) != rows or any(len(r) != cols for r in m):
                raise ValueError("all matrices must have identical dimensions")
        object.__setattr__(self, "modulus", p)
        object.__setattr__(self, "matrices", tuple(mats))

    @property
    def rows(self) -> int:
        return len(self.matrices[0])

    @property
    def cols(self) -> int:
        return len(self.matrices[0][0])


def _rref_bases(q: int, k: int, p: int):
    """All reduced row-echelon generator matrices of k-dimensional subspaces
    of F_p^q; each subspace appears exactly once."""
    for pivots in itertools.combinations(range(q), k):
        pivot_set = set(pivots)
        free = [
            (r, c)
            for r in range(k)
            for c in range(pivots[r] + 1, q)
            if c not in pivot_set
        ]
        for values in itertools.product(range(p), repeat=len(free)):
            basis = [[0] * q for _ in range(k)]
            for r in range(k):
                basis[r][pivots[r]] = 1
            for (r, c), val in zip(free, values):
                basis[r][c] = val
            yield basis


def ncrk_bruteforce(mats: MatrixTuple, limit: int = 1 << 20) -> int:
    """Non-commutative rank by exhaustive subspace enumeration.

    Minimizes ``cols + dim(sum_i A_i W) - dim W`` over all subspaces W of
    the column space, enumerated through canonical RREF generator matrices.
    """
    p, q = mats.modulus, mats.cols
    if p**q > limit:
        raise SubspaceLimitError(
            f"{p}^{q} exceeds the enumeration limit {limit}; use the search mode"
        )
    best = q  # W = 0
    for k in range(1, q + 1):
        for basis in _rref_bases(q, k, p):
            images = [
                [sum(m[r][c] * w[c] for c in range(q)) % p for r in range(mats.rows)]
                for m in mats.matrices
                for w in basis
            ]
            best = min(best, q + _rank_mod_p(images, p) - k)
    return best


def matrix_tuple_tensor(mats: MatrixTuple) -> SparseTensor:
    """The order-3 tensor with one slice per matrix of the tuple."""
    entries = {
        (r, c, i): val
        for i, m in enumerate(mats.matrices)
        for r, row in enumerate(m)
        for c, val in enumerate(row)
        if val
    }
    shape = (mats.rows, mats.cols, len(mats.matrices))
    return SparseTensor(shape, entries, mod_domain(mats.modulus))


def ncrk_via_grank(mats: MatrixTuple, budget: int = 200, seed: int = 0) -> int:
    """Non-commutative rank from above via the basis-change search.

    Runs the stable-rank upper-bound search on the tuple's order-3 tensor
    with weights (1, 1, min(rows, cols)) and floors the result.  Always at
    least the true rank; equal to it once the search finds an adapted basis.
    """
    t = matrix_tuple_tensor(mats)
    if t.is_zero():
        return 0
    ell = min(mats.rows, mats.cols)
    bound = grank_upper_search(t, (1, 1, Fraction(ell)), budget=budget, seed=seed)
    return math.floor(bound)
