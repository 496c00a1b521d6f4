"""Cap-set upper bounds from the symmetric covering LP.

The count of coordinate vectors in ``{0,1,2}^n`` by coordinate sum follows
the trinomial coefficients, and assigning one LP variable to each sum value
collapses the huge covering LP of the n-fold Kronecker power of the cap-set
tensor into 2n+1 variables with one constraint per nonincreasing exponent
triple summing to at most 2n.  Its exact optimum, floored, bounds the size
of any progression-free subset of F_3^n.  Routines here compute the
coefficients, solve the collapsed LP with certificates, compare against the
coarser slice-rank style counts, test the conjectured closed-form optimum,
and cross-validate against the uncollapsed LP for tiny n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .lp import OPTIMAL, LinearProgram, solve, verify_certificate
from .ranks import trank
from .tensors import SparseTensor, boxtimes, mod_domain, support_of

# Growth base of the bound: (3/8) * (207 + 33*sqrt(33))^(1/3), just under 2.756.
THETA = 0.375 * (207.0 + 33.0 * math.sqrt(33.0)) ** (1.0 / 3.0)

FULL_LP_MAX_N = 3


def trinomial(n: int) -> list[int]:
    """Coefficients of (1 + x + x^2)^n, exactly, by iterated convolution."""
    if n < 1:
        raise ValueError("n must be at least 1")
    row = [1]
    for _ in range(n):
        out = [0] * (len(row) + 2)
        for i, c in enumerate(row):
            out[i] += c
            out[i + 1] += c
            out[i + 2] += c
        row = out
    return row


def _triples(n: int) -> list[tuple[int, int, int]]:
    top = 2 * n
    return [
        (i, j, k)
        for i in range(top + 1)
        for j in range(i, top + 1)
        for k in range(j, top + 1)
        if i + j + k <= top
    ]


@dataclass(frozen=True)
class CapsetLPResult:
    """Exact optimum of the collapsed LP for a given n."""

    n: int
    t: tuple[Fraction, ...]
    value: Fraction
    bound: int
    certificate_ok: bool

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "t": [str(v) for v in self.t],
            "value": str(self.value),
            "bound": self.bound,
            "certificate_ok": self.certificate_ok,
        }


@lru_cache(maxsize=None)
def _reduced_lp_cached(n: int, alpha_scale: Fraction) -> CapsetLPResult:
    f = trinomial(n)
    objective = [3 * alpha_scale * f[i] for i in range(2 * n + 1)]
    rows = []
    for triple in _triples(n):
        counts: dict[int, int] = {}
        for idx in triple:
            counts[idx] = counts.get(idx, 0) + 1
        rows.append([(idx, Fraction(c)) for idx, c in sorted(counts.items())])
    lp = LinearProgram(objective, rows, [Fraction(1)] * len(rows))
    sol = solve(lp)
    if sol.status != OPTIMAL:
        raise RuntimeError(f"collapsed LP unexpectedly {sol.status}")
    if not verify_certificate(lp, sol):
        raise RuntimeError("collapsed LP certificate failed")
    return CapsetLPResult(n, sol.x, sol.value, math.floor(sol.value), True)


def reduced_lp(n: int, alpha_scale=1) -> CapsetLPResult:
    """Minimize ``3 * sum_i f_i t_i`` over nonnegative t with
    ``t_i + t_j + t_k >= 1`` whenever ``i + j + k <= 2n``.

    ``alpha_scale`` scales the objective (all three modes carry the same
    weight); the optimal t vector does not depend on it.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    return _reduced_lp_cached(n, Fraction(alpha_scale))


def capset_bound(n: int) -> int:
    """Integer upper bound for the largest progression-free set in F_3^n."""
    return reduced_lp(n).bound


def eg_bound(n: int) -> int:
    """The single-cutoff count ``3 * sum_{i <= 2n/3} f_i``."""
    f = trinomial(n)
    return 3 * sum(f[i] for i in range(0, 2 * n // 3 + 1))


def eg_prime_bound(n: int) -> int:
    """The sharper three-cutoff count with per-coordinate thresholds
    2n/3, (2n-1)/3 and (2n-2)/3."""
    f = trinomial(n)
    return sum(
        sum(f[i] for i in range(0, cutoff + 1))
        for cutoff in ((2 * n) // 3, (2 * n - 1) // 3, (2 * n - 2) // 3)
    )


_TAILS = {
    0: (Fraction(2, 3), Fraction(1, 3)),
    1: (Fraction(3, 4), Fraction(1, 2), Fraction(1, 4)),
    2: (Fraction(4, 5), Fraction(3, 5), Fraction(2, 5), Fraction(1, 5)),
}


def conjectured_t(n: int) -> tuple[Fraction, ...]:
    """The conjectured optimal t vector: a run of ones, then a short
    arithmetic tail depending on n mod 3, then zeros.

    The nominal run length is (2n-3)/3, (2n-5)/3 or (2n-7)/3 by residue
    class; for n = 2 that is negative and the tail is truncated from the
    left, which reproduces the known optimum (3/5, 2/5, 1/5, 0, 0).
    """
    if n < 2:
        raise ValueError("the conjectured pattern needs n >= 2")
    residue = n % 3
    prefix = {0: 2 * n - 3, 1: 2 * n - 5, 2: 2 * n - 7}[residue] // 3
    tail = _TAILS[residue]
    if prefix < 0:
        tail = tail[-prefix:]
        prefix = 0
    t = [Fraction(1)] * prefix + list(tail)
    t.extend([Fraction(0)] * (2 * n + 1 - len(t)))
    return tuple(t)


def t_vector_feasible(t, n: int) -> bool:
    """Exact feasibility of a t vector for the collapsed LP constraints."""
    vec = [Fraction(v) for v in t]
    if len(vec) != 2 * n + 1 or any(v < 0 for v in vec):
        return False
    denom = math.lcm(*(v.denominator for v in vec))
    scaled = [int(v * denom) for v in vec]
    top = 2 * n
    for i in range(top + 1):
        for j in range(i, top + 1 - i):
            ti_tj = scaled[i] + scaled[j]
            for k in range(j, top + 1 - i - j):
                if ti_tj + scaled[k] < denom:
                    return False
    return True


def t_vector_value(t, n: int) -> Fraction:
    f = trinomial(n)
    return 3 * sum((f[i] * Fraction(v) for i, v in enumerate(t)), Fraction(0))


@dataclass(frozen=True)
class ConjectureReport:
    n: int
    feasible: bool
    conjecture_value: Fraction
    lp_value: Fraction
    matches: bool

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "feasible": self.feasible,
            "conjecture_value": str(self.conjecture_value),
            "lp_value": str(self.lp_value),
            "matches": self.matches,
        }


def verify_conjecture(n: int) -> ConjectureReport:
    """Check the conjectured t vector against the solved LP.

    Reports feasibility and whether the conjectured objective attains the
    LP optimum; the match is reported, never assumed.
    """
    t = conjectured_t(n)
    feasible = t_vector_feasible(t, n)
    cval = t_vector_value(t, n)
    lp_value = reduced_lp(n).value
    return ConjectureReport(n, feasible, cval, lp_value, feasible and cval == lp_value)


def base_tensor() -> SparseTensor:
    """The cap-set tensor for n = 1 over F_3 in the polynomial basis
    1, x, x^2; its support has seven elements."""
    entries = {
        (0, 0, 0): 1,
        (2, 0, 0): -1,
        (0, 2, 0): -1,
        (0, 0, 2): -1,
        (0, 1, 1): 1,
        (1, 0, 1): 1,
        (1, 1, 0): 1,
    }
    return SparseTensor((3, 3, 3), entries, mod_domain(3))


def full_capset_lp(n: int) -> Fraction:
    """Exact support rank of the n-fold Kronecker power of the cap-set
    tensor, from the uncollapsed LP; cross-validates :func:`reduced_lp`."""
    if not 1 <= n <= FULL_LP_MAX_N:
        raise ValueError(f"full LP supported for 1 <= n <= {FULL_LP_MAX_N}")
    v = base_tensor()
    power = v
    for _ in range(n - 1):
        power = boxtimes(power, v)
    return trank(support_of(power)).value


def asymptotic_report(n_max: int) -> list[tuple[int, int, float]]:
    """Rows (n, bound, bound * sqrt(n) / THETA^n) for inspecting growth.

    The ratio column is informational; no asymptotic claim is asserted.
    """
    if not 1 <= n_max <= 60:
        raise ValueError("n_max must be between 1 and 60")
    out = []
    for n in range(1, n_max + 1):
        bound = capset_bound(n)
        out.append((n, bound, bound * math.sqrt(n) / THETA**n))
    return out
