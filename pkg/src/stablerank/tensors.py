"""Sparse exact tensors, supports, and the block/Kronecker/concatenation products.

Tensors are stored sparsely as a map from index tuples to nonzero scalars.
Two exact scalar domains are supported: arbitrary-precision rationals
("rational") and integers modulo a prime ("mod:<p>").  All indices are
0-based.  Dense complex tensors are plain ``numpy`` arrays; only the
flattening helpers here touch them.

All types are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

RATIONAL = "rational"

Index = tuple[int, ...]
Weight = tuple[Fraction, ...]


def _check_shape(dims: Sequence[int]) -> tuple[int, ...]:
    shape = tuple(int(n) for n in dims)
    if len(shape) < 1:
        raise ValueError("tensor order must be at least 1")
    if any(n < 1 for n in shape):
        raise ValueError(f"all dimensions must be >= 1, got {shape}")
    return shape


def _check_index(idx: Sequence[int], shape: tuple[int, ...]) -> Index:
    coords = tuple(int(c) for c in idx)
    if len(coords) != len(shape):
        raise ValueError(f"index {coords} has wrong length for shape {shape}")
    for c, n in zip(coords, shape):
        if not 0 <= c < n:
            raise ValueError(f"index {coords} out of range for shape {shape}")
    return coords


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def modulus_of(domain: str) -> int | None:
    """Prime modulus of a scalar domain tag, or None for the rationals."""
    if domain == RATIONAL:
        return None
    if domain.startswith("mod:"):
        p = int(domain[4:])
        if not _is_prime(p):
            raise ValueError(f"modulus must be prime, got {p}")
        return p
    raise ValueError(f"unknown scalar domain {domain!r}")


def mod_domain(p: int) -> str:
    if not _is_prime(p):
        raise ValueError(f"modulus must be prime, got {p}")
    return f"mod:{p}"


def _coerce_scalar(value, p: int | None):
    """Normalize a scalar into its domain; returns None for an exact zero."""
    v = Fraction(value)
    if p is None:
        return v if v else None
    if v.denominator != 1:
        raise ValueError(f"mod-{p} entries must be integers, got {v}")
    residue = v.numerator % p
    return residue if residue else None


@dataclass(frozen=True)
class Support:
    """The set of index tuples at which a tensor is nonzero."""

    shape: tuple[int, ...]
    elements: frozenset[Index]

    def __init__(self, shape: Sequence[int], elements: Iterable[Sequence[int]]):
        shp = _check_shape(shape)
        elems = frozenset(_check_index(e, shp) for e in elements)
        object.__setattr__(self, "shape", shp)
        object.__setattr__(self, "elements", elems)

    @property
    def order(self) -> int:
        return len(self.shape)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.sorted_elements)

    def __contains__(self, idx) -> bool:
        return tuple(idx) in self.elements

    @property
    def sorted_elements(self) -> tuple[Index, ...]:
        """Elements in lexicographic order; the canonical iteration order."""
        return tuple(sorted(self.elements))

    def to_json(self) -> dict:
        return {
            "shape": list(self.shape),
            "elements": [list(e) for e in self.sorted_elements],
        }

    @staticmethod
    def from_json(data: Mapping) -> "Support":
        return Support(data["shape"], data["elements"])


@dataclass(frozen=True)
class SparseTensor:
    """Sparse tensor over an exact scalar domain.

    Entries map index tuples to nonzero scalars: ``Fraction`` values in the
    rational domain, integers in ``1..p-1`` in the mod-p domain.  Zero values
    are dropped on construction, so the zero tensor has an empty entry map.
    """

    shape: tuple[int, ...]
    domain: str
    entries: Mapping[Index, Fraction | int]

    def __init__(self, shape: Sequence[int], entries: Mapping, domain: str = RATIONAL):
        shp = _check_shape(shape)
        p = modulus_of(domain)
        clean: dict[Index, Fraction | int] = {}
        for idx, raw in entries.items():
            coords = _check_index(idx, shp)
            val = _coerce_scalar(raw, p)
            if val is not None:
                clean[coords] = val
        object.__setattr__(self, "shape", shp)
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "entries", clean)

    @property
    def order(self) -> int:
        return len(self.shape)

    def is_zero(self) -> bool:
        return not self.entries

    def __getitem__(self, idx) -> Fraction | int:
        coords = _check_index(idx, self.shape)
        zero = Fraction(0) if self.domain == RATIONAL else 0
        return self.entries.get(coords, zero)

    def to_json(self) -> dict:
        return {
            "shape": list(self.shape),
            "domain": self.domain,
            "entries": [
                {"idx": list(idx), "val": str(self.entries[idx])}
                for idx in sorted(self.entries)
            ],
        }

    @staticmethod
    def from_json(data: Mapping) -> "SparseTensor":
        domain = data.get("domain", RATIONAL)
        p = modulus_of(domain)
        entries = {}
        for item in data["entries"]:
            raw = item["val"]
            entries[tuple(item["idx"])] = Fraction(raw) if p is None else int(raw)
        return SparseTensor(data["shape"], entries, domain)


def support_of(v: SparseTensor) -> Support:
    """Index tuples of the nonzero entries of ``v``."""
    return Support(v.shape, v.entries.keys())


def _require_same_domain(v: SparseTensor, w: SparseTensor) -> None:
    if v.domain != w.domain:
        raise ValueError(f"scalar domain mismatch: {v.domain} vs {w.domain}")


def _require_same_order(v: SparseTensor, w: SparseTensor) -> None:
    if v.order != w.order:
        raise ValueError(f"tensor order mismatch: {v.order} vs {w.order}")


def boxplus(v: SparseTensor, w: SparseTensor) -> SparseTensor:
    """Block direct sum: dimensions add per mode, ``v`` in the low block."""
    _require_same_order(v, w)
    _require_same_domain(v, w)
    shape = tuple(a + b for a, b in zip(v.shape, w.shape))
    entries: dict[Index, Fraction | int] = dict(v.entries)
    for idx, val in w.entries.items():
        entries[tuple(a + n for a, n in zip(idx, v.shape))] = val
    return SparseTensor(shape, entries, v.domain)


def boxtimes(v: SparseTensor, w: SparseTensor) -> SparseTensor:
    """Kronecker product per mode: dimensions multiply, entries multiply.

    The paired index in mode ``i`` is ``a_i * w.shape[i] + b_i``.
    """
    _require_same_order(v, w)
    _require_same_domain(v, w)
    p = modulus_of(v.domain)
    shape = tuple(a * b for a, b in zip(v.shape, w.shape))
    entries: dict[Index, Fraction | int] = {}
    for ia, va in v.entries.items():
        for ib, vb in w.entries.items():
            idx = tuple(a * n + b for a, b, n in zip(ia, ib, w.shape))
            prod = va * vb if p is None else (va * vb) % p
            entries[idx] = prod
    return SparseTensor(shape, entries, v.domain)


def outer(v: SparseTensor, w: SparseTensor) -> SparseTensor:
    """Concatenation product: an order d tensor times an order e tensor
    gives an order d+e tensor with entries multiplied."""
    _require_same_domain(v, w)
    p = modulus_of(v.domain)
    shape = v.shape + w.shape
    entries: dict[Index, Fraction | int] = {}
    for ia, va in v.entries.items():
        for ib, vb in w.entries.items():
            prod = va * vb if p is None else (va * vb) % p
            entries[ia + ib] = prod
    return SparseTensor(shape, entries, v.domain)


def mode_transform(v: SparseTensor, mats: Sequence[Sequence[Sequence]]) -> SparseTensor:
    """Apply one matrix per mode to a sparse tensor, exactly.

    ``mats[i]`` has ``v.shape[i]`` columns; the result's mode-i dimension is
    the row count of ``mats[i]``.  Scalars must lie in the tensor's domain.
    """
    if len(mats) != v.order:
        raise ValueError("need exactly one matrix per mode")
    p = modulus_of(v.domain)
    entries: dict[Index, Fraction | int] = dict(v.entries)
    shape = list(v.shape)
    for axis, mat in enumerate(mats):
        rows = len(mat)
        if any(len(r) != shape[axis] for r in mat):
            raise ValueError(f"matrix for mode {axis} has wrong column count")
        acc: dict[Index, Fraction | int] = {}
        for idx, val in entries.items():
            col = idx[axis]
            for r in range(rows):
                coeff = mat[r][col]
                if not coeff:
                    continue
                new_idx = idx[:axis] + (r,) + idx[axis + 1 :]
                term = coeff * val
                cur = acc.get(new_idx)
                acc[new_idx] = term if cur is None else cur + term
        if p is None:
            entries = {k: Fraction(x) for k, x in acc.items() if x}
        else:
            entries = {k: x % p for k, x in acc.items() if x % p}
        shape[axis] = rows
    return SparseTensor(tuple(shape), entries, v.domain)


def as_weight(alpha, order: int) -> Weight:
    """Validate a per-mode weight vector of positive rationals."""
    w = tuple(Fraction(a) for a in alpha)
    if len(w) != order:
        raise ValueError(f"weight has length {len(w)}, tensor order is {order}")
    if any(a <= 0 for a in w):
        raise ValueError("all weight entries must be positive")
    return w


def ones_weight(order: int) -> Weight:
    return (Fraction(1),) * order


def psg_slope(x: Sequence[Sequence[int]], support: Support, alpha) -> Fraction:
    """Slope of a diagonal one-parameter subgroup against a support.

    ``x[i][j]`` is the nonnegative exponent assigned to slice j of mode i.
    The slope is the alpha-weighted total exponent divided by the minimum
    exponent sum over the support, which must be positive.
    """
    if not support.elements:
        raise ValueError("zero tensor has no slope")
    d = support.order
    w = as_weight(alpha, d)
    if len(x) != d:
        raise ValueError("exponent table must have one row per mode")
    for i, row in enumerate(x):
        if len(row) != support.shape[i]:
            raise ValueError(f"exponent row {i} has wrong length")
        if any(int(e) != e or e < 0 for e in row):
            raise ValueError("exponents must be nonnegative integers")
    numerator = sum((w[i] * sum(x[i]) for i in range(d)), Fraction(0))
    denominator = min(sum(x[i][s[i]] for i in range(d)) for s in support.elements)
    if denominator <= 0:
        raise ValueError("subgroup action does not vanish as t -> 0")
    return Fraction(numerator, denominator)


def flatten(a: np.ndarray, mode: int) -> np.ndarray:
    """Matricize a dense array: mode ``mode`` indexes rows, the remaining
    modes index columns lexicographically in ascending mode order."""
    arr = np.asarray(a)
    if not 0 <= mode < arr.ndim:
        raise ValueError(f"mode {mode} out of range for order {arr.ndim}")
    return np.moveaxis(arr, mode, 0).reshape(arr.shape[mode], -1)


def unflatten(m: np.ndarray, shape: Sequence[int], mode: int) -> np.ndarray:
    """Inverse of :func:`flatten` for the given shape and mode."""
    shp = tuple(shape)
    if not 0 <= mode < len(shp):
        raise ValueError(f"mode {mode} out of range for order {len(shp)}")
    rest = shp[:mode] + shp[mode + 1 :]
    return np.moveaxis(np.asarray(m).reshape((shp[mode],) + rest), 0, mode)


def to_dense_complex(v: SparseTensor) -> np.ndarray:
    """Embed a rational sparse tensor into a dense complex array."""
    if modulus_of(v.domain) is not None:
        raise ValueError("mod-p tensors have no canonical complex embedding")
    out = np.zeros(v.shape, dtype=complex)
    for idx, val in v.entries.items():
        out[idx] = float(val)
    return out


def complex_from_json(data: Mapping) -> np.ndarray:
    """Load a dense complex tensor from the JSON tensor format.

    Rational entries are coerced to double; the "complex" domain stores
    values as ``[re, im]`` pairs.  Mod-p tensors are rejected.
    """
    shape = _check_shape(data["shape"])
    domain = data.get("domain", RATIONAL)
    out = np.zeros(shape, dtype=complex)
    if domain == "complex":
        for item in data["entries"]:
            re, im = item["val"]
            out[_check_index(item["idx"], shape)] = complex(float(re), float(im))
        return out
    if modulus_of(domain) is not None:
        raise ValueError("mod-p tensors have no canonical complex embedding")
    for item in data["entries"]:
        out[_check_index(item["idx"], shape)] = float(Fraction(item["val"]))
    return out


def complex_to_json(a: np.ndarray) -> dict:
    arr = np.asarray(a, dtype=complex)
    entries = []
    for idx in np.ndindex(arr.shape):
        val = arr[idx]
        if val != 0:
            entries.append({"idx": list(idx), "val": [val.real, val.imag]})
    return {"shape": list(arr.shape), "domain": "complex", "entries": entries}
