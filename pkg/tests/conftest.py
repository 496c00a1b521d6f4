"""Shared corpus helpers for the test suite."""

import itertools
import random

from stablerank import SparseTensor, Support


def random_support(rng: random.Random, order=None, max_dim=4, max_elems=15) -> Support:
    """Nonempty random support with the acceptance-corpus parameters."""
    d = order if order is not None else rng.choice((3, 4, 5))
    shape = tuple(rng.randint(1, max_dim) for _ in range(d))
    universe = list(itertools.product(*[range(n) for n in shape]))
    k = rng.randint(1, min(max_elems, len(universe)))
    return Support(shape, rng.sample(universe, k))


def indicator_tensor(support: Support) -> SparseTensor:
    """Rational tensor with entry 1 at every support element."""
    return SparseTensor(support.shape, {e: 1 for e in support.elements})


def exhaustive_min_cover(support: Support) -> int:
    """0/1 oracle: try all slice subsets, smallest covering size wins."""
    slots = [(i, j) for i in range(support.order) for j in range(support.shape[i])]
    best = len(slots)
    for mask in range(1 << len(slots)):
        if mask.bit_count() >= best:
            continue
        chosen = {slots[b] for b in range(len(slots)) if mask >> b & 1}
        if all(
            any((i, e[i]) in chosen for i in range(support.order))
            for e in support.elements
        ):
            best = len(chosen)
    return best
