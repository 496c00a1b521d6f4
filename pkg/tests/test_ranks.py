import math
import random
from fractions import Fraction as F

import pytest

from stablerank import (
    MatrixTuple,
    SliceLimitError,
    SparseTensor,
    SubspaceLimitError,
    Support,
    boxplus,
    boxtimes,
    build_lp,
    check_slackness,
    dual_trank,
    grank_upper_search,
    matrix_tuple_tensor,
    mod_domain,
    ncrk_bruteforce,
    ncrk_via_grank,
    outer,
    psg_slope,
    support_of,
    trank,
    tslice,
)
from stablerank.ranks import _rank_mod_p

from conftest import exhaustive_min_cover, indicator_tensor, random_support

W_SUPPORT = Support((2, 2, 2), [(1, 0, 0), (0, 1, 0), (0, 0, 1)])
CAPSET_SUPPORT = Support(
    (3, 3, 3),
    [(0, 0, 0), (2, 0, 0), (0, 2, 0), (0, 0, 2), (0, 1, 1), (1, 0, 1), (1, 1, 0)],
)


class TestBuildLp:
    def test_w_dimensions(self):
        lp = build_lp(W_SUPPORT, (1, 1, 1))
        assert lp.num_vars == 6 and lp.num_rows == 3

    def test_capset_dimensions(self):
        lp = build_lp(CAPSET_SUPPORT, (1, 1, 1))
        assert lp.num_vars == 9 and lp.num_rows == 7

    def test_weight_length_mismatch(self):
        with pytest.raises(ValueError):
            build_lp(W_SUPPORT, (1, 1))


class TestTrank:
    def test_w_state(self):
        r = trank(W_SUPPORT)
        assert r.value == F(3, 2) and r.certificate_ok

    def test_single_element_gives_min_weight(self):
        s = Support((2, 3, 2), [(0, 0, 0)])
        assert trank(s, (F(5), F(2, 3), F(7))).value == F(2, 3)

    def test_capset_support(self):
        assert trank(CAPSET_SUPPORT).value == F(9, 4)

    def test_inverse_dim_weights_at_most_one(self):
        rng = random.Random(17)
        for _ in range(15):
            s = random_support(rng)
            alpha = tuple(F(1, n) for n in s.shape)
            assert trank(s, alpha).value <= 1

    def test_empty_support(self):
        r = trank(Support((2, 2), []))
        assert r.value == 0 and r.certificate_ok and r.dual == {}

    def test_depends_only_on_support(self):
        base = indicator_tensor(W_SUPPORT)
        scaled = SparseTensor(
            base.shape, {idx: F(7, 3) * val for idx, val in base.entries.items()}
        )
        assert trank(support_of(scaled)).value == trank(support_of(base)).value

    def test_at_least_min_weight(self):
        rng = random.Random(23)
        for _ in range(10):
            s = random_support(rng)
            alpha = tuple(F(rng.randint(1, 4), rng.randint(1, 3)) for _ in s.shape)
            assert trank(s, alpha).value >= min(alpha)


class TestDualTrank:
    def test_matches_primal_on_corpus(self):
        rng = random.Random(5)
        for _ in range(25):
            s = random_support(rng)
            r, d = trank(s), dual_trank(s)
            assert r.value == d.value
            assert r.certificate_ok and d.certificate_ok

    def test_w_state_uniform_dual_is_optimal(self):
        # y = 1/2 on each element: every slice load is at most 1, total 3/2
        y = F(1, 2)
        for i in range(3):
            for j in range(2):
                load = sum(y for s in W_SUPPORT if s[i] == j)
                assert load <= 1
        assert 3 * y == dual_trank(W_SUPPORT).value == F(3, 2)

    def test_known_capset_dual_is_optimal(self):
        # The pinned dual assignment is feasible and attains the optimum.
        y = {
            (0, 0, 0): F(0),
            (2, 0, 0): F(1, 4),
            (0, 2, 0): F(1, 4),
            (0, 0, 2): F(1, 4),
            (0, 1, 1): F(1, 2),
            (1, 0, 1): F(1, 2),
            (1, 1, 0): F(1, 2),
        }
        for i in range(3):
            for j in range(3):
                load = sum(v for s, v in y.items() if s[i] == j)
                assert load <= 1
        assert sum(y.values()) == F(9, 4) == dual_trank(CAPSET_SUPPORT).value

    def test_empty_support(self):
        assert dual_trank(Support((2, 2), [])).value == 0


class TestSlackness:
    def test_optimal_pair_passes(self):
        r = trank(W_SUPPORT)
        assert check_slackness(W_SUPPORT, (1, 1, 1), r.primal, r.dual)

    def test_suboptimal_primal_fails(self):
        r = trank(W_SUPPORT)
        sloppy = tuple((F(1), F(1)) for _ in range(3))  # feasible, not optimal
        assert not check_slackness(W_SUPPORT, (1, 1, 1), sloppy, r.dual)

    def test_random_optimal_pairs_pass(self):
        rng = random.Random(13)
        for _ in range(15):
            s = random_support(rng)
            r = trank(s)
            assert check_slackness(s, (1,) * s.order, r.primal, r.dual)


class TestSlopeConsistency:
    def test_integer_scaled_optimum_has_matching_slope(self):
        rng = random.Random(29)
        for _ in range(15):
            s = random_support(rng)
            alpha = tuple(F(rng.randint(1, 3)) for _ in s.shape)
            r = trank(s, alpha)
            if r.value == 0:
                continue
            denom = math.lcm(
                *(v.denominator for mode in r.primal for v in mode)
            )
            x = [[int(v * denom) for v in mode] for mode in r.primal]
            assert psg_slope(x, s, alpha) == r.value


class TestTslice:
    def test_w_state(self):
        res = tslice(W_SUPPORT)
        assert res.value == 2
        assert all(any((i, e[i]) in res.chosen for i in range(3)) for e in W_SUPPORT)

    def test_singleton(self):
        assert tslice(Support((2, 2, 2), [(1, 1, 1)])).value == 1

    def test_empty(self):
        assert tslice(Support((2, 2), [])).value == 0

    def test_capset_support(self):
        assert tslice(CAPSET_SUPPORT).value == 3

    def test_limit_enforced(self):
        big = Support((21, 21), [(0, 0)])
        with pytest.raises(SliceLimitError):
            tslice(big, limit=40)

    def test_matches_exhaustive_oracle(self):
        rng = random.Random(77)
        checked = 0
        while checked < 25:
            s = random_support(rng, max_dim=3, max_elems=10)
            if sum(s.shape) > 12:
                continue
            assert tslice(s).value == exhaustive_min_cover(s)
            checked += 1

    def test_sandwich_against_trank(self):
        rng = random.Random(88)
        for _ in range(20):
            s = random_support(rng)
            d = s.order
            lp_val = trank(s).value
            cover = tslice(s).value
            assert F(2, d) * cover <= lp_val <= cover


class TestProducts:
    def test_block_additivity(self):
        rng = random.Random(101)
        for _ in range(12):
            d = rng.choice((3, 4))
            a = indicator_tensor(random_support(rng, order=d, max_dim=3, max_elems=6))
            b = indicator_tensor(random_support(rng, order=d, max_dim=3, max_elems=6))
            total = trank(support_of(boxplus(a, b))).value
            assert total == trank(support_of(a)).value + trank(support_of(b)).value

    def test_product_dual_certificate_feasible(self):
        rng = random.Random(103)
        for _ in range(8):
            d = 3
            sa = random_support(rng, order=d, max_dim=3, max_elems=6)
            sb = random_support(rng, order=d, max_dim=3, max_elems=6)
            alpha = tuple(F(rng.randint(1, 3)) for _ in range(d))
            beta = tuple(F(rng.randint(1, 3)) for _ in range(d))
            ya = trank(sa, alpha).dual
            yb = trank(sb, beta).dual
            prod = boxtimes(indicator_tensor(sa), indicator_tensor(sb))
            sp = support_of(prod)
            # paired slice loads stay within the paired weights
            for i in range(d):
                for j in range(sa.shape[i]):
                    for jp in range(sb.shape[i]):
                        load = sum(
                            ya[s] * yb[sp_]
                            for s in sa
                            for sp_ in sb
                            if s[i] == j and sp_[i] == jp
                        )
                        assert load <= alpha[i] * beta[i]
            combined = trank(sp, tuple(a * b for a, b in zip(alpha, beta)))
            assert combined.value >= trank(sa, alpha).value * trank(sb, beta).value

    def test_horizontal_product_equality(self):
        rng = random.Random(107)
        for _ in range(10):
            a = indicator_tensor(random_support(rng, order=2, max_dim=3, max_elems=5))
            b = indicator_tensor(random_support(rng, order=3, max_dim=3, max_elems=5))
            joined = trank(support_of(outer(a, b))).value
            assert joined == min(trank(support_of(a)).value, trank(support_of(b)).value)


class TestGrankSearch:
    def test_w_state_attained_at_identity(self):
        v = indicator_tensor(W_SUPPORT)
        assert grank_upper_search(v, budget=30) == F(3, 2)

    def test_diagonal_never_below_two(self):
        diag = SparseTensor((2, 2, 2), {(0, 0, 0): 1, (1, 1, 1): 1})
        assert grank_upper_search(diag, budget=60, seed=4) == 2

    def test_rank_one_reaches_min_weight(self):
        v = SparseTensor((2, 2, 2), {(1, 1, 0): 1})
        assert grank_upper_search(v, (F(2), F(3), F(5)), budget=10) == 2

    def test_zero_tensor(self):
        assert grank_upper_search(SparseTensor((2, 2), {})) == 0

    def test_deterministic(self):
        v = indicator_tensor(CAPSET_SUPPORT)
        a = grank_upper_search(v, budget=25, seed=3)
        b = grank_upper_search(v, budget=25, seed=3)
        assert a == b

    def test_mod_domain_search(self):
        v = SparseTensor((2, 2, 2), {(0, 0, 0): 1, (1, 1, 1): 1}, mod_domain(3))
        assert grank_upper_search(v, budget=30) == 2


class TestNcrk:
    def test_identity_singleton(self):
        assert ncrk_bruteforce(MatrixTuple([[[1, 0], [0, 1]]], 2)) == 2

    def test_e11_singleton(self):
        assert ncrk_bruteforce(MatrixTuple([[[1, 0], [0, 0]]], 2)) == 1

    def test_spanning_tuple(self):
        mats = [
            [[1, 0], [0, 0]],
            [[0, 1], [0, 0]],
            [[0, 0], [1, 0]],
            [[0, 0], [0, 1]],
        ]
        assert ncrk_bruteforce(MatrixTuple(mats, 2)) == 2

    def test_singleton_equals_matrix_rank(self):
        # For one matrix the subspace formula collapses to ordinary rank.
        rng = random.Random(19)
        for p in (2, 3):
            for _ in range(10):
                rows, cols = rng.randint(1, 3), rng.randint(1, 3)
                m = [[rng.randrange(p) for _ in range(cols)] for _ in range(rows)]
                tup = MatrixTuple([m], p)
                assert ncrk_bruteforce(tup) == _rank_mod_p(m, p)

    def test_limit_enforced(self):
        wide = MatrixTuple([[[1] * 25]], 2)
        with pytest.raises(SubspaceLimitError):
            ncrk_bruteforce(wide, limit=1 << 20)

    def test_tensor_construction(self):
        tup = MatrixTuple([[[1, 0], [0, 0]], [[0, 0], [0, 1]]], 2)
        t = matrix_tuple_tensor(tup)
        assert t.shape == (2, 2, 2)
        assert t.entries == {(0, 0, 0): 1, (1, 1, 1): 1}

    def test_search_identity_and_e11(self):
        assert ncrk_via_grank(MatrixTuple([[[1, 0], [0, 1]]], 2)) == 2
        assert ncrk_via_grank(MatrixTuple([[[1, 0], [0, 0]]], 2)) == 1

    def test_search_zero_tuple(self):
        assert ncrk_via_grank(MatrixTuple([[[0, 0], [0, 0]]], 2)) == 0

    def test_search_bounds_bruteforce(self):
        rng = random.Random(55)
        for trial in range(12):
            size = rng.choice((2, 3))
            m = rng.randint(1, 3)
            mats = [
                [[rng.randrange(2) for _ in range(size)] for _ in range(size)]
                for _ in range(m)
            ]
            tup = MatrixTuple(mats, 2)
            brute = ncrk_bruteforce(tup)
            search = ncrk_via_grank(tup, budget=200, seed=trial)
            assert search >= brute
            assert search == brute  # converges at this budget on this corpus
