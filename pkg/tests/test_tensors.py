import json
import random
from fractions import Fraction as F

import numpy as np
import pytest

from stablerank import (
    SparseTensor,
    Support,
    boxplus,
    boxtimes,
    complex_from_json,
    flatten,
    mod_domain,
    mode_transform,
    outer,
    psg_slope,
    support_of,
    to_dense_complex,
    unflatten,
)

W_ENTRIES = {(1, 0, 0): 1, (0, 1, 0): 1, (0, 0, 1): 1}


def w_state():
    return SparseTensor((2, 2, 2), W_ENTRIES)


class TestSupportOf:
    def test_w_state(self):
        s = support_of(w_state())
        assert s.elements == {(1, 0, 0), (0, 1, 0), (0, 0, 1)}

    def test_zero_tensor(self):
        v = SparseTensor((2, 2), {})
        assert support_of(v).elements == frozenset()

    def test_single_entry(self):
        v = SparseTensor((3, 3), {(0, 0): F(5, 7)})
        assert support_of(v).elements == {(0, 0)}

    def test_zero_values_dropped(self):
        v = SparseTensor((2, 2), {(0, 0): 0, (1, 1): 3})
        assert support_of(v).elements == {(1, 1)}

    def test_mod_reduction_drops_multiples(self):
        v = SparseTensor((2, 2), {(0, 0): 3, (0, 1): 4}, mod_domain(3))
        assert v.entries == {(0, 1): 1}


class TestValidation:
    def test_index_out_of_range(self):
        with pytest.raises(ValueError):
            SparseTensor((2, 2), {(2, 0): 1})

    def test_bad_shape(self):
        with pytest.raises(ValueError):
            Support((2, 0), [])

    def test_nonprime_modulus(self):
        with pytest.raises(ValueError):
            SparseTensor((2,), {(0,): 1}, "mod:4")

    def test_domain_mismatch(self):
        a = SparseTensor((2,), {(0,): 1})
        b = SparseTensor((2,), {(0,): 1}, mod_domain(2))
        with pytest.raises(ValueError):
            boxplus(a, b)
        with pytest.raises(ValueError):
            outer(a, b)

    def test_order_mismatch(self):
        a = SparseTensor((2,), {(0,): 1})
        b = SparseTensor((2, 2), {(0, 0): 1})
        with pytest.raises(ValueError):
            boxtimes(a, b)


class TestBoxplus:
    def test_diagonal_from_units(self):
        unit = SparseTensor((1, 1, 1), {(0, 0, 0): 1})
        diag = boxplus(unit, unit)
        assert diag.shape == (2, 2, 2)
        assert diag.entries == {(0, 0, 0): 1, (1, 1, 1): 1}

    def test_empty_summand_pads(self):
        v = w_state()
        padded = boxplus(v, SparseTensor((1, 1, 1), {}))
        assert padded.shape == (3, 3, 3)
        assert padded.entries == v.entries

    def test_support_sizes_add(self):
        v, w = w_state(), w_state()
        assert len(support_of(boxplus(v, w))) == len(support_of(v)) + len(support_of(w))


class TestBoxtimes:
    def test_unit_for_product(self):
        one = SparseTensor((1, 1, 1), {(0, 0, 0): 1})
        v = w_state()
        assert boxtimes(v, one).entries == v.entries

    def test_support_sizes_multiply(self):
        prod = boxtimes(w_state(), w_state())
        assert len(support_of(prod)) == 9

    def test_capset_square_has_49_elements(self):
        from stablerank.capset import base_tensor

        v = base_tensor()
        assert len(support_of(boxtimes(v, v))) == 49

    def test_index_pairing(self):
        a = SparseTensor((2,), {(1,): F(2)})
        b = SparseTensor((3,), {(2,): F(5)})
        prod = boxtimes(a, b)
        assert prod.entries == {(1 * 3 + 2,): F(10)}

    def test_associative(self):
        rng = random.Random(0)
        tensors = []
        for _ in range(3):
            shape = (rng.randint(1, 2), rng.randint(1, 3))
            entries = {
                (i, j): rng.randint(1, 5)
                for i in range(shape[0])
                for j in range(shape[1])
                if rng.random() < 0.6
            }
            tensors.append(SparseTensor(shape, entries))
        a, b, c = tensors
        left = boxtimes(boxtimes(a, b), c)
        right = boxtimes(a, boxtimes(b, c))
        assert left.shape == right.shape and left.entries == right.entries


class TestOuter:
    def test_associative(self):
        a = SparseTensor((2,), {(0,): F(2), (1,): F(-1)})
        b = SparseTensor((3,), {(2,): F(3)})
        c = SparseTensor((2, 2), {(1, 0): F(1, 2)})
        left = outer(outer(a, b), c)
        right = outer(a, outer(b, c))
        assert left.shape == right.shape and left.entries == right.entries

    def test_rank_one_matrix(self):
        a = SparseTensor((2,), {(0,): F(2), (1,): F(3)})
        b = SparseTensor((2,), {(0,): F(5), (1,): F(7)})
        m = outer(a, b)
        assert m.order == 2
        assert m.entries[(1, 0)] == F(15)

    def test_support_sizes_multiply(self):
        prod = outer(w_state(), w_state())
        assert prod.order == 6
        assert len(support_of(prod)) == 9


class TestPsgSlope:
    def test_w_state_slope(self):
        s = support_of(w_state())
        x = [[1, 0], [1, 0], [1, 0]]
        assert psg_slope(x, s, (1, 1, 1)) == F(3, 2)

    def test_single_element(self):
        s = Support((2, 2), [(0, 0)])
        assert psg_slope([[1, 0], [0, 0]], s, (1, 1)) == 1

    def test_scaling_invariance(self):
        s = support_of(w_state())
        x = [[2, 1], [1, 0], [3, 2]]
        base = psg_slope(x, s, (1, F(1, 2), 1))
        for k in (2, 3, 7):
            scaled = [[k * e for e in row] for row in x]
            assert psg_slope(scaled, s, (1, F(1, 2), 1)) == base

    def test_empty_support_rejected(self):
        with pytest.raises(ValueError, match="no slope"):
            psg_slope([[1, 1]], Support((2,), []), (1,))

    def test_nonvanishing_rejected(self):
        s = Support((2,), [(1,)])
        with pytest.raises(ValueError, match="vanish"):
            psg_slope([[1, 0]], s, (1,))


class TestFlatten:
    def test_w_state_golden(self):
        dense = to_dense_complex(w_state())
        expected = np.array([[0, 1, 1, 0], [1, 0, 0, 0]], dtype=complex)
        assert np.array_equal(flatten(dense, 0), expected)

    def test_matrix_mode0_is_identity_reshape(self):
        a = np.arange(6.0).reshape(2, 3)
        assert np.array_equal(flatten(a, 0), a)

    def test_rank_one_tensor_flattens_to_rank_one(self):
        rng = np.random.default_rng(5)
        a, b, c = rng.normal(size=3), rng.normal(size=4), rng.normal(size=2)
        t = np.einsum("i,j,k->ijk", a, b, c)
        for mode in range(3):
            assert np.linalg.matrix_rank(flatten(t, mode)) == 1

    def test_roundtrip_every_mode(self):
        rng = np.random.default_rng(11)
        t = rng.normal(size=(2, 3, 4)) + 1j * rng.normal(size=(2, 3, 4))
        for mode in range(3):
            back = unflatten(flatten(t, mode), t.shape, mode)
            assert np.array_equal(back, t)

    def test_mode_out_of_range(self):
        with pytest.raises(ValueError):
            flatten(np.zeros((2, 2)), 2)


class TestModeTransform:
    def test_identity(self):
        v = w_state()
        eye = [[1, 0], [0, 1]]
        assert mode_transform(v, [eye, eye, eye]).entries == v.entries

    def test_matches_dense_oracle(self):
        rng = random.Random(3)
        shape = (2, 3, 2)
        entries = {
            idx: F(rng.randint(-3, 3))
            for idx in [(i, j, k) for i in range(2) for j in range(3) for k in range(2)]
            if rng.random() < 0.5
        }
        v = SparseTensor(shape, entries)
        mats = [
            [[rng.randint(-2, 2) for _ in range(n)] for _ in range(n)] for n in shape
        ]
        got = mode_transform(v, mats)
        dense = np.zeros(shape)
        for idx, val in v.entries.items():
            dense[idx] = float(val)
        expect = np.einsum(
            "ai,bj,ck,ijk->abc",
            np.array(mats[0], float),
            np.array(mats[1], float),
            np.array(mats[2], float),
            dense,
        )
        result = np.zeros(shape)
        for idx, val in got.entries.items():
            result[idx] = float(val)
        assert np.allclose(result, expect)

    def test_mod_arithmetic(self):
        v = SparseTensor((2,), {(0,): 1, (1,): 1}, mod_domain(2))
        summed = mode_transform(v, [[[1, 1], [0, 1]]])
        # first output row is 1 + 1 = 0 mod 2
        assert summed.entries == {(1,): 1}


class TestJson:
    def test_tensor_roundtrip(self):
        v = SparseTensor((2, 2), {(0, 1): F(3, 7), (1, 0): F(-2)})
        data = json.loads(json.dumps(v.to_json()))
        back = SparseTensor.from_json(data)
        assert back.shape == v.shape and back.entries == v.entries
        assert data["entries"][0]["val"] == "3/7"

    def test_mod_tensor_roundtrip(self):
        v = SparseTensor((3,), {(2,): 2}, mod_domain(3))
        back = SparseTensor.from_json(v.to_json())
        assert back.domain == "mod:3" and back.entries == v.entries

    def test_support_roundtrip(self):
        s = support_of(w_state())
        back = Support.from_json(json.loads(json.dumps(s.to_json())))
        assert back == s

    def test_complex_entries(self):
        data = {
            "shape": [2, 2],
            "domain": "complex",
            "entries": [{"idx": [0, 1], "val": [1.5, -2.0]}],
        }
        arr = complex_from_json(data)
        assert arr[0, 1] == 1.5 - 2.0j

    def test_rational_coerced_to_complex(self):
        arr = complex_from_json(w_state().to_json())
        assert arr[1, 0, 0] == 1.0

    def test_mod_rejected_for_complex(self):
        v = SparseTensor((2,), {(0,): 1}, mod_domain(2))
        with pytest.raises(ValueError):
            complex_from_json(v.to_json())
