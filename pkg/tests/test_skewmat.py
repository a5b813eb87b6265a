import json
import random
from fractions import Fraction
from itertools import permutations

import numpy as np
import pytest

from nctlab.alphapoly import AlphaPoly
from nctlab.errors import IndexOutOfRange, ModeMismatch, OddDimension
from nctlab import skewmat
from nctlab.skewmat import (
    IndexSet,
    SkewMatrix,
    enumerate_index_sets,
    exact_det,
    minor,
    pfaffian,
    pfaffian_minor,
)


def perfect_matching_pfaffian(A):
    """Brute-force oracle: signed sum over perfect matchings.

    Sums (-1)^|xi| * prod a_{xi(2s-1), xi(2s)} over permutations with
    xi(2s-1) < xi(2s) and xi(1) < xi(3) < ... ; independent of the
    recursive expansion used by the library.
    """
    n = A.n
    total = None
    for perm in permutations(range(1, n + 1)):
        if any(perm[2 * s] > perm[2 * s + 1] for s in range(n // 2)):
            continue
        if any(perm[2 * s] > perm[2 * s + 2] for s in range(n // 2 - 1)):
            continue
        sign = _permutation_sign(perm)
        term = sign
        for s in range(n // 2):
            term = term * A.entry(perm[2 * s], perm[2 * s + 1])
        total = term if total is None else total + term
    return total


def _permutation_sign(perm):
    seen = [False] * len(perm)
    sign = 1
    for i in range(len(perm)):
        if seen[i]:
            continue
        j = i
        length = 0
        while not seen[j]:
            seen[j] = True
            j = perm[j] - 1
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def random_rational_skew(n, rng, denom=12):
    upper = {
        (j, k): Fraction(rng.randint(-denom, denom), rng.randint(1, denom))
        for j in range(1, n + 1)
        for k in range(j + 1, n + 1)
    }
    return SkewMatrix.from_upper(n, upper, "rational")


def symplectic_block(p):
    upper = {(2 * i + 1, 2 * i + 2): 1 for i in range(p)}
    return SkewMatrix.from_upper(2 * p, upper, "rational")


def test_pfaffian_normalization_on_symplectic_blocks():
    for p in (1, 2, 3, 4):
        assert pfaffian(symplectic_block(p)).value == 1


def test_pfaffian_2x2_is_top_entry():
    A = SkewMatrix.from_upper(2, {(1, 2): Fraction(3, 7)}, "rational")
    assert pfaffian(A).value == Fraction(3, 7)


def test_pfaffian_4x4_closed_form():
    names = {}
    rng = random.Random(7)
    upper = {}
    for j in range(1, 5):
        for k in range(j + 1, 5):
            v = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
            upper[(j, k)] = v
            names[(j, k)] = v
    A = SkewMatrix.from_upper(4, upper, "rational")
    expected = (
        names[(1, 2)] * names[(3, 4)]
        - names[(1, 3)] * names[(2, 4)]
        + names[(1, 4)] * names[(2, 3)]
    )
    assert pfaffian(A).value == expected


def test_pfaffian_zero_matrix():
    A = SkewMatrix.from_upper(4, {}, "rational")
    assert pfaffian(A).value == 0


def test_pfaffian_odd_dimension_rejected():
    A = SkewMatrix.from_upper(3, {(1, 2): 1}, "rational")
    with pytest.raises(OddDimension):
        pfaffian(A)


def test_mode_mismatch_rejected():
    with pytest.raises(ModeMismatch):
        SkewMatrix.from_upper(2, {(1, 2): Fraction(1, 2)}, "float")
    with pytest.raises(ModeMismatch):
        SkewMatrix.from_upper(2, {(1, 2): 0.5}, "rational")


def test_pfaffian_matches_matching_sum_oracle():
    rng = random.Random(11)
    for n in (2, 4, 6):
        for _ in range(8):
            A = random_rational_skew(n, rng)
            assert pfaffian(A).value == perfect_matching_pfaffian(A)


def test_pfaffian_squared_equals_det_exactly():
    rng = random.Random(13)
    for n in (2, 4, 6, 8):
        for _ in range(6):
            A = random_rational_skew(n, rng)
            pf = pfaffian(A).value
            assert pf * pf == exact_det(A.rows)


def test_congruence_transform_scales_by_det():
    rng = random.Random(17)
    for n in (2, 4, 6):
        for _ in range(5):
            A = random_rational_skew(n, rng)
            B = [[Fraction(rng.randint(-3, 3)) for _ in range(n)] for _ in range(n)]
            rows = [
                [
                    sum(B[i][a] * A.rows[a][b] * B[j][b] for a in range(n) for b in range(n))
                    for j in range(n)
                ]
                for i in range(n)
            ]
            conjugated = SkewMatrix(rows, "rational")
            assert pfaffian(conjugated).value == exact_det(B) * pfaffian(A).value


def test_minor_full_set_returns_matrix_itself():
    rng = random.Random(19)
    A = random_rational_skew(4, rng)
    assert minor(A, IndexSet.of(1, 2, 3, 4)) == A


def test_minor_pair_selection():
    A = random_rational_skew(4, random.Random(23))
    M = minor(A, IndexSet.of(1, 3))
    assert M.n == 2
    assert M.entry(1, 2) == A.entry(1, 3)


def test_minor_leading_block():
    A = random_rational_skew(6, random.Random(29))
    M = minor(A, IndexSet.of(1, 2, 3, 4))
    for j in range(1, 5):
        for k in range(1, 5):
            assert M.entry(j, k) == A.entry(j, k)


def test_minor_index_out_of_range():
    A = random_rational_skew(4, random.Random(31))
    with pytest.raises(IndexOutOfRange):
        minor(A, IndexSet.of(2, 5))


def test_pfaffian_minor_pairs_give_entries():
    A = random_rational_skew(6, random.Random(37))
    for j in range(1, 7):
        for k in range(j + 1, 7):
            assert pfaffian_minor(A, IndexSet.of(j, k)).value == A.entry(j, k)


def test_pfaffian_minor_float_matches_oracle():
    rng = random.Random(41)
    upper = {
        (j, k): rng.randint(-11, 11) / rng.randint(1, 11)
        for j in range(1, 7)
        for k in range(j + 1, 7)
    }
    A = SkewMatrix.from_upper(6, upper, "float")
    I = IndexSet.of(1, 2, 3, 4)
    got = pfaffian_minor(A, I).value
    want = perfect_matching_pfaffian(minor(A, I))
    assert abs(got - want) <= 1e-12 * max(1.0, abs(want))


def test_enumerate_index_sets_counts():
    assert [i.indices for i in enumerate_index_sets(2)] == [(1, 2)]
    sets4 = enumerate_index_sets(4)
    assert len(sets4) == 7
    assert sum(1 for i in sets4 if i.cardinality == 2) == 6
    assert sets4[-1].indices == (1, 2, 3, 4)
    assert len(enumerate_index_sets(6)) == 31


def test_index_set_validation():
    with pytest.raises(ValueError):
        IndexSet.of(1, 2, 3)
    with pytest.raises(ValueError):
        IndexSet.of(2, 1)
    with pytest.raises(ValueError):
        IndexSet.of(0, 1)


def test_alpha_mode_pfaffian_is_polynomial():
    upper = {
        (j, k): AlphaPoly.monomial(e)
        for e, (j, k) in enumerate(
            [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)], start=1
        )
    }
    A = SkewMatrix.from_upper(4, upper, "alpha")
    pf = pfaffian(A).value
    # a^(s12+s34) - a^(s13+s24) + a^(s14+s23)
    assert pf == AlphaPoly({1 + 6: 1, 2 + 5: -1, 3 + 4: 1})


def test_float_pfaffian_conditioning_warning():
    upper = {(1, 2): 1e-9, (1, 3): 1e9, (1, 4): 1.0, (2, 3): 1.0,
             (2, 4): 1e9, (3, 4): 1e-9}
    A = SkewMatrix.from_upper(4, upper, "float")
    with warnings_or_clean():
        pfaffian(A)


class warnings_or_clean:
    """Tolerate (but do not require) the conditioning warning."""

    def __enter__(self):
        import warnings

        self._cm = warnings.catch_warnings()
        self._cm.__enter__()
        import warnings as w

        w.simplefilter("ignore", RuntimeWarning)
        return self

    def __exit__(self, *exc):
        return self._cm.__exit__(*exc)


def test_json_roundtrip_rational():
    A = random_rational_skew(4, random.Random(43))
    data = json.loads(json.dumps(skewmat.to_json_dict(A)))
    assert skewmat.from_json_dict(data) == A


def test_json_roundtrip_alpha():
    upper = {(1, 2): AlphaPoly({3: Fraction(1, 2)}), (1, 3): AlphaPoly.monomial(5)}
    A = SkewMatrix.from_upper(4, upper, "alpha")
    data = json.loads(json.dumps(skewmat.to_json_dict(A)))
    assert skewmat.from_json_dict(data) == A


def test_json_roundtrip_float():
    rng = np.random.default_rng(5)
    raw = rng.standard_normal((4, 4))
    A = SkewMatrix((raw - raw.T) / 2, "float")
    data = json.loads(json.dumps(skewmat.to_json_dict(A)))
    B = skewmat.from_json_dict(data)
    assert np.allclose(B.to_numpy(), A.to_numpy())
