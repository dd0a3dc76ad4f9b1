from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heightlab.core import (
    DiagonalForm, Gaussian, HomogeneousForm, MetricSpec, ProjectiveSpace, UNITS,
    anticanonical_twist, dimension, dumps, eval_form, eval_form_array, gaussian_gcd,
    is_prime, linear_substitution, lp_norm, normalize_gaussian, normalize_point,
    parse_gaussian, parse_rational, prime_factors, primes_up_to, variety_from_dict,
)
from heightlab.errors import AllZero, DimensionMismatch, InputError

PYTH = HomogeneousForm.from_coefficients({(2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 2): -1})


def test_normalize_point_examples():
    assert normalize_point([2, 4, 6]).coords == (1, 2, 3)
    assert normalize_point([1, "1/2"]).coords == (2, 1)
    assert normalize_point([0, -5]).coords == (0, 1)
    assert normalize_point(["-3/4", "1/6"]).coords == (9, -2)


def test_normalize_point_rejects_bad_input():
    with pytest.raises(AllZero):
        normalize_point([0, 0, 0])
    with pytest.raises(InputError):
        normalize_point([0.5, 1])
    with pytest.raises(InputError):
        parse_rational("abc")


@given(st.lists(st.fractions(max_denominator=50).filter(lambda q: abs(q) < 1000),
                min_size=1, max_size=5),
       st.fractions(min_value=Fraction(1, 30), max_value=30, max_denominator=30),
       st.booleans())
def test_normalize_point_is_projectively_invariant(coords, scale, negate):
    if all(c == 0 for c in coords):
        return
    s = -scale if negate else scale
    a = normalize_point(coords)
    b = normalize_point([c * s for c in coords])
    assert a == b
    assert math.gcd(*a.coords) == 1
    assert next(c for c in a.coords if c) > 0


def test_gaussian_examples():
    # 2 = (1+i)(1-i), so 1+i is a common factor
    assert normalize_gaussian(["1+i", 2]).coords == (Gaussian(1, 0), Gaussian(1, -1))
    assert normalize_gaussian(["1+i", 3]).coords == (Gaussian(1, 1), Gaussian(3, 0))
    assert normalize_gaussian(["2i", 2]).coords == (Gaussian(1, 0), Gaussian(0, -1))
    with pytest.raises(AllZero):
        normalize_gaussian([0, 0])
    assert parse_gaussian("1/2-3i") == (Fraction(1, 2), Fraction(-3))
    assert parse_gaussian("i") == (0, 1)


def test_gaussian_normalization_matches_unit_brute_force():
    # (2i, 2): dividing by 2 gives (i, 1); the unit making the first entry
    # canonical (re > 0, im >= 0) is found by trying all four.
    base = (Gaussian(0, 1), Gaussian(1, 0))
    cands = [tuple(c * u for c in base) for u in UNITS]
    canon = [c for c in cands if c[0].re > 0 and c[0].im >= 0]
    assert len(canon) == 1
    assert normalize_gaussian(["2i", 2]).coords == canon[0]


gauss = st.builds(Gaussian, st.integers(-40, 40), st.integers(-40, 40))


@given(gauss, gauss)
def test_gaussian_gcd_divides_both(a, b):
    g = gaussian_gcd(a, b)
    if not a and not b:
        assert not g
        return
    for x in (a, b):
        _, r = x.divmod(g)
        assert not r
    # any common divisor of small norm divides g
    for d in (Gaussian(1, 1), Gaussian(2, 1), Gaussian(3, 0)):
        if not a.divmod(d)[1] and not b.divmod(d)[1]:
            assert not g.divmod(d)[1]


@given(gauss, gauss.filter(bool))
def test_gaussian_division_remainder_is_small(a, b):
    q, r = a.divmod(b)
    assert q * b + r == a
    assert r.norm() < b.norm()


def test_eval_form_examples():
    assert eval_form(PYTH, (3, 4, 5)) == 0
    assert eval_form(PYTH, (1, 1, 1)) == 1
    f = DiagonalForm(4, 4, (-2, 1, 1, 1, 1, 1)).to_form()
    assert eval_form(f, (1, 1, 1, 0, 0, 0)) == 0


@given(st.lists(st.tuples(st.integers(-50, 50), st.integers(-50, 50), st.integers(-50, 50)),
                min_size=1, max_size=20))
def test_eval_form_array_matches_scalar(rows):
    X = np.array(rows, dtype=np.int64)
    f = HomogeneousForm.from_coefficients({(3, 0, 0): 2, (1, 1, 1): -5, (0, 1, 2): 7})
    vals = eval_form_array(f, X)
    assert [int(v) for v in vals] == [eval_form(f, r) for r in rows]
    mod = eval_form_array(f, X, 97)
    assert [int(v) for v in mod] == [eval_form(f, r) % 97 for r in rows]


def test_form_roundtrip_and_validation():
    assert HomogeneousForm.from_dict(PYTH.to_dict()) == PYTH
    with pytest.raises(InputError):
        HomogeneousForm(2, 3, (((1, 0, 0), 1),))
    with pytest.raises(DimensionMismatch):
        DiagonalForm(2, 2, (1, 1, 1))
    X = DiagonalForm.xa(4, 3, 21)
    assert X.a == (-21, 1, 1, 1, 1) and X.k_ac == 1 and X.fano
    assert variety_from_dict(X.to_dict()) == X
    assert variety_from_dict({"projective_space": 2}) == ProjectiveSpace(2)
    assert dimension(X) == 3 and anticanonical_twist(ProjectiveSpace(2)) == 3


@settings(max_examples=50)
@given(st.lists(st.integers(-3, 3), min_size=9, max_size=9),
       st.tuples(st.integers(-9, 9), st.integers(-9, 9), st.integers(-9, 9)))
def test_linear_substitution_agrees_with_composition(entries, y):
    M = [entries[0:3], entries[3:6], entries[6:9]]
    f = HomogeneousForm.from_coefficients({(2, 0, 0): 1, (1, 1, 0): 3, (0, 0, 2): -2})
    x = [sum(M[i][j] * y[j] for j in range(3)) for i in range(3)]
    try:
        g = linear_substitution(f, M)
    except InputError:
        # the substituted form vanished identically
        assert all(eval_form(f, [sum(M[i][j] * v[j] for j in range(3)) for i in range(3)]) == 0
                   for v in itertools.product(range(-2, 3), repeat=3))
        return
    assert eval_form(g, y) == eval_form(f, x)


def test_lp_norm_examples():
    assert lp_norm((1, 1), math.inf) == 1
    assert lp_norm((1, 1), 2) == pytest.approx(math.sqrt(2), rel=1e-15)
    assert lp_norm((3, 4), 2) == pytest.approx(5, rel=1e-15)
    assert lp_norm((1 + 1j, 1), math.inf) == pytest.approx(math.sqrt(2), rel=1e-15)


def test_metric_parse():
    assert MetricSpec.parse("weil").name == "weil"
    assert MetricSpec.parse("fs").p == 2
    assert MetricSpec.parse("lp:3").p == 3
    with pytest.raises(InputError):
        MetricSpec.parse("sup")
    with pytest.raises(InputError):
        MetricSpec(0.5)


def test_primes():
    ps = primes_up_to(200)
    assert ps == [n for n in range(201) if is_prime(n)]
    assert prime_factors(84) == [2, 3, 7]
    assert prime_factors(97) == [97]


def test_dumps_is_plain_json():
    text = dumps({"q": Fraction(1, 3), "x": math.inf, "n": np.int64(3)})
    assert '"1/3"' in text and '"inf"' in text and '"n": 3' in text
