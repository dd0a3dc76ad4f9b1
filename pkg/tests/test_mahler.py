from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from heightlab.core import DiagonalForm, HomogeneousForm
from heightlab.mahler import hypersurface_weil_height, mahler_gap, mahler_measure


def form(coeffs: dict) -> HomogeneousForm:
    return HomogeneousForm.from_coefficients(coeffs)


def multiply(f: HomogeneousForm, g: HomogeneousForm) -> HomogeneousForm:
    out: dict = {}
    for e1, c1 in f.terms:
        for e2, c2 in g.terms:
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = out.get(e, 0) + c1 * c2
    return form({e: c for e, c in out.items() if c})


def smyth_constant() -> float:
    # m(1 + x + y) = (3 sqrt 3 / 4 pi) L(chi_{-3}, 2)
    L = (special.zeta(2, 1 / 3) - special.zeta(2, 2 / 3)) / 9
    return 3 * math.sqrt(3) / (4 * math.pi) * L


LINEAR3 = form({(1, 0, 0): 1, (0, 1, 0): 1, (0, 0, 1): 1})
FERMAT = DiagonalForm(3, 2, (1, 1, 1, 1))


def test_simple_values():
    assert mahler_measure(form({(1,): 1})).m == 0
    assert mahler_measure(form({(1, 0): 1, (0, 1): 1})).m == pytest.approx(0, abs=1e-14)
    for a in (1, 2, 7, 1000):
        assert mahler_measure(form({(1, 0): a, (0, 1): 1})).m == pytest.approx(math.log(a), abs=1e-14)


def test_three_term_linear_form_matches_smyth():
    rep = mahler_measure(LINEAR3)
    assert rep.m == pytest.approx(smyth_constant(), abs=1e-11)
    assert rep.m == pytest.approx(0.3230659472194505, abs=1e-11)
    assert rep.coeff_gap == pytest.approx(rep.m, abs=1e-15)


def test_gap_examples():
    assert mahler_gap(form({(1, 0): 1, (0, 1): 1})) == pytest.approx(0, abs=1e-14)
    assert mahler_gap(form({(1, 0): 2, (0, 1): 1})) == pytest.approx(0, abs=1e-14)
    assert mahler_gap(form({(1,): 5})) == pytest.approx(0, abs=1e-14)


@pytest.mark.parametrize("a", [5, 10, 100, 12345])
def test_diagonal_family_dominant_coefficient(a):
    assert hypersurface_weil_height(DiagonalForm.xa(4, 3, a)) == pytest.approx(math.log(a), abs=1e-13)


def test_diagonal_family_grows_like_log_a():
    import numpy as np
    a = np.array([2, 3, 8, 30, 300])
    m = [mahler_measure(DiagonalForm.xa(2, 1, int(x))).m for x in a]
    slope = np.polyfit(np.log(a[2:]), m[2:], 1)[0]
    assert slope == pytest.approx(1.0, abs=1e-9)
    assert all(x < y for x, y in zip(m, m[1:]))


def test_fermat_cubic_stable_across_resolutions_and_methods():
    a = mahler_measure(FERMAT, resolution=128)
    b = mahler_measure(FERMAT, resolution=256)
    q = mahler_measure(FERMAT, method="qmc", resolution=17)
    assert math.isfinite(a.m)
    assert abs(a.m - b.m) < 1e-4
    assert abs(q.m - b.m) < 5e-3
    assert b.m == pytest.approx(0.42628, abs=1e-3)


small = st.dictionaries(st.tuples(st.integers(0, 2), st.integers(0, 2)).filter(lambda e: sum(e) == 2),
                        st.integers(-4, 4).filter(bool), min_size=1)


@settings(max_examples=25, deadline=None)
@given(small, small)
def test_multiplicativity(c1, c2):
    f, g = form(c1), form(c2)
    fg = multiply(f, g)
    assert mahler_measure(fg).m == pytest.approx(mahler_measure(f).m + mahler_measure(g).m, abs=1e-8)


@settings(max_examples=25, deadline=None)
@given(small, st.integers(-9, 9).filter(bool))
def test_scaling_is_exact(c, k):
    f = form(c)
    kf = form({e: k * v for e, v in c.items()})
    assert mahler_measure(kf).m == pytest.approx(math.log(abs(k)) + mahler_measure(f).m, abs=1e-12)


def test_qmc_scaling_within_error():
    f = form({(2, 0, 0): 1, (1, 1, 0): 2, (0, 1, 1): -1, (0, 0, 2): 3})
    f3 = form({e: 3 * c for e, c in f.terms})
    a = mahler_measure(f, method="qmc", resolution=14)
    b = mahler_measure(f3, method="qmc", resolution=14)
    assert b.m == pytest.approx(a.m + math.log(3), abs=1e-12)


@pytest.mark.parametrize("perm", [(1, 0, 2), (2, 1, 0), (1, 2, 0)])
def test_permutation_invariance(perm):
    f = form({(2, 0, 0): 1, (1, 1, 0): -3, (0, 1, 1): 2, (0, 0, 2): 1})
    assert mahler_measure(f.permuted(perm)).m == pytest.approx(mahler_measure(f).m, abs=1e-8)


def test_repeated_binary_factors_are_exact():
    # (x^2 + y^2)^2 and (x - y)^3 (x + 2y)^2: double roots on the unit circle
    assert mahler_measure(form({(4, 0): 1, (2, 2): 2, (0, 4): 1})).m == 0
    f = form({(5, 0): 1, (4, 1): 1, (3, 2): -5, (2, 3): -1, (1, 4): 8, (0, 5): -4})
    assert mahler_measure(f).m == pytest.approx(2 * math.log(2), abs=1e-14)
