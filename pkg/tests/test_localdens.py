from __future__ import annotations

import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heightlab.core import (DiagonalForm, HomogeneousForm, ProjectiveSpace, eval_form_array,
                            linear_substitution, primes_up_to)
from heightlab.errors import BadReduction, InputError
from heightlab.localdens import (
    count_primitive_affine, count_projective_mod, deligne_check, euler_product, good_reduction,
    good_reduction_diag, local_density, pi_n, projective_space_count,
)


def form(coeffs: dict) -> HomogeneousForm:
    return HomogeneousForm.from_coefficients(coeffs)


PYTH = form({(2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 2): -1})
SPLIT_CONIC = form({(1, 1, 0): 1, (0, 0, 2): -1})
FERMAT = DiagonalForm(3, 2, (1, 1, 1, 1))
X3 = DiagonalForm.xa(4, 3, 3)


def brute_projective(f: HomogeneousForm, p: int, r: int) -> int:
    """Primitive zeros of f in (Z/p^r)^N divided by the unit group, by full enumeration."""
    q = p**r
    N = f.nvars
    total = 0
    chunk = 1 << 18
    for start in range(0, q**N, chunk):
        idx = np.arange(start, min(q**N, start + chunk), dtype=np.int64)
        X = np.empty((idx.size, N), dtype=np.int64)
        for j in range(N):
            X[:, j] = idx % q
            idx = idx // q
        prim = np.any(X % p != 0, axis=1)
        zero = eval_form_array(f, X, q) == 0
        total += int(np.sum(prim & zero))
    units = p ** (r - 1) * (p - 1)
    assert total % units == 0
    return total // units


def random_unimodular(n: int, rng: random.Random, steps: int = 12) -> list[list[int]]:
    M = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(steps):
        i, j = rng.sample(range(n), 2)
        c = rng.choice([-2, -1, 1, 2])
        for k in range(n):
            M[i][k] += c * M[j][k]
    return M


def test_projective_space_counts():
    assert count_projective_mod(ProjectiveSpace(2), 3, 1) == 13
    for p in (2, 3, 5, 7):
        for m in (1, 2, 3):
            for r in (1, 2, 3):
                c = projective_space_count(m, p, r)
                assert Fraction(c, p ** (r * m)) == Fraction(pi_n(m, p), p**m)


@pytest.mark.parametrize("p", [q for q in primes_up_to(50)])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_projective_space_density(p, n):
    mu = local_density(ProjectiveSpace(n), p).mu_p
    assert mu == sum(Fraction(1, p**k) for k in range(n + 1))


def test_small_examples_against_brute_force():
    assert count_projective_mod(PYTH, 3, 1) == 4 == brute_projective(PYTH, 3, 1)
    ld = local_density(PYTH, 5)
    assert ld.mu_p == Fraction(6, 5) and ld.r_used == 1 and ld.stabilized


@pytest.mark.parametrize("f", [PYTH, SPLIT_CONIC, form({(3, 0, 0): 1, (0, 3, 0): 2, (0, 0, 3): 4}),
                               form({(2, 0, 0): 1, (0, 1, 1): 3, (0, 0, 2): 6}),
                               form({(2, 0, 0, 0): 1, (0, 2, 0, 0): 1, (0, 0, 2, 0): 1,
                                     (0, 0, 0, 2): -7})])
@pytest.mark.parametrize("p,r", [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (5, 2)])
def test_lifting_matches_brute_force(f, p, r):
    if (p**r) ** f.nvars > 4 * 10**6:
        pytest.skip("brute force too large")
    assert count_projective_mod(f, p, r) == brute_projective(f, p, r)


@pytest.mark.parametrize("f", [PYTH, SPLIT_CONIC, form({(2, 0, 0): 3, (0, 1, 1): 1, (1, 0, 1): 2})])
@pytest.mark.parametrize("p", [2, 3, 5])
def test_density_matches_brute_force_once_stable(f, p):
    ld = local_density(f, p)
    assert ld.stabilized
    r = ld.r_used + 1
    if (p**r) ** f.nvars <= 4 * 10**6:
        assert Fraction(brute_projective(f, p, r), p ** (r * (f.nvars - 2))) == ld.mu_p


def test_diagonal_family_bad_prime_density():
    ld = local_density(X3, 3)
    assert ld.mu_p == Fraction(16, 9) == Fraction(3**-2) * 0 + Fraction((3 + 1) ** 2, 3**2)
    assert ld.stabilized
    # independent exhaustive counts mod 9 and mod 27
    for r in (2, 3):
        assert Fraction(brute_projective(X3.to_form(), 3, r), 3 ** (3 * r)) == Fraction(16, 9)
    assert count_projective_mod(X3, 3, 4) == 944784 == Fraction(16, 9) * 3**12


def test_diagonal_family_p_adically_pointless():
    # fourth powers mod 5 are 0 or 1, so x1..x4 vanish mod 5 and then 5 | x0
    X = DiagonalForm.xa(4, 3, 5)
    assert count_projective_mod(X, 5, 1) == brute_projective(X.to_form(), 5, 1) == 1
    assert count_projective_mod(X, 5, 2) == brute_projective(X.to_form(), 5, 2) == 0
    assert local_density(X, 5).mu_p == 0


@pytest.mark.parametrize("a,p", [(3, 3), (21, 3), (21, 7), (33, 11)])
def test_diagonal_family_bad_prime_formula(a, p):
    ld = local_density(DiagonalForm.xa(4, 3, a), p)
    assert ld.mu_p == Fraction((p + 1) ** 2, p**2)
    assert ld.mu_p <= 4


def test_good_reduction_examples():
    f = DiagonalForm(4, 3, (-3, 1, 1, 1, 1))
    assert good_reduction_diag(f, 5)
    assert not good_reduction_diag(f, 3)
    assert not good_reduction_diag(f, 2)
    assert good_reduction(SPLIT_CONIC, 2)
    assert not good_reduction(PYTH, 2)
    assert good_reduction(PYTH, 3)


@pytest.mark.parametrize("p", [3, 5, 7, 11])
def test_hensel_consistency_at_good_primes(p):
    for f in (PYTH, FERMAT.to_form()):
        if not good_reduction(f, p) or (p**2) ** f.nvars > 2 * 10**7:
            continue
        c1 = count_projective_mod(f, p, 1)
        c2 = count_projective_mod(f, p, 2)
        n = f.nvars - 2
        assert Fraction(c1, p**n) == Fraction(c2, p ** (2 * n))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([2, 3, 5]), st.sampled_from([1, 2]))
def test_unimodular_invariance(seed, p, r):
    rng = random.Random(seed)
    f = form({(2, 0, 0): 1, (1, 1, 0): 1, (0, 0, 2): -3})
    g = linear_substitution(f, random_unimodular(3, rng))
    assert count_projective_mod(f, p, r) == count_projective_mod(g, p, r)


@pytest.mark.parametrize("p,r", [(2, 3), (3, 2), (5, 2), (7, 1)])
def test_projective_affine_consistency(p, r):
    for f in (PYTH, SPLIT_CONIC):
        assert count_primitive_affine(f, p, r) == count_projective_mod(f, p, r) * p ** (r - 1) * (p - 1)


def test_euler_product_conic_telescopes():
    rep = euler_product(SPLIT_CONIC, 500)
    for p, fac in rep.factors:
        assert fac == 1 - Fraction(1, p * p)
    oracle = math.prod(1 - 1 / p**2 for p in primes_up_to(500))
    assert rep.value == pytest.approx(oracle, rel=1e-12)
    assert abs(rep.value - 6 / math.pi**2) < 2e-3


@pytest.mark.parametrize("n", [1, 2])
def test_euler_product_projective_space(n):
    rep = euler_product(ProjectiveSpace(n), 300)
    for p, fac in rep.factors:
        assert fac == 1 - Fraction(1, p ** (n + 1))


def test_fermat_cubic_factors_match_point_counts():
    rep = euler_product(FERMAT, 60)
    assert not rep.flagged
    acc = 1.0
    for (p, fac), part in zip(rep.factors, rep.partial_products):
        if p != 3:
            c = deligne_check(FERMAT, p).count
            assert fac == (1 - Fraction(1, p)) * Fraction(c, p * p)
        acc *= float(fac)
        assert part == pytest.approx(acc, rel=1e-12)
        assert 0 < part < 100


def test_deligne_conic_exact():
    for p in primes_up_to(50):
        rep = deligne_check(SPLIT_CONIC, p)
        assert rep.count == p + 1 and rep.deviation == 0


def test_deligne_projective_space():
    assert deligne_check(ProjectiveSpace(3), 7).deviation == 0


def test_deligne_fermat_against_brute_force():
    rep = deligne_check(FERMAT, 7)
    assert rep.count == brute_projective(FERMAT.to_form(), 7, 1)
    assert rep.deviation == abs(rep.count - 57) / 7
    with pytest.raises(BadReduction):
        deligne_check(FERMAT, 3)


def test_errors():
    with pytest.raises(InputError):
        local_density(PYTH, 4)
    with pytest.raises(InputError):
        count_projective_mod(PYTH, 3, 0)
