from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heightlab.core import (DiagonalForm, HomogeneousForm, MetricSpec, ProjectiveSpace,
                            eval_form, eval_form_array, normalize_point)
from heightlab.enumeration import (
    LinearSubvariety, count_points, fit_theta, min_height_growth, min_point, pointless_certificate,
)
from heightlab.errors import InputError, InsufficientData


def form(coeffs: dict) -> HomogeneousForm:
    return HomogeneousForm.from_coefficients(coeffs)


CONIC2 = form({(2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 2): -2})
PYTH = form({(2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 2): -1})


def brute_points(f, nvars: int, T: int) -> set[tuple[int, ...]]:
    """Normalized primitive zeros of f with max |x_i| <= T (f None: all points)."""
    out = set()
    r = np.arange(-T, T + 1, dtype=np.int64)
    for head in itertools.product(range(-T, T + 1), repeat=nvars - 2):
        A, Bm = np.meshgrid(r, r, indexing="ij")
        X = np.column_stack([np.full(A.size, h, dtype=np.int64) for h in head]
                            + [A.ravel(), Bm.ravel()]).astype(np.int64)
        if f is not None:
            X = X[eval_form_array(f, X) == 0]
        for x in X.tolist():
            if any(x) and math.gcd(*x) == 1:
                out.add(normalize_point(x).coords)
    return out


def brute_count(f, nvars: int, k: int, B: float, p: float = math.inf,
                exclude=()) -> int:
    T = int(B ** (1 / k)) + 1
    n = 0
    for x in brute_points(f, nvars, T):
        nrm = max(abs(c) for c in x) if math.isinf(p) else sum(abs(c) ** p for c in x) ** (1 / p)
        if nrm**k <= B and not any(all(np.dot(eq, x) == 0 for eq in s.equations) for s in exclude):
            n += 1
    return n


def test_p1_small_count():
    assert count_points(ProjectiveSpace(1), MetricSpec.weil(), 4).counts[-1] == 8
    assert brute_count(None, 2, 2, 4) == 8


def test_p1_density():
    rep = count_points(ProjectiveSpace(1), MetricSpec.weil(), 1e4)
    assert abs(rep.counts[-1] / 1e4 - 12 / math.pi**2) / (12 / math.pi**2) < 0.02
    assert rep.theta_hat == pytest.approx(12 / math.pi**2, rel=0.02)
    assert all(a <= b for a, b in zip(rep.counts, rep.counts[1:]))


@pytest.mark.parametrize("B", [1, 2.5, 9, 30.5, 100])
@pytest.mark.parametrize("metric", [MetricSpec.weil(), MetricSpec.fubini_study()])
def test_p1_and_p2_against_brute_force(B, metric):
    for n in (1, 2):
        if n == 2 and B > 30.5:
            continue
        rep = count_points(ProjectiveSpace(n), metric, B, grid=1, fit=False)
        assert rep.counts[-1] == brute_count(None, n + 1, n + 1, B, metric.p)


@pytest.mark.parametrize("B", [1, 5, 10, 40, 150])
def test_conic_against_brute_force(B):
    rep = count_points(CONIC2, MetricSpec.weil(), B, grid=1, fit=False)
    assert rep.counts[-1] == brute_count(CONIC2, 3, 1, B)


def test_cubic_surface_against_brute_force():
    f = DiagonalForm(3, 2, (1, 1, 1, -2))
    rep = count_points(f, MetricSpec.weil(), 6, grid=1, fit=False)
    assert rep.counts[-1] == brute_count(f.to_form(), 4, 1, 6)


@pytest.mark.parametrize("shards", [1, 4, 16])
def test_shard_invariance(shards):
    base = count_points(ProjectiveSpace(1), MetricSpec.weil(), 2000, fit=False).counts
    assert count_points(ProjectiveSpace(1), MetricSpec.weil(), 2000, shards=shards,
                        fit=False).counts == base
    c = count_points(CONIC2, MetricSpec.weil(), 300, fit=False).counts
    assert count_points(CONIC2, MetricSpec.weil(), 300, shards=shards, fit=False).counts == c


def test_worker_pool_matches_serial():
    serial = count_points(PYTH, MetricSpec.weil(), 500, shards=4, fit=False).counts
    pooled = count_points(PYTH, MetricSpec.weil(), 500, shards=4, workers=2, fit=False).counts
    assert pooled == serial


@pytest.mark.parametrize("f", [PYTH, CONIC2, DiagonalForm(3, 2, (1, 2, 3, -5)).to_form()])
def test_sieve_soundness(f):
    B = 40 if f.nvars == 3 else 8
    on = count_points(f, MetricSpec.weil(), B, sieve=True, fit=False).counts
    off = count_points(f, MetricSpec.weil(), B, sieve=False, fit=False).counts
    assert on == off


def test_exclusions():
    # the line x0 + x1 = 0 on the Fermat cubic surface
    f = DiagonalForm(3, 2, (1, 1, 1, 1))
    line = LinearSubvariety(((1, 1, 0, 0), (0, 0, 1, 1)), "L")
    full = count_points(f, MetricSpec.weil(), 5, grid=1, fit=False).counts[-1]
    cut = count_points(f, MetricSpec.weil(), 5, [line], grid=1, fit=False).counts[-1]
    assert cut <= full
    on_line = [x for x in brute_points(f.to_form(), 4, 5) if x[0] + x[1] == 0 and x[2] + x[3] == 0]
    assert full - cut == len(on_line) > 0
    assert cut == brute_count(f.to_form(), 4, 1, 5, exclude=[line])


@settings(max_examples=15, deadline=None)
@given(st.floats(-3, 3), st.sampled_from([3.0, 17.0, 64.0, 250.0]))
def test_shift_law(lam, B):
    base = count_points(ProjectiveSpace(1), MetricSpec.weil(), B, grid=1, fit=False).counts[-1]
    B2 = B * math.exp(lam / 2)
    if B2 < 1:
        return
    shifted = count_points(ProjectiveSpace(1), MetricSpec.weil(lam), B2, grid=1, fit=False).counts[-1]
    assert shifted == base


def test_fit_theta_synthetic():
    Bs = [10.0, 100.0, 1000.0, 10000.0]
    th, se = fit_theta((Bs, [3 * b for b in Bs]))
    assert th == 3 and se == 0
    th, se = fit_theta((Bs, [b * math.log(b) for b in Bs]), r=0)
    assert se / th > 0.01
    th, se = fit_theta((Bs, [b * math.log(b) for b in Bs]), r=1)
    assert th == pytest.approx(1, rel=1e-12) and se < 1e-9
    with pytest.raises(InsufficientData):
        fit_theta(([1.0, 2.0, 3.0], [1, 2, 3]))


def test_count_errors():
    with pytest.raises(InputError):
        count_points(ProjectiveSpace(1), B=0.5)
    with pytest.raises(InputError):
        count_points(ProjectiveSpace(1), B=10, shards=0)
    with pytest.raises(InputError):
        count_points(DiagonalForm(4, 2, (1, 1, 1, 1)), B=10)


def test_min_point_examples():
    # among equal-height points the lexicographically smallest |x| wins, so the
    # reported representative is (0:1:1) and (1:0:0:1:1) rather than (1:1:1:0:0)
    rep = min_point(PYTH)
    assert rep.point.coords == (0, 1, 1) and rep.H_min == 1
    rep = min_point(DiagonalForm.xa(4, 3, 2))
    assert rep.H_min == 1 and rep.point.coords == (1, 0, 0, 1, 1)
    assert eval_form(DiagonalForm.xa(4, 3, 2).to_form(), (1, 1, 1, 0, 0)) == 0
    rep = min_point(form({(2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 2): 1}), field="qi", B_cap=10)
    assert rep.H_min == 1
    coords = rep.point.coords
    assert sum(c**2 for c in (complex(z) for z in coords)) == 0
    assert "upper bound" in rep.note


def test_pointless_certificate():
    f = form({(2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 2): -3})
    rep = min_point(f, B_cap=1e4)
    assert rep.point is None and rep.certificate["p"] == 3
    cert = rep.certificate
    # independent check: no primitive solution modulo the certificate modulus
    m = cert["modulus"]
    X = np.array(list(itertools.product(range(m), repeat=3)), dtype=np.int64)
    prim = np.any(X % 3 != 0, axis=1)
    vals = (X[:, 0] ** 2 + X[:, 1] ** 2 - 3 * X[:, 2] ** 2) % m
    assert not np.any(prim & (vals == 0))
    # and a certificate is never issued for a form with rational points
    assert pointless_certificate(PYTH) is None


def test_min_point_is_minimal_against_brute_force():
    for f in (CONIC2, form({(2, 0, 0): 2, (0, 2, 0): 3, (0, 0, 2): -5}),
              form({(2, 0, 0): 1, (0, 2, 0): 7, (0, 0, 2): -11})):
        rep = min_point(f, B_cap=100)
        T = int(rep.H_min)
        pts = brute_points(f, 3, T)
        assert min(max(abs(c) for c in x) for x in pts) == rep.H_min


def test_min_height_growth():
    out = min_height_growth(4, 3, [1, 2])
    assert [r.H_min for r in out["rows"]] == [1, 1]
    out = min_height_growth(4, 3, [3, 21, 33])
    rows = {r.a: r for r in out["rows"]}
    assert rows[21].certificate is not None and rows[21].certificate["p"] == 2
    for a in (3, 33):
        r = rows[a]
        x = r.point
        assert -a * x[0] ** 4 + sum(c**4 for c in x[1:]) == 0
        assert r.H_min == max(abs(c) for c in x)
    assert out["slope"] >= 0.25 - 0.1
