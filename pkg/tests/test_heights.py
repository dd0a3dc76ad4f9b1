from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from heightlab.core import MetricSpec, normalize_gaussian, normalize_point
from heightlab.heights import height_of, height_shift_check, point_height

WEIL = MetricSpec.weil()
FS = MetricSpec.fubini_study()


def test_point_height_examples():
    assert point_height(normalize_point([1, "1/2"]), WEIL).H == 2
    assert point_height(normalize_point([1, "1000/1999"]), WEIL).H == 1999
    h = point_height(normalize_point([1, 0]), WEIL)
    assert h.H == 1 and h.h == 0
    assert point_height(normalize_point([1, 1]), FS).H == pytest.approx(math.sqrt(2), rel=1e-15)


def test_gaussian_height_examples():
    assert height_of(normalize_gaussian([1, "i"]), WEIL).H == 1
    assert height_of(normalize_gaussian(["1+i", 1]), WEIL).H == pytest.approx(math.sqrt(2), rel=1e-15)


@given(st.integers(-10**6, 10**6))
def test_gaussian_height_restricts_to_rational_height(m):
    hq = height_of(normalize_point([m, 1]), WEIL).H
    hg = height_of(normalize_gaussian([m, 1]), WEIL).H
    assert hq == max(abs(m), 1)
    assert hg == pytest.approx(hq, rel=1e-15)


def test_height_shift_examples():
    a, b = height_shift_check(normalize_point([1, 0]), WEIL, 2.0)
    assert a == b == 1.0
    a, b = height_shift_check(normalize_point([2, 1]), WEIL, -2 * math.log(2))
    assert a == pytest.approx(0, abs=1e-15) and b == pytest.approx(0, abs=1e-15)


@given(st.lists(st.integers(-10**4, 10**4), min_size=2, max_size=4),
       st.floats(-20, 20), st.sampled_from(["weil", "fs", "lp:3"]))
def test_height_shift_law(coords, lam, metric):
    if not any(coords):
        return
    a, b = height_shift_check(normalize_point(coords), MetricSpec.parse(metric), lam)
    assert a == pytest.approx(b, rel=1e-12, abs=1e-12)


@given(st.lists(st.integers(-10**4, 10**4), min_size=2, max_size=4))
def test_height_lower_bound(coords):
    if not any(coords):
        return
    x = normalize_point(coords)
    assert point_height(x, WEIL).H >= 1
    assert point_height(x, FS).H >= point_height(x, WEIL).H
