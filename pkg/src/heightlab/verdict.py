"""Constants and numerical inequality checks: c_n, the scale-free height
inequality, the diagonal hypersurface bound, minimal-point bounds, Zhang's
sandwich, Peyre-constant assembly and minimal-height times Peyre products.

Every checker is invariant under a constant shift of the metric; the helpers
``shift_inputs`` and ``peyre_scale_factor`` state the shift laws explicitly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import DiagonalForm, MetricSpec, prime_factors
from .errors import FieldShapeInvalid, NotFano, OrderViolation, ParameterOutOfRange
from .reports import InequalityReport

NORMALIZATION_NOTE = ("checked in the form h/(n+1)! + (vol/2) log mu_C <= c_n/(n+1)!, "
                      "which is exact for P^1 with the Fubini-Study metric")


def c_n_constant(n: int) -> float:
    """(1/2)(n+1)^{n+1}((n+1) H_n - n + log(pi^n / n!))."""
    if n < 1:
        raise ParameterOutOfRange("n must be >= 1")
    harmonic = sum(Fraction(1, k) for k in range(1, n + 1))
    inner = float((n + 1) * harmonic - n) + n * math.log(math.pi) - math.lgamma(n + 1)
    return 0.5 * (n + 1) ** (n + 1) * inner


def _positive(**kw) -> None:
    for name, v in kw.items():
        if not (v > 0 and math.isfinite(v)):
            raise ParameterOutOfRange(f"{name} must be positive and finite")


def shift_inputs(h: float, mu_C: float, vol: float, n: int, lam: float) -> tuple[float, float]:
    """(h, mu_C) after shifting the anticanonical weight by the constant lam:
    h gains lam (n+1)! vol / 2 and mu_C is multiplied by e^{-lam}."""
    return h + lam * math.factorial(n + 1) * vol / 2, mu_C * math.exp(-lam)


def main_conjecture_check(h: float, mu_C: float, vol: float, n: int,
                          error: float = 0.0) -> InequalityReport:
    """h/(n+1)! + (vol/2) log mu_C <= c_n/(n+1)!."""
    _positive(mu_C=mu_C, vol=vol)
    f = math.factorial(n + 1)
    lhs = h / f + 0.5 * vol * math.log(mu_C)
    rhs = c_n_constant(n) / f
    return InequalityReport.make(lhs, rhs, error,
                                 {"h": h, "mu_C": mu_C, "vol": vol, "n": n}, NORMALIZATION_NOTE)


def diagonal_bound_rhs(X: DiagonalForm, n: int | None = None) -> float:
    """c_n - (d-1)(n+2-d)^n sum log|a_i| for the diagonal hypersurface X."""
    n = X.n if n is None else n
    if X.d > n + 1:
        raise NotFano(f"degree {X.d} hypersurface in P^{n + 1} is not Fano")
    return c_n_constant(n) - (X.d - 1) * (n + 2 - X.d) ** n * sum(math.log(abs(a)) for a in X.a)


def min_point_bound(mu_C: float, vol: float, n: int) -> float:
    """e^{c_n/vol} / sqrt(mu_C); inf when that overflows a float."""
    _positive(mu_C=mu_C, vol=vol)
    log_bound = c_n_constant(n) / vol - 0.5 * math.log(mu_C)
    return math.exp(log_bound) if log_bound < 709.0 else math.inf


def min_point_check(H_min: float, mu_C: float, vol: float, n: int) -> InequalityReport:
    return InequalityReport.make(H_min, min_point_bound(mu_C, vol, n), 0.0,
                                 {"H_min": H_min, "mu_C": mu_C, "vol": vol, "n": n})


def zhang_report(e_values: Sequence[float], h_hat: float, error: float = 0.0) -> InequalityReport:
    """e_1 >= h_hat >= mean(e), reported as max(h_hat - e_1, mean - h_hat) <= 0."""
    e = [float(x) for x in e_values]
    if not e:
        raise ParameterOutOfRange("need at least one successive minimum")
    if any(a < b for a, b in zip(e, e[1:])):
        raise OrderViolation("successive minima must be nonincreasing")
    mean = math.fsum(e) / len(e)
    upper, lower = e[0] - h_hat, h_hat - mean
    return InequalityReport.make(max(h_hat - e[0], mean - h_hat), 0.0, error,
                                 {"e": e, "h_hat": h_hat, "upper_slack": upper,
                                  "lower_slack": lower})


def p1_envelope_bound(mu_R: float) -> float:
    """Upper bound log(2 pi / mu_R) for the normalized height on P^1."""
    _positive(mu_R=mu_R)
    return math.log(2 * math.pi / mu_R)


# ---------------------------------------------------------------------------
# Peyre constants

FIELD_SHAPES = {"q": (1, 0, 1), "qi": (0, 2, 2)}


@dataclass(frozen=True)
class PeyreConstant:
    theta: float
    eta_part: float
    mu_C: float
    mu_R: float
    field_shape: tuple[int, int, int]

    def to_dict(self) -> dict:
        return {"theta": self.theta, "eta_part": self.eta_part, "mu_C": self.mu_C,
                "mu_R": self.mu_R, "field_shape": list(self.field_shape)}


def _shape(field_shape) -> tuple[int, int, int]:
    if isinstance(field_shape, str):
        if field_shape not in FIELD_SHAPES:
            raise FieldShapeInvalid(f"unknown field {field_shape!r}")
        return FIELD_SHAPES[field_shape]
    try:
        m_R, m_C, deg = (int(x) for x in field_shape)
    except (TypeError, ValueError) as exc:
        raise FieldShapeInvalid("field shape is (m_R, m_C, degree)") from exc
    if m_R < 0 or m_C < 0 or deg < 1 or m_R + m_C != deg or m_C % 2:
        raise FieldShapeInvalid("need m_R + m_C = degree with m_C even")
    return m_R, m_C, deg


def peyre_assemble(eta_part: float, mu_C: float, mu_R: float, field_shape="q") -> PeyreConstant:
    """theta = eta * mu_C^{m_C/(2 deg)} * mu_R^{m_R/deg}.

    m_R and m_C count real and complex embeddings (so Q(i) is (0, 2, 2)).
    """
    m_R, m_C, deg = _shape(field_shape)
    _positive(eta_part=eta_part)
    if m_C:
        _positive(mu_C=mu_C)
    if m_R:
        _positive(mu_R=mu_R)
    theta = eta_part
    if m_C:
        theta *= mu_C ** (m_C / (2 * deg))
    if m_R:
        theta *= mu_R ** (m_R / deg)
    return PeyreConstant(theta, eta_part, mu_C, mu_R, (m_R, m_C, deg))


def peyre_scale_factor(lam: float) -> float:
    """Factor on theta when the anticanonical weight is shifted by lam
    (mu_R scales by e^{-lam/2}, mu_C by e^{-lam})."""
    return math.exp(-lam / 2)


def ej_product(min_H: float, theta: float) -> float:
    _positive(min_H=min_H, theta=theta)
    return min_H * theta


# ---------------------------------------------------------------------------
# the diagonal family -a x_0^d + x_1^d + ... + x_{n+1}^d


@dataclass(frozen=True)
class XaRow:
    a: int
    H_min: float | None
    mahler: float
    exp_h_proxy: float
    bad_primes: list[tuple[int, Fraction]]
    bad_product: float
    good_partial: float
    certificate: dict | None = None
    flagged: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"a": self.a, "H_min": self.H_min, "mahler": self.mahler,
                "exp_h_proxy": self.exp_h_proxy,
                "bad_primes": [[p, str(mu), float(mu)] for p, mu in self.bad_primes],
                "bad_product": self.bad_product, "good_partial": self.good_partial,
                "certificate": self.certificate, "flagged": [list(x) for x in self.flagged]}


def _slope(xs, ys) -> float | None:
    pts = [(x, y) for x, y in zip(xs, ys) if y is not None and y > 0]
    if len(pts) < 2 or len({x for x, _ in pts}) < 2:
        return None
    lx, ly = np.log([x for x, _ in pts]), np.log([y for _, y in pts])
    return float(np.polyfit(lx, ly, 1)[0])


def xa_study(d: int, n: int, a_grid: Sequence[int], P_max: int = 50, B_cap: float = 1e3,
             metric: MetricSpec | None = None, budget: int = 10**7) -> dict:
    """Per-a minimal height, Mahler proxy for exp(h_hat), bad-prime densities and
    the good-prime Euler partial product, with log-log exponents over a.

    The proxy is exp(k m(X_a) / (d (n+1))) with k = n+2-d.
    """
    from .enumeration import min_point
    from .localdens import euler_product, local_density
    from .mahler import mahler_measure

    if any(int(a) < 1 for a in a_grid):
        raise ParameterOutOfRange("a must be a positive integer")
    rows = []
    for a in a_grid:
        X = DiagonalForm.xa(d, n, int(a))
        if X.d > n + 1:
            raise NotFano(f"degree {d} hypersurface in P^{n + 1} is not Fano")
        mp = min_point(X, metric, B_cap, "q", budget)
        m = mahler_measure(X).m
        proxy = math.exp(X.k_ac * m / (d * (n + 1)))
        bad = sorted(set(prime_factors(d)) | set(prime_factors(int(a))))
        densities, flagged = [], []
        for p in bad:
            ld = local_density(X, p, budget=budget)
            if not ld.stabilized:
                flagged.append((p, "not stabilized"))
            densities.append((p, ld.mu_p))
        bad_product = math.prod(float(mu) for _, mu in densities)
        ep = euler_product(X, P_max, budget=budget)
        good = math.prod(float(f) for p, f in ep.factors if p not in bad)
        flagged += ep.flagged
        rows.append(XaRow(int(a), mp.H_min, m, proxy, densities, bad_product, good,
                          mp.certificate, flagged))
    a_vals = [r.a for r in rows]
    return {
        "d": d, "n": n, "P_max": P_max, "rows": rows,
        "exponents": {
            "H_min": _slope(a_vals, [r.H_min for r in rows]),
            "exp_h_proxy": _slope(a_vals, [r.exp_h_proxy for r in rows]),
            "bad_product": _slope(a_vals, [r.bad_product for r in rows]),
        },
        "reference": {"H_min": 1 / d, "exp_h_proxy": 1 / (d * (n + 1))},
        "pointless": [r.a for r in rows if r.certificate is not None],
        "note": "exp_h_proxy uses the Mahler measure of the model",
    }
