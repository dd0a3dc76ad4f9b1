"""Logarithmic Mahler measures of integer forms (probability Haar measure on
the torus) and the Weil height of hypersurface models they compute.

A homogeneous form is first dehomogenized (Haar measure is invariant under
x -> x/x_k), then Jensen's formula is applied in one inner variable:

    m(P) = m(lead) + int sum_alpha log+ |alpha(outer)|

where alpha runs over the roots of the slice polynomial. The remaining outer
integral is exact (no outer variables), adaptive 1-D quadrature (one), or a
tensor trapezoid / scrambled Sobol rule (two or more).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate
from scipy.stats import qmc

from .core import DiagonalForm, HomogeneousForm
from .errors import InputError, ResolutionTooLow

Terms = dict[tuple[int, ...], complex]


@dataclass(frozen=True)
class MahlerReport:
    m: float
    coeff_gap: float
    nodes: int
    est_error: float
    method: str


def _as_form(f) -> HomogeneousForm:
    if isinstance(f, DiagonalForm):
        return f.to_form()
    if isinstance(f, HomogeneousForm):
        return f
    raise InputError("expected a HomogeneousForm or DiagonalForm")


def _strip(terms: Terms) -> Terms:
    """Drop unused variables and divide out monomial content (|x_i| = 1)."""
    terms = {e: c for e, c in terms.items() if c != 0}
    n = len(next(iter(terms)))
    keep = [i for i in range(n) if any(e[i] for e in terms)]
    low = [min(e[i] for e in terms) for i in keep]
    return {tuple(e[i] - lo for i, lo in zip(keep, low)): c for e, c in terms.items()}


def _choose(terms: Terms) -> tuple[int, int]:
    """Pick (inner variable, dehomogenized variable)."""
    n = len(next(iter(terms)))
    degs = [max(e[i] for e in terms) for i in range(n)]
    total = max(sum(e) for e in terms)
    best, best_key = 0, None
    for j in range(n):
        pure = [abs(c) for e, c in terms.items() if e[j] == total]
        # constant leading coefficient first, then the largest one, then degree
        key = (bool(pure), max(pure, default=0.0), degs[j])
        if best_key is None or key > best_key:
            best, best_key = j, key
    k = next(i for i in range(n) if i != best)
    return best, k


def _slice_polynomials(terms: Terms, j: int, k: int):
    """Coefficients in x_j as (exponent of x_j) -> list of (outer exps, coeff)."""
    n = len(next(iter(terms)))
    outer = [i for i in range(n) if i not in (j, k)]
    by_power: dict[int, list] = {}
    for e, c in terms.items():
        by_power.setdefault(e[j], []).append((np.array([e[i] for i in outer], dtype=float), c))
    return outer, by_power


def _eval_coeffs(by_power, theta: np.ndarray, powers: list[int]) -> np.ndarray:
    """Coefficient matrix (points, len(powers)) at outer angles theta (points, M)."""
    out = np.zeros((theta.shape[0], len(powers)), dtype=complex)
    for col, p in enumerate(powers):
        for ex, c in by_power.get(p, ()):
            out[:, col] += c * np.exp(1j * (theta @ ex)) if ex.size else c
    return out


def _log_plus_roots(coeffs: np.ndarray, powers: list[int]) -> np.ndarray:
    """sum log+ |root| for each row; coeffs columns ordered by descending power."""
    top = powers[0]
    nonzero = [p for p in powers]
    if len(nonzero) == 2:
        # c_top y^top + c_low y^low: |root|^(top-low) = |c_low / c_top|
        with np.errstate(divide="ignore"):
            ratio = np.log(np.abs(coeffs[:, 1])) - np.log(np.abs(coeffs[:, 0]))
        return np.maximum(ratio, 0.0)
    deg = top - powers[-1]
    full = np.zeros((coeffs.shape[0], deg + 1), dtype=complex)
    for col, p in enumerate(powers):
        full[:, top - p] = coeffs[:, col]
    lead = full[:, 0]
    if np.any(np.abs(lead) < 1e-300):
        raise ResolutionTooLow("leading coefficient vanishes at a sample point")
    comp = np.zeros((coeffs.shape[0], deg, deg), dtype=complex)
    comp[:, 0, :] = -full[:, 1:] / lead[:, None]
    if deg > 1:
        idx = np.arange(deg - 1)
        comp[:, idx + 1, idx] = 1.0
    roots = np.linalg.eigvals(comp)
    with np.errstate(divide="ignore"):
        return np.maximum(np.log(np.abs(roots)), 0.0).sum(axis=1)


def _poly_divmod(a: list[Fraction], b: list[Fraction]) -> tuple[list[Fraction], list[Fraction]]:
    """Division of dense polynomials (descending coefficients) over Q."""
    a = list(a)
    q = [Fraction(0)] * max(1, len(a) - len(b) + 1)
    while len(a) >= len(b) and any(a):
        c = a[0] / b[0]
        q[len(q) - (len(a) - len(b)) - 1] = c
        for i in range(len(b)):
            a[i] -= c * b[i]
        a.pop(0)
    while len(a) > 1 and a[0] == 0:
        a.pop(0)
    return q, a


def _poly_sub(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    n = max(len(a), len(b))
    a = [Fraction(0)] * (n - len(a)) + a
    b = [Fraction(0)] * (n - len(b)) + b
    d = [x - y for x, y in zip(a, b)]
    while len(d) > 1 and d[0] == 0:
        d = d[1:]
    return d


def _poly_gcd(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    while any(b):
        _, r = _poly_divmod(a, b)
        a, b = b, r
    return [c / a[0] for c in a]


def _squarefree(f: list[Fraction]) -> list[tuple[int, list[Fraction]]]:
    """Yun's decomposition f = lead * prod a_i^i into monic squarefree a_i."""
    while len(f) > 1 and f[0] == 0:
        f = f[1:]
    deg = len(f) - 1
    if deg < 1:
        return []
    df = [c * (deg - i) for i, c in enumerate(f[:-1])]
    a0 = _poly_gcd(f, df)
    b = _poly_divmod(f, a0)[0]
    c = _poly_divmod(df, a0)[0]
    out = []
    i = 1
    while len(b) > 1:
        d = _poly_sub(c, [x * (len(b) - 1 - j) for j, x in enumerate(b[:-1])])
        a = _poly_gcd(b, d) if any(d) else [c_ / b[0] for c_ in b]
        if len(a) > 1:
            out.append((i, a))
        b = _poly_divmod(b, a)[0]
        c = _poly_divmod(d, a)[0] if any(d) else [Fraction(0)]
        i += 1
    return out


def _mahler(terms: Terms, method: str, res: int | None, tol: float) -> tuple[float, float, int]:
    terms = _strip(terms)
    if len(terms) == 1:
        return math.log(abs(next(iter(terms.values())))), 0.0, 0
    j, k = _choose(terms)
    outer, by_power = _slice_polynomials(terms, j, k)
    powers = sorted(by_power, reverse=True)
    top = powers[0]
    lead_terms: Terms = {}
    for ex, c in by_power[top]:
        lead_terms[tuple(int(v) for v in ex)] = lead_terms.get(tuple(int(v) for v in ex), 0) + c
    if outer:
        lead_val, lead_err, lead_nodes = _mahler(_lift(lead_terms, len(outer), terms, j, k, outer),
                                                 method, res, tol)
    else:
        lead_val, lead_err, lead_nodes = math.log(abs(sum(lead_terms.values()))), 0.0, 0
    M = len(outer)
    if M == 0:
        coeffs = _eval_coeffs(by_power, np.zeros((1, 0)), powers)
        if np.any(coeffs.imag) or np.any(coeffs.real != np.round(coeffs.real)):
            val = float(_log_plus_roots(coeffs, powers)[0])
            return lead_val + val, lead_err, lead_nodes + 1
        # integer polynomial: split off repeated factors first, since
        # eigenvalue roots of a k-fold root are only accurate to eps^(1/k)
        dense = [Fraction(0)] * (top - powers[-1] + 1)
        for col, p in enumerate(powers):
            dense[top - p] = Fraction(int(coeffs[0, col].real))
        val = 0.0
        for mult, factor in _squarefree(dense):
            keep = [i for i, c in enumerate(factor) if c != 0]
            if len(keep) > 1:  # a lone monomial only has the root 0
                fdeg = len(factor) - 1
                coeffs = np.array([[float(factor[i]) for i in keep]], dtype=complex)
                val += mult * float(_log_plus_roots(coeffs, [fdeg - i for i in keep])[0])
        return lead_val + val, lead_err, lead_nodes + 1
    if M == 1:
        def integrand(t: float) -> float:
            c = _eval_coeffs(by_power, np.array([[t]]), powers)
            return float(_log_plus_roots(c, powers)[0])

        val, err, info = integrate.quad(integrand, 0.0, 2 * np.pi, epsabs=tol, epsrel=tol,
                                        limit=500, full_output=1)[:3]
        return lead_val + val / (2 * np.pi), lead_err + err / (2 * np.pi), lead_nodes + info["neval"]
    val, err, nodes = _outer_multi(by_power, powers, M, method, res)
    return lead_val + val, lead_err + err, lead_nodes + nodes


def _lift(lead_terms: Terms, M: int, terms: Terms, j: int, k: int, outer: list[int]) -> Terms:
    """Re-homogenize the leading coefficient (a form in the outer variables and x_k)."""
    n = len(next(iter(terms)))
    top = max(e[j] for e in terms)
    deg = max(sum(e) for e in terms) - top
    out: Terms = {}
    for ex, c in lead_terms.items():
        full = [0] * n
        for pos, i in enumerate(outer):
            full[i] = ex[pos]
        full[k] = deg - sum(ex)
        full[j] = 0
        out[tuple(full)] = out.get(tuple(full), 0) + c
    return out


def _outer_multi(by_power, powers, M: int, method: str, res: int | None) -> tuple[float, float, int]:
    if method == "qmc":
        log2n = res if res else 16
        sampler = qmc.Sobol(d=M, scramble=True, seed=20240601)
        pts = sampler.random_base2(log2n + 1) * 2 * np.pi
        vals = _chunked(by_power, powers, pts)
        half = float(np.mean(vals[: len(vals) // 2]))
        full = float(np.mean(vals))
        return full, abs(full - half), len(vals)
    if method not in ("quadrature", "jensen"):
        raise InputError(f"unknown method {method!r}")
    n = res if res else max(16, int(2 ** math.ceil(16 / M)))
    results = []
    for nn in (n, 2 * n):
        grid = np.meshgrid(*([2 * np.pi * (np.arange(nn) + 0.5) / nn] * M), indexing="ij")
        pts = np.stack([g.ravel() for g in grid], axis=1)
        results.append(float(np.mean(_chunked(by_power, powers, pts))))
    return results[1], abs(results[1] - results[0]), n**M + (2 * n) ** M


def _chunked(by_power, powers, pts: np.ndarray, chunk: int = 1 << 16) -> np.ndarray:
    out = np.empty(pts.shape[0])
    for s in range(0, pts.shape[0], chunk):
        c = _eval_coeffs(by_power, pts[s:s + chunk], powers)
        out[s:s + chunk] = _log_plus_roots(c, powers)
    return out


def mahler_measure(f, method: str = "jensen", resolution: int | None = None,
                   tol: float = 1e-11) -> MahlerReport:
    """Logarithmic Mahler measure of f with respect to probability Haar measure.

    ``method`` only matters with two or more outer variables: "jensen" (alias
    "quadrature") uses a midpoint tensor rule with ``resolution`` nodes per
    axis, "qmc" a scrambled Sobol rule with 2**resolution points.
    """
    form = _as_form(f)
    terms = {e: complex(c) for e, c in form.terms}
    m, err, nodes = _mahler(terms, method, resolution, tol)
    if not math.isfinite(m):
        raise ResolutionTooLow("Mahler measure evaluated to a non-finite value")
    gap = abs(m - math.log(max(abs(c) for c in form.coefficients)))
    return MahlerReport(m, gap, nodes, err, method)


def hypersurface_weil_height(f, **kw) -> float:
    """Weil-metric height of the hypersurface model cut out by f."""
    return mahler_measure(f, **kw).m


def mahler_gap(f, **kw) -> float:
    """|m(f) - log max |a_i||."""
    return mahler_measure(f, **kw).coeff_gap
