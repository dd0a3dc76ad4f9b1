"""Metrics on O(1) over P^1: energies, heights, masses, the arithmetic Ding
functional and the Moser-Trudinger functional on the circle.

Conventions. A metric psi on O(1) has local weight
``psi_U(z) = base(z) + u(z) + shift`` with base ``log(1+|z|^2)`` (FS) or
``log max(1, |z|^2)`` (Weil). The anticanonical metric is ``2 psi`` on
-K = O(2); its complex volume form is ``e^{-2 psi} dA`` and its real density
``e^{-psi} dx``. ``dd^c`` is normalized so that every curvature measure of a
metric on O(1) has total mass one.

Numerics. Both charts |z| <= 1 and |z| >= 1 are mapped to the unit disc by
``z = rho e^{i theta}`` and ``z = e^{i theta} / rho``; in these reduced
coordinates the base weight is ``log(1 + rho^2)`` (FS) or 0 (Weil) in both
charts, so the Weil kink sits on the boundary rho = 1. Radial nodes are
Gauss-Legendre, angular nodes trapezoidal, and node counts double until two
successive values agree to the requested tolerance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import legendre, polynomial

from .errors import InputError, ParameterOutOfRange, QuadratureFailure
from .reports import DensityReport, EnergyReport, InequalityReport

FS = "fs"
WEIL = "weil"
DEFAULT_TOL = 1e-9
MAX_DOUBLINGS = 9

LOG_2PI = math.log(2 * math.pi)


# ---------------------------------------------------------------------------
# perturbations


@dataclass(frozen=True)
class FourierFunction:
    """v(theta) = a0 + sum_k a_k cos(k theta) + b_k sin(k theta).

    As a function on P^1 it is extended harmonically into both hemispheres:
    ``a0 + sum rho^k (a_k cos k theta + b_k sin k theta)`` with
    ``rho = min(|z|, 1/|z|)``.
    """

    a0: float = 0.0
    a: tuple[float, ...] = ()
    b: tuple[float, ...] = ()

    def __post_init__(self):
        a = tuple(float(v) for v in self.a)
        b = tuple(float(v) for v in self.b)
        K = max(len(a), len(b))
        a = a + (0.0,) * (K - len(a))
        b = b + (0.0,) * (K - len(b))
        object.__setattr__(self, "a0", float(self.a0))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def K(self) -> int:
        return len(self.a)

    @classmethod
    def parse(cls, text: str) -> FourierFunction:
        """Parse ``"a0,a1,b1,a2,b2,..."``."""
        try:
            vals = [float(t) for t in text.split(",") if t.strip()]
        except ValueError as exc:
            raise InputError(f"bad Fourier coefficient list {text!r}") from exc
        if not vals:
            raise InputError("empty Fourier coefficient list")
        rest = vals[1:]
        if len(rest) % 2:
            rest.append(0.0)
        return cls(vals[0], tuple(rest[0::2]), tuple(rest[1::2]))

    def to_dict(self) -> dict:
        return {"a0": self.a0, "a": list(self.a), "b": list(self.b)}

    def _coeffs(self) -> np.ndarray:
        return np.array([0.0] + [complex(x, -y) for x, y in zip(self.a, self.b)])

    def __call__(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        return self.extension(np.ones_like(theta), theta)

    def extension(self, rho, theta) -> np.ndarray:
        rho, theta = np.broadcast_arrays(np.asarray(rho, float), np.asarray(theta, float))
        if self.K == 0:
            return np.full(rho.shape, self.a0)
        z = rho * np.exp(1j * theta)
        return self.a0 + polynomial.polyval(z, self._coeffs()).real

    def at(self, chart: int, rho, theta) -> np.ndarray:
        return self.extension(rho, theta)

    def normal_jump(self, theta) -> np.ndarray:
        """S(theta) = sum k (a_k cos k theta + b_k sin k theta)."""
        theta = np.asarray(theta, dtype=float)
        out = np.zeros_like(theta)
        for k, (ak, bk) in enumerate(zip(self.a, self.b), start=1):
            out += k * (ak * np.cos(k * theta) + bk * np.sin(k * theta))
        return out

    def on_grid(self, n: int) -> np.ndarray:
        """Values at theta_j = 2 pi j / n, via an inverse real FFT (needs n > 2K)."""
        if n <= 2 * self.K:
            raise InputError("grid too coarse for this trigonometric polynomial")
        spec = np.zeros(n // 2 + 1, dtype=complex)
        spec[0] = self.a0 * n
        for k, (ak, bk) in enumerate(zip(self.a, self.b), start=1):
            spec[k] = complex(ak, -bk) * n / 2
        return np.fft.irfft(spec, n)

    def shifted(self, c: float) -> FourierFunction:
        return FourierFunction(self.a0 + c, self.a, self.b)


@dataclass(frozen=True)
class RadialBump:
    """u(z) = g(log |z|^2) with g(s) = amplitude * exp(-s^2 / (2 width^2))."""

    amplitude: float
    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise InputError("bump width must be positive")

    def g(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            out = self.amplitude * np.exp(-s * s / (2 * self.width**2))
        return np.where(np.isfinite(s), out, 0.0)

    def g2(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        w2 = self.width**2
        return self.amplitude * np.exp(-s * s / (2 * w2)) * (s * s / w2**2 - 1 / w2)

    def at(self, chart: int, rho, theta) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        with np.errstate(divide="ignore"):
            s = 2 * np.log(rho)
        s = s if chart == 0 else -s
        val = self.g(s)
        return np.broadcast_to(val, np.broadcast(rho, np.asarray(theta)).shape)

    @property
    def support_radius(self) -> float:
        return 12.0 * self.width

    def to_dict(self) -> dict:
        return {"amplitude": self.amplitude, "width": self.width}


Perturbation = FourierFunction | RadialBump


@dataclass(frozen=True)
class P1Metric:
    """Metric on O(1) over P^1: base (FS or Weil), perturbation u, shift."""

    base: str = FS
    u: Perturbation | None = None
    shift: float = 0.0

    def __post_init__(self):
        if self.base not in (FS, WEIL):
            raise InputError(f"base must be {FS!r} or {WEIL!r}")

    def with_shift(self, shift: float) -> P1Metric:
        return P1Metric(self.base, self.u, shift)

    def unshifted(self) -> P1Metric:
        return P1Metric(self.base, self.u, 0.0)

    def reduced_weight(self, chart: int, rho, theta, include_shift: bool = True) -> np.ndarray:
        rho, theta = np.broadcast_arrays(np.asarray(rho, float), np.asarray(theta, float))
        w = np.log1p(rho * rho) if self.base == FS else np.zeros(rho.shape)
        if self.u is not None:
            w = w + self.u.at(chart, rho, theta)
        if include_shift:
            w = w + self.shift
        return w

    def to_dict(self) -> dict:
        u = None
        if self.u is not None:
            u = {"type": type(self.u).__name__, **self.u.to_dict()}
        return {"base": self.base, "u": u, "shift": self.shift}


def anticanonical(base: str = FS, u: Perturbation | None = None, shift: float = 0.0) -> P1Metric:
    """The O(1) metric psi whose square 2 psi is the anticanonical metric
    ``2(base + u) + shift``; a shift on -K is half a shift on O(1)."""
    return P1Metric(base, u, shift / 2)


def volume_normalized_fs() -> P1Metric:
    """FS anticanonical metric rescaled so its complex mass is one."""
    return anticanonical(FS, None, math.log(math.pi))


# ---------------------------------------------------------------------------
# quadrature primitives


@lru_cache(maxsize=64)
def _gauss01(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = legendre.leggauss(n)
    return (x + 1) / 2, w / 2


def _gauss(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = _gauss01(n)
    return a + (b - a) * x, (b - a) * w


def _trap(n: int) -> np.ndarray:
    return 2 * np.pi * np.arange(n) / n


def _refine(level_value: Callable[[int], float], tol: float, what: str) -> tuple[float, float, int]:
    """Evaluate at doubling levels until two successive values agree."""
    prev = level_value(0)
    for level in range(1, MAX_DOUBLINGS + 1):
        cur = level_value(level)
        err = abs(cur - prev)
        if err < tol:
            return cur, err, level
        prev = cur
    raise QuadratureFailure(f"{what}: no convergence to {tol:g} (last change {err:.3g})")


def _angular_start(*metrics: P1Metric) -> int:
    K = max((m.u.K for m in metrics if isinstance(m.u, FourierFunction)), default=0)
    n = 32
    while n <= 2 * K + 2:
        n *= 2
    return n


# ---------------------------------------------------------------------------
# curvature measures


def _curvature_parts(m: P1Metric) -> list[tuple]:
    parts: list[tuple] = [("area",)] if m.base == FS else [("circle", lambda th: np.full_like(th, 1 / (2 * np.pi)))]
    if isinstance(m.u, FourierFunction) and m.u.K:
        u = m.u
        parts.append(("circle", lambda th: -u.normal_jump(th) / (2 * np.pi)))
    elif isinstance(m.u, RadialBump):
        parts.append(("radial", m.u))
    return parts


def _integrate_against(parts, w: Callable, nr: int, nt: int) -> float:
    """Integral of w(chart, rho, theta) against a sum of curvature parts."""
    theta = _trap(nt)
    dth = 2 * np.pi / nt
    total = 0.0
    for part in parts:
        kind = part[0]
        if kind == "area":
            rho, wr = _gauss01(nr)
            dens = rho / (1 + rho * rho) ** 2 / np.pi
            for chart in (0, 1):
                vals = w(chart, rho[:, None], theta[None, :])
                total += float(np.sum(wr * dens * vals.sum(axis=1)) * dth)
        elif kind == "circle":
            vals = w(0, np.ones_like(theta), theta)
            total += float(np.sum(vals * part[1](theta)) * dth)
        else:
            bump: RadialBump = part[1]
            L = bump.support_radius
            for chart, (a, b) in ((0, (-L, 0.0)), (1, (0.0, L))):
                s, ws = _gauss(a, b, nr)
                rho = np.exp(-np.abs(s) / 2)
                vals = w(chart, rho[:, None], theta[None, :])
                total += float(np.sum(ws * bump.g2(s) / (2 * np.pi) * vals.sum(axis=1)) * dth)
    return total


def _energy_raw(phi: P1Metric, phi0: P1Metric, tol: float, fold_shift: bool) -> EnergyReport:
    def w(chart, rho, theta):
        return (phi.reduced_weight(chart, rho, theta, fold_shift)
                - phi0.reduced_weight(chart, rho, theta, fold_shift))

    parts = _curvature_parts(phi) + _curvature_parts(phi0)
    nt0 = _angular_start(phi, phi0)

    def level(k: int) -> float:
        return 0.5 * _integrate_against(parts, w, 16 * 2**k, nt0 * 2**k)

    value, err, k = _refine(level, tol, "energy")
    return EnergyReport(value, 16 * 2**k * nt0 * 2**k, err)


@lru_cache(maxsize=256)
def _energy_cached(phi: P1Metric, phi0: P1Metric, tol: float) -> EnergyReport:
    return _energy_raw(phi, phi0, tol, fold_shift=False)


def energy_E(phi: P1Metric, phi0: P1Metric, tol: float = DEFAULT_TOL, cached: bool = True) -> EnergyReport:
    """Monge-Ampere energy E_{phi0}(phi) = (1/2) int (phi - phi0)(dd^c phi + dd^c phi0).

    With ``cached`` the shifts are applied analytically (every curvature
    measure is a probability measure, so E moves by the shift difference).
    """
    if phi == phi0:
        return EnergyReport(0.0, 0, 0.0)
    if not cached:
        return _energy_raw(phi, phi0, tol, fold_shift=True)
    rep = _energy_cached(phi.unshifted(), phi0.unshifted(), tol)
    return rep.shifted(phi.shift - phi0.shift)


WEIL_METRIC = P1Metric(WEIL)
FS_METRIC = P1Metric(FS)


def metric_height_report(phi: P1Metric, tol: float = DEFAULT_TOL) -> EnergyReport:
    """h_phi(O(1)) on P^1_Z, equal to the energy relative to the Weil metric."""
    return energy_E(phi, WEIL_METRIC, tol)


def metric_height_p1(phi: P1Metric, tol: float = DEFAULT_TOL) -> float:
    return metric_height_report(phi, tol).value


def anticanonical_height_p1(phi: P1Metric, tol: float = DEFAULT_TOL) -> float:
    """h_{2 phi}(-K): four times the O(1) height by homogeneity."""
    return 4 * metric_height_p1(phi, tol)


def normalized_height_p1(phi: P1Metric, bundle: str = "ac", tol: float = DEFAULT_TOL) -> float:
    """h / ((n+1)! vol): equals h_phi(O(1)) for -K (vol 2) and half of it for O(1)."""
    h = metric_height_p1(phi, tol)
    if bundle == "ac":
        return 4 * h / (2 * 2)
    if bundle == "o1":
        return h / 2
    raise InputError("bundle must be 'ac' or 'o1'")


# ---------------------------------------------------------------------------
# masses


def _complex_mass_raw(phi: P1Metric, tol: float, fold_shift: bool) -> DensityReport:
    nt0 = _angular_start(phi)
    radial_only = phi.u is None or isinstance(phi.u, RadialBump) or phi.u.K == 0

    def level(k: int) -> float:
        nr = 16 * 2**k
        nt = 1 if radial_only else nt0 * 2**k
        rho, wr = _gauss01(nr)
        theta = _trap(nt)
        total = 0.0
        for chart in (0, 1):
            vals = np.exp(-2 * phi.reduced_weight(chart, rho[:, None], theta[None, :], fold_shift))
            total += float(np.sum(wr * rho * vals.mean(axis=1)))
        return 2 * np.pi * total

    value, err, k = _refine(level, tol, "complex mass")
    return DensityReport(value, err, 2 * 16 * 2**k, "gauss-legendre x trapezoid")


@lru_cache(maxsize=256)
def _complex_mass_cached(phi: P1Metric, tol: float) -> DensityReport:
    return _complex_mass_raw(phi, tol, False)


def complex_mass_p1(phi: P1Metric, tol: float = DEFAULT_TOL, cached: bool = True) -> DensityReport:
    """Total mass of e^{-2 psi} dA over P^1(C) for the anticanonical metric 2 psi."""
    if not cached:
        return _complex_mass_raw(phi, tol, True)
    return _complex_mass_cached(phi.unshifted(), tol).scaled(math.exp(-2 * phi.shift))


def _real_mass_raw(phi: P1Metric, tol: float, fold_shift: bool) -> DensityReport:
    def level(k: int) -> float:
        rho, wr = _gauss01(16 * 2**k)
        total = 0.0
        for chart in (0, 1):
            for th in (0.0, np.pi):
                total += float(np.sum(wr * np.exp(-phi.reduced_weight(chart, rho, th, fold_shift))))
        return total

    value, err, k = _refine(level, tol, "real mass")
    return DensityReport(value, err, 4 * 16 * 2**k, "gauss-legendre")


@lru_cache(maxsize=256)
def _real_mass_cached(phi: P1Metric, tol: float) -> DensityReport:
    return _real_mass_raw(phi, tol, False)


def real_mass_p1(phi: P1Metric, tol: float = DEFAULT_TOL, cached: bool = True) -> DensityReport:
    """Total mass of e^{-psi} dx over P^1(R) (real points x = +-rho, +-1/rho)."""
    if not cached:
        return _real_mass_raw(phi, tol, True)
    return _real_mass_cached(phi.unshifted(), tol).scaled(math.exp(-phi.shift))


# ---------------------------------------------------------------------------
# functionals


def ding_arith(phi: P1Metric, tol: float = DEFAULT_TOL) -> float:
    """Arithmetic Ding functional of -K: -2 h(-K)/2! - vol(-K) log(complex mass)."""
    h_ac = anticanonical_height_p1(phi, tol)
    return -h_ac - 2 * math.log(complex_mass_p1(phi, tol).value)


def dirichlet_energy(v: FourierFunction) -> float:
    """(1/2) sum k (a_k^2 + b_k^2), i.e. (1/2 pi) times the Dirichlet integral
    of the harmonic extension over the unit disc."""
    return 0.5 * math.fsum(k * (a * a + b * b) for k, (a, b) in enumerate(zip(v.a, v.b), start=1))


def circle_log_mean_exp(v: FourierFunction, tol: float = 1e-15) -> float:
    """log of (1/2 pi) int e^{-v} d theta, trapezoid with doubling."""
    n = 64
    while n <= 4 * v.K + 4:
        n *= 2
    prev = None
    for _ in range(12):
        vals = -v.on_grid(n)
        top = vals.max()
        cur = float(top + math.log(np.mean(np.exp(vals - top))))
        if prev is not None and abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
        n *= 2
    raise QuadratureFailure("circle integral did not converge")


def mt_functional(v: FourierFunction) -> float:
    """Moser-Trudinger functional on the circle:
    -(1/4 pi) int_D |grad v~|^2 + mean(v) + log mean(e^{-v}), which is <= 0.

    The Dirichlet term is half of ``dirichlet_energy``.
    """
    if v.K == 0:
        return 0.0
    return -0.5 * dirichlet_energy(v) + v.a0 + circle_log_mean_exp(v)


def mobius_equality_family(t: float, cutoff: float = 1e-18) -> FourierFunction:
    """v_t with e^{-v_t} d theta the pullback of the uniform density under the
    disc automorphism fixing the circle:
    v_t = log(1 + 2t cos theta + t^2) - log(1 - t^2)."""
    if not -1 < t < 1:
        raise ParameterOutOfRange("need |t| < 1")
    if t == 0:
        return FourierFunction(0.0)
    a0 = -math.log1p(-t * t)
    K = 1
    while abs(t) ** K / K > cutoff:
        K += 1
    a = tuple(2 * (-1) ** (k + 1) * t**k / k for k in range(1, K + 1))
    return FourierFunction(a0, a, (0.0,) * K)


def real_theorem_functional(phi: P1Metric, tol: float = DEFAULT_TOL) -> InequalityReport:
    """h^(-K) + log(real mass) for the anticanonical metric 2 psi, against log 2 pi."""
    h = metric_height_report(phi, tol)
    mr = real_mass_p1(phi, tol)
    value = h.value + math.log(mr.value)
    err = h.est_error + mr.est_error / mr.value
    return InequalityReport.make(value, LOG_2PI, err,
                                 {"h_hat": h.value, "mu_R": mr.value, "metric": phi.to_dict()})


def real_theorem_mt_route(v: FourierFunction, tol: float = DEFAULT_TOL) -> InequalityReport:
    """The same functional after rotating the real locus onto the unit circle:
    metric Weil + v, real density e^{-v} d theta on the circle. Equals
    log 2 pi + mt_functional(v); attains log 2 pi at v = 0."""
    phi = P1Metric(WEIL, v)
    h = metric_height_report(phi, tol)
    log_mass = LOG_2PI + circle_log_mean_exp(v)
    return InequalityReport.make(h.value + log_mass, LOG_2PI, h.est_error,
                                 {"h_hat": h.value, "log_circle_mass": log_mass})


def curvature_is_positive(phi: P1Metric, n: int = 4096) -> bool:
    """Numerical check that dd^c psi is a positive measure."""
    if phi.u is None:
        return True
    if isinstance(phi.u, FourierFunction):
        jump = phi.u.normal_jump(_trap(n))
        if phi.base == WEIL:
            return bool(np.min(1 - jump) >= -1e-12)
        return bool(np.max(np.abs(jump)) <= 1e-12)
    s = np.linspace(-phi.u.support_radius, phi.u.support_radius, n)
    area = np.exp(s) / (1 + np.exp(s)) ** 2 if phi.base == FS else 0.0
    return bool(np.min(area + phi.u.g2(s)) >= -1e-12)


# ---------------------------------------------------------------------------
# rotation of the real locus onto the circle


def cayley(x):
    """T(x) = (x + i)/(1 + i x): maps the real line onto the unit circle."""
    x = np.asarray(x, dtype=complex)
    return (x + 1j) / (1 + 1j * x)


def cayley_inverse(w):
    """M(w) = (w - i)/(1 - i w)."""
    w = np.asarray(w, dtype=complex)
    return (w - 1j) / (1 - 1j * w)


def perturbation_on_real_line(u: Perturbation | None, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if u is None:
        return np.zeros_like(x)
    ax = np.abs(x)
    theta = np.where(x >= 0, 0.0, np.pi)
    inner = ax <= 1
    with np.errstate(divide="ignore"):
        rho_out = np.where(inner, 1.0, 1.0 / np.where(inner, 1.0, ax))
    vin = u.at(0, np.where(inner, ax, 1.0), theta)
    vout = u.at(1, rho_out, theta)
    return np.where(inner, vin, vout)


def _circle_side(u: Perturbation | None, tol: float) -> float:
    # the integrand has kinks at theta = 0 and pi (the points x = +-1)
    def level(k: int) -> float:
        total = 0.0
        for a, b in ((0.0, np.pi), (np.pi, 2 * np.pi)):
            th, wt = _gauss(a, b, 16 * 2**k)
            x = cayley_inverse(np.exp(1j * th)).real
            total += float(np.sum(wt * np.exp(-perturbation_on_real_line(u, x))))
        return 0.5 * total

    return _refine(level, tol, "circle side")[0]


def su2_rotation_check(perturbations: Sequence[Perturbation | None] | None = None,
                       tol: float = 1e-11) -> dict:
    """Check T^*(dx/(1+x^2)) = d theta / 2 and
    int_R e^{-u} dx/(1+x^2) = (1/2) int_{S^1} e^{-u(M(e^{i theta}))} d theta."""
    if perturbations is None:
        perturbations = [None, FourierFunction(0.7), RadialBump(0.8, 0.6),
                         FourierFunction(0.1, (0.3, -0.2), (0.25, 0.1))]
    th = (np.arange(997) + 0.5) * 2 * np.pi / 997
    w = np.exp(1j * th)
    x = cayley_inverse(w)
    dx_dth = (2 / (1 - 1j * w) ** 2 * 1j * w)
    pull = np.abs(dx_dth) / (1 + np.abs(x) ** 2)
    pull_dev = float(np.max(np.abs(pull - 0.5)))
    rows = []
    for u in perturbations:
        lhs = real_mass_p1(P1Metric(FS, u), tol).value
        rhs = _circle_side(u, tol)
        rows.append({"u": None if u is None else {"type": type(u).__name__, **u.to_dict()},
                     "real_line": lhs, "circle": rhs, "deviation": abs(lhs - rhs)})
    return {"pullback_max_dev": pull_dev, "cases": rows,
            "max_dev": max([pull_dev] + [r["deviation"] for r in rows])}
