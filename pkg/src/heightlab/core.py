"""Exact arithmetic foundation: primitive projective points over Z and Z[i],
integer homogeneous forms, and ambient metric specifications.

Everything here is an immutable value. Point and form arithmetic uses Python
integers (arbitrary precision); floats only appear in norms.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, is_dataclass
from fractions import Fraction
from functools import reduce
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import AllZero, DimensionMismatch, InputError

INT64_SAFE = 2**62


# ---------------------------------------------------------------------------
# rationals


def parse_rational(value: Any) -> Fraction:
    """Parse ints, Fractions, and strings such as ``"1000/1999"``."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InputError(f"not a rational number: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not value.is_integer():
            raise InputError(f"float coordinate {value!r} is not exact; pass a fraction string")
        return Fraction(int(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"cannot parse rational {value!r}") from exc
    raise InputError(f"not a rational number: {value!r}")


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


# ---------------------------------------------------------------------------
# points over Q


@dataclass(frozen=True)
class RationalPoint:
    """Primitive integer representative of a point of P^m(Q).

    The first nonzero coordinate is positive, so the representative is unique.
    """

    coords: tuple[int, ...]

    def __post_init__(self):
        if not self.coords or all(c == 0 for c in self.coords):
            raise AllZero("point has all coordinates zero")
        if reduce(math.gcd, (abs(c) for c in self.coords)) != 1:
            raise InputError(f"coordinates {self.coords} are not primitive")
        first = next(c for c in self.coords if c != 0)
        if first < 0:
            raise InputError(f"coordinates {self.coords} are not sign-normalized")

    @property
    def ambient_dim(self) -> int:
        return len(self.coords) - 1


def normalize_point(raw: Iterable[Any]) -> RationalPoint:
    """Clear denominators, divide by the gcd and make the first nonzero entry positive."""
    q = [parse_rational(v) for v in raw]
    if not q or all(v == 0 for v in q):
        raise AllZero("every coordinate is zero")
    den = reduce(_lcm, (v.denominator for v in q), 1)
    ints = [int(v * den) for v in q]
    g = reduce(math.gcd, (abs(v) for v in ints))
    ints = [v // g for v in ints]
    if next(v for v in ints if v != 0) < 0:
        ints = [-v for v in ints]
    return RationalPoint(tuple(ints))


# ---------------------------------------------------------------------------
# Gaussian integers


@dataclass(frozen=True)
class Gaussian:
    """Element re + im*i of Z[i]."""

    re: int
    im: int

    def __add__(self, other: Gaussian) -> Gaussian:
        return Gaussian(self.re + other.re, self.im + other.im)

    def __sub__(self, other: Gaussian) -> Gaussian:
        return Gaussian(self.re - other.re, self.im - other.im)

    def __mul__(self, other: Gaussian) -> Gaussian:
        return Gaussian(self.re * other.re - self.im * other.im,
                        self.re * other.im + self.im * other.re)

    def __neg__(self) -> Gaussian:
        return Gaussian(-self.re, -self.im)

    def __bool__(self) -> bool:
        return self.re != 0 or self.im != 0

    def conj(self) -> Gaussian:
        return Gaussian(self.re, -self.im)

    def norm(self) -> int:
        return self.re * self.re + self.im * self.im

    def __abs__(self) -> float:
        return math.hypot(self.re, self.im)

    def __complex__(self) -> complex:
        return complex(self.re, self.im)

    def divmod(self, other: Gaussian) -> tuple[Gaussian, Gaussian]:
        """Euclidean division with remainder of norm < norm(other)."""
        n = other.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Z[i]")
        num = self * other.conj()
        q = Gaussian(_round_div(num.re, n), _round_div(num.im, n))
        return q, self - q * other

    def exact_div(self, other: Gaussian) -> Gaussian:
        q, r = self.divmod(other)
        if r:
            raise ArithmeticError(f"{self} is not divisible by {other}")
        return q

    def __str__(self) -> str:
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


def _round_div(a: int, n: int) -> int:
    # nearest integer to a/n, exact
    return (2 * a + n) // (2 * n)


UNITS = (Gaussian(1, 0), Gaussian(0, 1), Gaussian(-1, 0), Gaussian(0, -1))


def gaussian_gcd(a: Gaussian, b: Gaussian) -> Gaussian:
    while b:
        _, r = a.divmod(b)
        a, b = b, r
    return a


def parse_gaussian(value: Any) -> tuple[Fraction, Fraction]:
    """Parse a Gaussian rational into (real, imaginary) Fractions.

    Accepts ``Gaussian``, ints, Fractions, ``(re, im)`` pairs, exact complex
    numbers, and strings such as ``"1+i"``, ``"2i"``, ``"1/2-3i"``.
    """
    if isinstance(value, Gaussian):
        return Fraction(value.re), Fraction(value.im)
    if isinstance(value, complex):
        return parse_rational(value.real), parse_rational(value.imag)
    if isinstance(value, (tuple, list)) and len(value) == 2:
        return parse_rational(value[0]), parse_rational(value[1])
    if isinstance(value, str):
        s = value.replace(" ", "").replace("j", "i")
        if not s.endswith("i"):
            return parse_rational(s), Fraction(0)
        body = s[:-1]
        # split at the last sign that is not the leading one
        cut = max(body.rfind("+"), body.rfind("-"))
        if cut <= 0:
            re_part, im_part = "0", body
        else:
            re_part, im_part = body[:cut], body[cut:]
        if im_part in ("", "+"):
            im_part = "1"
        elif im_part == "-":
            im_part = "-1"
        return parse_rational(re_part), parse_rational(im_part)
    return parse_rational(value), Fraction(0)


@dataclass(frozen=True)
class GaussianPoint:
    """Gaussian-primitive representative of a point of P^m(Q(i)).

    The first nonzero coordinate lies in the class re > 0, im >= 0.
    """

    coords: tuple[Gaussian, ...]

    def __post_init__(self):
        if not self.coords or not any(self.coords):
            raise AllZero("point has all coordinates zero")
        g = reduce(gaussian_gcd, self.coords, Gaussian(0, 0))
        if g.norm() != 1:
            raise InputError("coordinates are not Gaussian-primitive")
        first = next(c for c in self.coords if c)
        if not (first.re > 0 and first.im >= 0):
            raise InputError("first nonzero coordinate not in the canonical unit class")

    @property
    def ambient_dim(self) -> int:
        return len(self.coords) - 1

    def is_real(self) -> bool:
        return all(c.im == 0 for c in self.coords)


def _canonical_unit(first: Gaussian) -> Gaussian:
    for u in UNITS:
        w = first * u
        if w.re > 0 and w.im >= 0:
            return u
    raise AssertionError("unreachable: some unit rotates into the canonical class")


def normalize_gaussian(raw: Iterable[Any]) -> GaussianPoint:
    """Clear denominators, remove the Gaussian gcd, rotate by the canonical unit."""
    parts = [parse_gaussian(v) for v in raw]
    if not parts or all(re == 0 and im == 0 for re, im in parts):
        raise AllZero("every coordinate is zero")
    den = reduce(_lcm, (x.denominator for pair in parts for x in pair), 1)
    ints = [Gaussian(int(re * den), int(im * den)) for re, im in parts]
    g = reduce(gaussian_gcd, ints, Gaussian(0, 0))
    ints = [c.exact_div(g) for c in ints]
    u = _canonical_unit(next(c for c in ints if c))
    return GaussianPoint(tuple(c * u for c in ints))


# ---------------------------------------------------------------------------
# forms


@dataclass(frozen=True)
class HomogeneousForm:
    """Integer homogeneous polynomial, stored as sorted (exponents, coefficient) terms."""

    degree: int
    nvars: int
    terms: tuple[tuple[tuple[int, ...], int], ...]

    def __post_init__(self):
        if self.degree < 1:
            raise InputError("degree must be positive")
        merged: dict[tuple[int, ...], int] = {}
        for exps, coeff in self.terms:
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.nvars:
                raise DimensionMismatch(f"exponent vector {exps} has wrong length")
            if any(e < 0 for e in exps) or sum(exps) != self.degree:
                raise InputError(f"exponent vector {exps} does not sum to {self.degree}")
            if exps in merged:
                raise InputError(f"duplicate exponent vector {exps}")
            merged[exps] = int(coeff)
        clean = tuple(sorted((e, c) for e, c in merged.items() if c != 0))
        if not clean:
            raise InputError("form has no nonzero coefficient")
        object.__setattr__(self, "terms", clean)

    @classmethod
    def from_dict(cls, data: dict) -> HomogeneousForm:
        return cls(int(data["degree"]), int(data["nvars"]),
                   tuple((tuple(t[0]), int(t[1])) for t in data["terms"]))

    def to_dict(self) -> dict:
        return {"degree": self.degree, "nvars": self.nvars,
                "terms": [[list(e), c] for e, c in self.terms]}

    @classmethod
    def from_coefficients(cls, coeffs: dict[tuple[int, ...], int]) -> HomogeneousForm:
        exps = next(iter(coeffs))
        return cls(sum(exps), len(exps), tuple(coeffs.items()))

    @property
    def coefficients(self) -> tuple[int, ...]:
        return tuple(c for _, c in self.terms)

    def diagonal_coefficients(self) -> tuple[int, ...] | None:
        """Return (a_0..a_m) if the form is sum a_i x_i^d with all a_i nonzero."""
        a = [0] * self.nvars
        for exps, c in self.terms:
            nz = [i for i, e in enumerate(exps) if e]
            if len(nz) != 1:
                return None
            a[nz[0]] = c
        if any(v == 0 for v in a):
            return None
        return tuple(a)

    def is_quadratic(self) -> bool:
        return self.degree == 2

    def gradient(self) -> list[list[tuple[tuple[int, ...], int]]]:
        """Partial derivatives as term lists (possibly empty)."""
        out = []
        for i in range(self.nvars):
            part = []
            for exps, c in self.terms:
                if exps[i]:
                    e = list(exps)
                    e[i] -= 1
                    part.append((tuple(e), c * exps[i]))
            out.append(part)
        return out

    def max_abs_value(self, bound: int) -> int:
        """Upper bound for |f(x)| over |x_i| <= bound."""
        return sum(abs(c) for c in self.coefficients) * bound ** self.degree

    def permuted(self, perm: Sequence[int]) -> HomogeneousForm:
        """Form in the variables y_i = x_{perm[i]}."""
        inv = [0] * self.nvars
        for i, p in enumerate(perm):
            inv[p] = i
        return HomogeneousForm(self.degree, self.nvars,
                               tuple((tuple(e[perm[i]] for i in range(self.nvars)), c)
                                     for e, c in self.terms))

    def __str__(self) -> str:
        pieces = []
        for exps, c in self.terms:
            mono = "*".join(f"x{i}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(exps) if e)
            pieces.append(f"{c}*{mono}")
        return " + ".join(pieces)


def eval_terms(terms, x: Sequence[int]) -> int:
    total = 0
    for exps, c in terms:
        m = c
        for xi, e in zip(x, exps):
            if e:
                m *= xi ** e
        total += m
    return total


def eval_form(f: HomogeneousForm, x: Sequence[int]) -> int:
    """Exact evaluation of an integer form at an integer tuple."""
    if len(x) != f.nvars:
        raise DimensionMismatch(f"expected {f.nvars} coordinates, got {len(x)}")
    return eval_terms(f.terms, [int(v) for v in x])


def eval_terms_array(terms, X: np.ndarray, modulus: int | None = None) -> np.ndarray:
    """Vectorized evaluation over the last axis of X.

    With ``modulus`` the result is reduced mod modulus (modulus < 2**31 keeps
    every product inside int64). Without it the caller must ensure the values
    fit in int64; see ``HomogeneousForm.max_abs_value``.
    """
    X = np.asarray(X, dtype=np.int64)
    out = np.zeros(X.shape[:-1], dtype=np.int64)
    if modulus is not None:
        if modulus >= 2**31:
            raise InputError("modulus too large for int64 evaluation")
        Xm = X % modulus
    for exps, c in terms:
        if modulus is None:
            m = np.full(X.shape[:-1], c, dtype=np.int64)
            for i, e in enumerate(exps):
                if e:
                    m = m * X[..., i] ** e
            out += m
        else:
            m = np.full(X.shape[:-1], c % modulus, dtype=np.int64)
            for i, e in enumerate(exps):
                for _ in range(e):
                    m = (m * Xm[..., i]) % modulus
            out = (out + m) % modulus
    return out


def eval_form_array(f: HomogeneousForm, X: np.ndarray, modulus: int | None = None) -> np.ndarray:
    return eval_terms_array(f.terms, X, modulus)


@dataclass(frozen=True)
class DiagonalForm:
    """Diagonal hypersurface sum_i a_i x_i^d in P^{n+1}, all a_i nonzero."""

    d: int
    n: int
    a: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(int(v) for v in self.a))
        if self.d < 1 or self.n < 0:
            raise InputError("need d >= 1 and n >= 0")
        if len(self.a) != self.n + 2:
            raise DimensionMismatch(f"expected {self.n + 2} coefficients, got {len(self.a)}")
        if any(v == 0 for v in self.a):
            raise InputError("diagonal coefficients must be nonzero")

    @property
    def fano(self) -> bool:
        return self.d <= self.n + 1

    @property
    def k_ac(self) -> int:
        """Anticanonical twist: -K = O(n + 2 - d) by adjunction."""
        return self.n + 2 - self.d

    @property
    def nvars(self) -> int:
        return self.n + 2

    def to_form(self) -> HomogeneousForm:
        terms = []
        for i, c in enumerate(self.a):
            e = [0] * self.nvars
            e[i] = self.d
            terms.append((tuple(e), c))
        return HomogeneousForm(self.d, self.nvars, tuple(terms))

    @classmethod
    def xa(cls, d: int, n: int, a: int) -> DiagonalForm:
        """The family -a x_0^d + x_1^d + ... + x_{n+1}^d."""
        return cls(d, n, (-a,) + (1,) * (n + 1))

    @classmethod
    def from_dict(cls, data: dict) -> DiagonalForm:
        return cls(int(data["d"]), int(data["n"]), tuple(int(v) for v in data["a"]))

    def to_dict(self) -> dict:
        return {"d": self.d, "n": self.n, "a": list(self.a)}


@dataclass(frozen=True)
class ProjectiveSpace:
    """P^n itself, for counting and densities."""

    n: int

    @property
    def nvars(self) -> int:
        return self.n + 1

    def to_dict(self) -> dict:
        return {"projective_space": self.n}


Variety = ProjectiveSpace | DiagonalForm | HomogeneousForm


def variety_from_dict(data: dict) -> Variety:
    if "projective_space" in data:
        return ProjectiveSpace(int(data["projective_space"]))
    if "a" in data and "d" in data:
        return DiagonalForm.from_dict(data)
    if "terms" in data:
        return HomogeneousForm.from_dict(data)
    raise InputError("unrecognized variety description")


def as_form(v: Variety) -> HomogeneousForm | None:
    if isinstance(v, DiagonalForm):
        return v.to_form()
    if isinstance(v, HomogeneousForm):
        return v
    return None


def dimension(v: Variety) -> int:
    """Dimension of the projective variety (hypersurfaces have dim nvars - 2)."""
    if isinstance(v, ProjectiveSpace):
        return v.n
    return v.nvars - 2


def anticanonical_twist(v: Variety) -> int:
    """k with -K_X = O(k)|_X: n+1 for P^n, n+2-d for hypersurfaces."""
    if isinstance(v, ProjectiveSpace):
        return v.n + 1
    deg = v.d if isinstance(v, DiagonalForm) else v.degree
    return v.nvars - deg


# ---------------------------------------------------------------------------
# metrics


@dataclass(frozen=True)
class MetricSpec:
    """L^p ambient norm (p = inf: Weil, p = 2: Fubini-Study) with optional
    smooth twist and additive shift of the weight."""

    p: float = math.inf
    twist: Any = None
    shift: float = 0.0

    def __post_init__(self):
        if not (self.p >= 1):
            raise InputError("need p >= 1")

    @classmethod
    def weil(cls, shift: float = 0.0) -> MetricSpec:
        return cls(math.inf, None, shift)

    @classmethod
    def fubini_study(cls, shift: float = 0.0) -> MetricSpec:
        return cls(2.0, None, shift)

    @classmethod
    def parse(cls, text: str, shift: float = 0.0) -> MetricSpec:
        t = text.strip().lower()
        if t in ("weil", "inf", "linf"):
            return cls(math.inf, None, shift)
        if t in ("fs", "fubini-study", "l2"):
            return cls(2.0, None, shift)
        if t.startswith("lp:"):
            return cls(float(t[3:]), None, shift)
        raise InputError(f"unknown metric {text!r}; use weil, fs or lp:<p>")

    def with_shift(self, shift: float) -> MetricSpec:
        return MetricSpec(self.p, self.twist, shift)

    @property
    def name(self) -> str:
        if math.isinf(self.p):
            return "weil"
        if self.p == 2:
            return "fs"
        return f"lp:{self.p:g}"


def lp_norm(x: Sequence[Any], p: float) -> float:
    """The usual p-norm of a complex vector; p = inf gives the max modulus."""
    mods = [abs(complex(v)) for v in x]
    if not mods:
        return 0.0
    if math.isinf(p):
        return max(mods)
    m = max(mods)
    if m == 0:
        return 0.0
    # rescale to avoid overflow for huge coordinates
    return m * sum((v / m) ** p for v in mods) ** (1.0 / p)


# ---------------------------------------------------------------------------
# primes


def primes_up_to(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for q in range(2, math.isqrt(n) + 1):
        if sieve[q]:
            sieve[q * q::q] = False
    return [int(v) for v in np.flatnonzero(sieve)]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def prime_factors(n: int) -> list[int]:
    n = abs(n)
    out = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


# ---------------------------------------------------------------------------
# serialization


def to_jsonable(obj: Any) -> Any:
    """Recursively convert reports to plain JSON types.

    Fractions become ``"p/q"`` strings, infinities become ``"inf"``.
    """
    if is_dataclass(obj) and not isinstance(obj, type):
        if hasattr(obj, "to_dict"):
            return to_jsonable(obj.to_dict())
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, Fraction):
        return str(obj) if obj.denominator != 1 else obj.numerator
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        if math.isnan(obj):
            return "nan"
        return obj
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return to_jsonable(float(obj))
    if isinstance(obj, Gaussian):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2)


def linear_substitution(f: HomogeneousForm, M: Sequence[Sequence[int]]) -> HomogeneousForm:
    """The form g(y) = f(M y), expanded exactly."""
    n = f.nvars
    if len(M) != n or any(len(row) != n for row in M):
        raise DimensionMismatch("substitution matrix must be square of size nvars")
    # each x_i is the linear form sum_j M[i][j] y_j
    lin = []
    for i in range(n):
        poly = {}
        for j in range(n):
            if M[i][j]:
                e = [0] * n
                e[j] = 1
                poly[tuple(e)] = int(M[i][j])
        lin.append(poly)

    def mul(p, q):
        out: dict[tuple[int, ...], int] = {}
        for e1, c1 in p.items():
            for e2, c2 in q.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return out

    total: dict[tuple[int, ...], int] = {}
    for exps, c in f.terms:
        prod = {(0,) * n: c}
        for i, e in enumerate(exps):
            for _ in range(e):
                prod = mul(prod, lin[i])
        for e, v in prod.items():
            total[e] = total.get(e, 0) + v
    return HomogeneousForm(f.degree, n, tuple((e, v) for e, v in total.items() if v))
