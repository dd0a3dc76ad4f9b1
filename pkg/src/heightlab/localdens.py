"""p-adic local densities by counting points modulo p^r.

Counting convention: the projective count mod p^r is the number of tuples in
(Z/p^r)^N that are primitive mod p and satisfy f = 0 mod p^r, divided by the
number of units p^{r-1}(p-1). The density is count / p^{r n}, n the dimension.

Lifting. A residue class x mod p^k with f(x) = 0 mod p^k and gradient
valuation v is "stable" once k >= 2v + 1: from then on, by Hensel's lemma,
the classes above it grow by exactly p^{N-1} per level, so only their number
is tracked. Unstable classes are lifted explicitly through all p^N offsets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from .core import (DiagonalForm, HomogeneousForm, ProjectiveSpace, as_form, dimension,
                   eval_terms_array, is_prime, prime_factors, primes_up_to)
from .errors import BadReduction, BudgetExceeded, InputError, NotStabilized

DEFAULT_BUDGET = 10**7
DEFAULT_RMAX = 6
MAX_MODULUS = 2**31 - 1


@dataclass(frozen=True)
class LocalDensity:
    p: int
    r_used: int
    count: int
    mu_p: Fraction
    stabilized: bool
    good_reduction: bool
    method: str = ""

    def to_dict(self) -> dict:
        return {"p": self.p, "r_used": self.r_used, "count": self.count,
                "mu_p": str(self.mu_p), "mu_p_float": float(self.mu_p),
                "stabilized": self.stabilized, "good_reduction": self.good_reduction,
                "method": self.method}


@dataclass(frozen=True)
class EulerProductReport:
    factors: list[tuple[int, Fraction]]
    partial_products: list[float]
    P_max: int
    tail_note: str
    flagged: list[tuple[int, str]] = field(default_factory=list)

    @property
    def value(self) -> float:
        return self.partial_products[-1] if self.partial_products else 1.0

    def to_dict(self) -> dict:
        return {"P_max": self.P_max, "value": self.value,
                "factors": [[p, str(f), float(f)] for p, f in self.factors],
                "partial_products": self.partial_products,
                "tail_note": self.tail_note,
                "flagged": [list(x) for x in self.flagged]}


@dataclass(frozen=True)
class DeligneReport:
    p: int
    count: int
    pi_n: int
    deviation: float

    def to_dict(self) -> dict:
        return {"p": self.p, "count": self.count, "pi_n": self.pi_n, "deviation": self.deviation}


def _check_prime(p: int) -> None:
    if not is_prime(p):
        raise InputError(f"{p} is not prime")


def projective_space_count(m: int, p: int, r: int = 1) -> int:
    """#P^m(Z/p^r) = (p^{r(m+1)} - p^{(r-1)(m+1)}) / (p^{r-1}(p-1))."""
    num = p ** (r * (m + 1)) - p ** ((r - 1) * (m + 1))
    return num // (p ** (r - 1) * (p - 1))


def pi_n(n: int, p: int) -> int:
    return sum(p**i for i in range(n + 1))


# ---------------------------------------------------------------------------
# fast counts over F_p


def _powmod_vec(x: np.ndarray, e: int, p: int) -> np.ndarray:
    out = np.ones_like(x)
    base = x % p
    while e:
        if e & 1:
            out = (out * base) % p
        base = (base * base) % p
        e >>= 1
    return out


def _cyclic_conv(h1: np.ndarray, h2: np.ndarray, p: int) -> np.ndarray:
    c = np.convolve(h1, h2)
    out = c[:p].copy()
    out[: p - 1] += c[p:]
    return out


def diagonal_affine_count(a: Iterable[int], d: int, p: int) -> int:
    """#{x in F_p^N : sum a_i x_i^d = 0}, zero vector included."""
    a = list(a)
    if p >= 2**31:
        raise BudgetExceeded("prime too large for the histogram count")
    xd = _powmod_vec(np.arange(p, dtype=np.int64), d, p)
    hists = [np.bincount((ai % p) * xd % p, minlength=p).astype(np.int64) for ai in a]
    if len(hists) == 1:
        return int(hists[0][0])
    half = len(hists) // 2

    def fold(hs):
        acc = hs[0]
        for h in hs[1:]:
            acc = _cyclic_conv(acc, h, p)
        return acc

    A = fold(hists[:half])
    B = fold(hists[half:])
    neg = (-np.arange(p)) % p
    return int(np.dot(A.astype(object), B[neg].astype(object)))


def _legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def _quadratic_diagonal_mod_p(f: HomogeneousForm, p: int) -> list[int]:
    """Nonzero diagonal entries of the symmetric matrix of f over F_p (p odd)."""
    n = f.nvars
    inv2 = pow(2, -1, p)
    A = [[0] * n for _ in range(n)]
    for e, c in f.terms:
        idx = [i for i, v in enumerate(e) for _ in range(v)]
        i, j = idx
        if i == j:
            A[i][i] = (A[i][i] + c) % p
        else:
            A[i][j] = (A[i][j] + c * inv2) % p
            A[j][i] = A[i][j]
    diag = []
    size = n
    rows = list(range(n))
    while rows:
        piv = next((i for i in rows if A[i][i] % p), None)
        if piv is None:
            pair = next(((i, j) for i in rows for j in rows if i != j and A[i][j] % p), None)
            if pair is None:
                break
            i, j = pair
            # replace basis vector e_i by e_i + e_j so that the diagonal entry is nonzero
            for k in range(size):
                A[i][k] = (A[i][k] + A[j][k]) % p
            for k in range(size):
                A[k][i] = (A[k][i] + A[k][j]) % p
            piv = i
        dval = A[piv][piv] % p
        diag.append(dval)
        inv = pow(dval, -1, p)
        rest = [i for i in rows if i != piv]
        for i in rest:
            factor = A[i][piv] * inv % p
            if factor:
                for k in range(size):
                    A[i][k] = (A[i][k] - factor * A[piv][k]) % p
                for k in range(size):
                    A[k][i] = (A[k][i] - factor * A[k][piv]) % p
        rows = rest
    return diag


def quadratic_affine_count(f: HomogeneousForm, p: int) -> int:
    """#{x in F_p^N : Q(x) = 0}, zero included, for odd p."""
    if p == 2 or f.degree != 2:
        raise InputError("quadratic count needs a quadratic form and odd p")
    diag = _quadratic_diagonal_mod_p(f, p)
    m = len(diag)
    N = f.nvars
    if m == 0:
        return p**N
    if m % 2:
        core = p ** (m - 1)
    else:
        disc = (-1) ** (m // 2) * math.prod(diag)
        core = p ** (m - 1) + (p - 1) * p ** (m // 2 - 1) * _legendre(disc, p)
    return core * p ** (N - m)


def _decode(idx: np.ndarray, p: int, N: int) -> np.ndarray:
    out = np.empty((idx.size, N), dtype=np.int64)
    cur = idx.copy()
    for i in range(N - 1, -1, -1):
        out[:, i] = cur % p
        cur //= p
    return out


def _fp_zeros(f: HomogeneousForm, p: int, budget: int, chunk: int = 1 << 20) -> np.ndarray:
    """All nonzero x in F_p^N with f(x) = 0 mod p, sharded by leading coordinate."""
    N = f.nvars
    total = p**N
    if total > budget:
        raise BudgetExceeded(f"p^N = {total} exceeds the enumeration budget {budget}")
    found = []
    for start in range(1, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        X = _decode(idx, p, N)
        vals = eval_terms_array(f.terms, X, p)
        found.append(X[vals == 0])
    return np.concatenate(found) if found else np.zeros((0, N), dtype=np.int64)


def affine_count_fp(f: HomogeneousForm, p: int, budget: int = DEFAULT_BUDGET) -> int:
    """Primitive (nonzero) affine count over F_p, using the fastest exact route."""
    diag = f.diagonal_coefficients()
    if diag is not None:
        return diagonal_affine_count(diag, f.degree, p) - 1
    if f.degree == 2 and p != 2:
        return quadratic_affine_count(f, p) - 1
    return int(_fp_zeros(f, p, budget).shape[0])


# ---------------------------------------------------------------------------
# lifting


def _valuation(vals: np.ndarray, p: int, K: int) -> np.ndarray:
    v = np.zeros(vals.shape, dtype=np.int64)
    q = 1
    for _ in range(K):
        q *= p
        v += (vals % q == 0)
    return v


def _grad_valuation(grad, X: np.ndarray, p: int, K: int) -> np.ndarray:
    mod = p**K
    best = np.full(X.shape[0], K, dtype=np.int64)
    for terms in grad:
        if not terms:
            continue
        vals = eval_terms_array(terms, X, mod)
        best = np.minimum(best, _valuation(vals, p, K))
    return best


@dataclass
class _LiftState:
    level: int
    stable_weight: int
    explicit: np.ndarray

    @property
    def count(self) -> int:
        return self.stable_weight + int(self.explicit.shape[0])


def lift_levels(f: HomogeneousForm, p: int, R: int, budget: int = DEFAULT_BUDGET) -> list[int]:
    """Primitive affine solution counts mod p^k for k = 1..R."""
    N = f.nvars
    grad = f.gradient()
    X = _fp_zeros(f, p, budget)
    v = _grad_valuation(grad, X, p, 1)
    stable = v == 0
    state = _LiftState(1, int(stable.sum()), X[~stable])
    counts = [state.count]
    offsets = _decode(np.arange(p**N, dtype=np.int64), p, N)
    for k in range(1, R):
        mod = p ** (k + 1)
        if mod > MAX_MODULUS:
            raise BudgetExceeded(f"p^{k + 1} exceeds the int64 evaluation range")
        E = state.explicit
        if E.shape[0] * p**N > budget:
            raise BudgetExceeded(f"{E.shape[0] * p ** N} lift candidates exceed budget {budget}")
        new_weight = state.stable_weight * p ** (N - 1)
        keep = []
        step = max(1, (1 << 20) // p**N)
        for s in range(0, E.shape[0], step):
            cand = (E[s:s + step, None, :] + p**k * offsets[None, :, :]).reshape(-1, N)
            cand = cand[eval_terms_array(f.terms, cand, mod) == 0]
            if cand.size == 0:
                continue
            vv = _grad_valuation(grad, cand, p, k + 1)
            st = (k + 1) >= 2 * vv + 1
            new_weight += int(st.sum())
            keep.append(cand[~st])
        explicit = np.concatenate(keep) if keep else np.zeros((0, N), dtype=np.int64)
        state = _LiftState(k + 1, new_weight, explicit)
        counts.append(state.count)
    return counts


def count_primitive_affine(f, p: int, r: int, budget: int = DEFAULT_BUDGET) -> int:
    form = as_form(f)
    if r == 1:
        return affine_count_fp(form, p, budget)
    return lift_levels(form, p, r, budget)[-1]


def count_projective_mod(f, p: int, r: int = 1, budget: int = DEFAULT_BUDGET) -> int:
    """Number of points of the projective variety over Z/p^r (exact)."""
    _check_prime(p)
    if r < 1:
        raise InputError("need r >= 1")
    if isinstance(f, ProjectiveSpace):
        return projective_space_count(f.n, p, r)
    affine = count_primitive_affine(f, p, r, budget)
    units = p ** (r - 1) * (p - 1)
    q, rem = divmod(affine, units)
    assert rem == 0, "primitive solutions come in full unit orbits"
    return q


# ---------------------------------------------------------------------------
# reduction type


def good_reduction_diag(f: DiagonalForm, p: int) -> bool:
    """p does not divide d * prod a_i."""
    return (f.d * math.prod(f.a)) % p != 0


def bad_primes(f) -> list[int]:
    """Primes where reduction may be bad (exact for diagonal and quadratic forms)."""
    if isinstance(f, ProjectiveSpace):
        return []
    form = as_form(f)
    diag = form.diagonal_coefficients()
    if diag is not None:
        return prime_factors(form.degree * math.prod(diag))
    if form.degree == 2:
        return sorted(set([2] + prime_factors(_hessian_det(form))))
    raise InputError("bad primes are only listed for diagonal and quadratic forms")


def _hessian_det(f: HomogeneousForm) -> int:
    from fractions import Fraction as Fr
    n = f.nvars
    H = [[Fr(0)] * n for _ in range(n)]
    for e, c in f.terms:
        idx = [i for i, v in enumerate(e) for _ in range(v)]
        i, j = idx
        if i == j:
            H[i][i] += 2 * c
        else:
            H[i][j] += c
            H[j][i] += c
    det = Fr(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if H[r][col] != 0), None)
        if piv is None:
            return 0
        if piv != col:
            H[col], H[piv] = H[piv], H[col]
            det = -det
        det *= H[col][col]
        for r in range(col + 1, n):
            fac = H[r][col] / H[col][col]
            for k in range(col, n):
                H[r][k] -= fac * H[col][k]
    return int(det)


def good_reduction(f, p: int, budget: int = DEFAULT_BUDGET) -> bool:
    """Smoothness of the reduction mod p.

    Exact for P^n, diagonal forms (p does not divide d prod a_i) and quadratic
    forms at odd p (p does not divide the Hessian determinant). Otherwise the
    F_p-rational points are searched for a common zero of f and its gradient;
    singular points defined only over extensions of F_p are not detected.
    """
    _check_prime(p)
    if isinstance(f, ProjectiveSpace):
        return True
    if isinstance(f, DiagonalForm):
        return good_reduction_diag(f, p)
    form = as_form(f)
    diag = form.diagonal_coefficients()
    if diag is not None:
        return (form.degree * math.prod(diag)) % p != 0
    if form.degree == 2 and p != 2:
        return _hessian_det(form) % p != 0
    X = _fp_zeros(form, p, budget)
    if X.shape[0] == 0:
        return True
    return bool(np.all(_grad_valuation(form.gradient(), X, p, 1) == 0))


# ---------------------------------------------------------------------------
# densities


def local_density(f, p: int, r_max: int = DEFAULT_RMAX, budget: int = DEFAULT_BUDGET,
                  strict: bool = False) -> LocalDensity:
    """mu_p = count mod p^r / p^{r n}, increasing r until no unstable class is left.

    Once every residue class is Hensel-stable the density is exact and equal at
    all further levels. With ``strict`` a non-stabilized result raises
    NotStabilized; otherwise it is returned with ``stabilized=False``.
    """
    _check_prime(p)
    if isinstance(f, ProjectiveSpace):
        c = projective_space_count(f.n, p, 1)
        return LocalDensity(p, 1, c, Fraction(c, p**f.n), True, True, "closed form")
    n = dimension(f)
    form = as_form(f)
    good = good_reduction(f, p, budget)
    units1 = p - 1
    if good:
        c = affine_count_fp(form, p, budget) // units1
        return LocalDensity(p, 1, c, Fraction(c, p**n), True, True, "good reduction, r=1")
    N = form.nvars
    grad = form.gradient()
    X = _fp_zeros(form, p, budget)
    v = _grad_valuation(grad, X, p, 1)
    st = v == 0
    weight, explicit = int(st.sum()), X[~st]
    k = 1
    offsets = None
    while explicit.shape[0] and k < r_max:
        if offsets is None:
            offsets = _decode(np.arange(p**N, dtype=np.int64), p, N)
        mod = p ** (k + 1)
        if mod > MAX_MODULUS or explicit.shape[0] * p**N > budget:
            raise BudgetExceeded(f"lifting to p^{k + 1} exceeds the budget")
        weight *= p ** (N - 1)
        keep = []
        step = max(1, (1 << 20) // p**N)
        for s in range(0, explicit.shape[0], step):
            cand = (explicit[s:s + step, None, :] + p**k * offsets[None, :, :]).reshape(-1, N)
            cand = cand[eval_terms_array(form.terms, cand, mod) == 0]
            if cand.size == 0:
                continue
            vv = _grad_valuation(grad, cand, p, k + 1)
            ok = (k + 1) >= 2 * vv + 1
            weight += int(ok.sum())
            keep.append(cand[~ok])
        explicit = np.concatenate(keep) if keep else np.zeros((0, N), dtype=np.int64)
        k += 1
    affine = weight + explicit.shape[0]
    proj = affine // (p ** (k - 1) * (p - 1))
    mu = Fraction(proj, p ** (k * n))
    stabilized = explicit.shape[0] == 0
    if not stabilized and strict:
        raise NotStabilized(f"density at p={p} not stable by r={r_max}")
    return LocalDensity(p, k, proj, mu, stabilized, False, "hensel lifting")


def euler_product(f, P_max: int, r_max: int = DEFAULT_RMAX, budget: int = DEFAULT_BUDGET,
                  alpha: float = 1.0) -> EulerProductReport:
    """Partial products of prod_p (1 - 1/p) mu_p over p <= P_max (times alpha)."""
    if P_max < 2:
        raise InputError("need P_max >= 2")
    factors: list[tuple[int, Fraction]] = []
    partial: list[float] = []
    flagged: list[tuple[int, str]] = []
    acc = float(alpha)
    for p in primes_up_to(P_max):
        try:
            ld = local_density(f, p, r_max, budget)
            fac = (1 - Fraction(1, p)) * ld.mu_p
            if not ld.stabilized:
                flagged.append((p, f"not stabilized by r={r_max}"))
        except BudgetExceeded as exc:
            flagged.append((p, f"skipped: {exc}"))
            fac = Fraction(1)
        factors.append((p, fac))
        acc *= float(fac)
        partial.append(acc)
    note = ("tail beyond P_max omitted; good-prime factors are 1 + O(p^(-3/2)) "
            "after the convergence factor when the Picard rank is one")
    return EulerProductReport(factors, partial, P_max, note, flagged)


def deligne_check(f, p: int, budget: int = DEFAULT_BUDGET) -> DeligneReport:
    """(#X(F_p), pi_n, |#X(F_p) - pi_n| / p^{n/2}) at a prime of good reduction."""
    _check_prime(p)
    if isinstance(f, ProjectiveSpace):
        c = projective_space_count(f.n, p)
        return DeligneReport(p, c, pi_n(f.n, p), 0.0)
    if not good_reduction(f, p, budget):
        raise BadReduction(f"bad reduction at p={p}")
    n = dimension(f)
    count = affine_count_fp(as_form(f), p, budget) // (p - 1)
    target = pi_n(n, p)
    return DeligneReport(p, count, target, abs(count - target) / p ** (n / 2))
