"""Enumeration of rational points of bounded anticanonical height, fitting of
the leading constant, and minimal-height point search over Q and Q(i).

Heights. For P^n the anticanonical height is ||x||^{n+1}; for a hypersurface
of degree d in P^{n+1} it is ||x||^{n+2-d}; a metric shift lam multiplies both
by e^{lam/2}.

Scanning. Points are enumerated as one representative of each pair {x, -x}:
the enumerated prefix has its first nonzero coordinate positive. If some
variable occurs only in a pure power c x_v^d, it is solved for exactly
(integer d-th root) instead of scanned. Work is sharded round-robin on the
first prefix coordinate; shards are summed exactly, so counts do not depend
on the shard count.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .core import (DiagonalForm, Gaussian, HomogeneousForm, MetricSpec, ProjectiveSpace,
                   anticanonical_twist, as_form, lp_norm, normalize_gaussian, normalize_point,
                   RationalPoint, GaussianPoint, INT64_SAFE)
from .errors import BudgetExceeded, InputError, InsufficientData

DEFAULT_BUDGET = 5 * 10**7
BLOCK = 1 << 18
SIEVE_MODULI = (3, 4, 5, 7, 8, 9, 11, 13)
SHIFT_RTOL = 1e-12


# ---------------------------------------------------------------------------
# exclusions


@dataclass(frozen=True)
class LinearSubvariety:
    """Common zero set of integer linear forms (rows of ``equations``)."""

    equations: tuple[tuple[int, ...], ...]
    name: str = ""

    @classmethod
    def from_dict(cls, data: dict) -> LinearSubvariety:
        return cls(tuple(tuple(int(c) for c in row) for row in data["equations"]),
                   str(data.get("name", "")))

    def to_dict(self) -> dict:
        return {"name": self.name, "equations": [list(r) for r in self.equations]}

    def contains(self, X: np.ndarray) -> np.ndarray:
        mask = np.ones(X.shape[0], dtype=bool)
        for row in self.equations:
            mask &= (X @ np.array(row, dtype=np.int64)) == 0
        return mask


def load_exclusions(data) -> list[LinearSubvariety]:
    if isinstance(data, dict):
        data = data.get("subvarieties", data.get("lines", []))
    return [LinearSubvariety.from_dict(d) for d in data]


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class CountReport:
    B_grid: list[float]
    counts: list[int]
    excluded: list[str]
    metric: MetricSpec
    theta_hat: float | None = None
    stderr: float | None = None
    r_used: int = 0
    truncated: bool = False
    shards: int = 1
    note: str = ""

    def to_dict(self) -> dict:
        return {"B_grid": self.B_grid, "counts": self.counts, "excluded": self.excluded,
                "metric": self.metric.name, "shift": self.metric.shift,
                "theta_hat": self.theta_hat, "stderr": self.stderr, "r_used": self.r_used,
                "truncated": self.truncated, "shards": self.shards, "note": self.note}


@dataclass(frozen=True)
class MinPointReport:
    point: RationalPoint | GaussianPoint | None
    H_min: float | None
    search_bound: float
    field: str
    certificate: dict | None = None
    note: str = ""

    def to_dict(self) -> dict:
        pt = None
        if self.point is not None:
            pt = [str(c) for c in self.point.coords] if self.field == "qi" else list(self.point.coords)
        return {"point": pt, "H_min": self.H_min, "search_bound": self.search_bound,
                "field": self.field, "certificate": self.certificate, "note": self.note}


# ---------------------------------------------------------------------------
# scanning


def _solve_variable(form: HomogeneousForm | None, prefer: str = "large") -> int | None:
    """A variable occurring only in one pure-power term.

    "large" prefers big coefficients (fewest exact roots, fastest counting);
    "small" prefers small ones (the solved coordinate can then carry the
    largest entry, which shrinks minimal-point search boxes).
    """
    if form is None:
        return None
    best, best_key = None, None
    for v in range(form.nvars):
        touching = [(e, c) for e, c in form.terms if e[v]]
        if len(touching) == 1 and touching[0][0][v] == form.degree:
            c = abs(touching[0][1])
            key = c if prefer == "large" else -c
            if best_key is None or key > best_key:
                best, best_key = v, key
    return best


def _int_root(u: np.ndarray, d: int) -> tuple[np.ndarray, np.ndarray]:
    """(t, ok) with t^d == u exactly where ok; t >= 0 for even d."""
    if d == 1:
        return u.copy(), np.ones(u.shape, dtype=bool)
    mag = np.abs(u).astype(np.float64)
    t0 = np.rint(mag ** (1.0 / d)).astype(np.int64)
    ok = np.zeros(u.shape, dtype=bool)
    t = np.zeros_like(u)
    au = np.abs(u)
    for delta in (-1, 0, 1):
        cand = np.maximum(t0 + delta, 0)
        hit = (cand**d == au) & ~ok
        t[hit] = cand[hit]
        ok |= hit
    if d % 2 == 0:
        ok &= u >= 0
    else:
        t = np.where(u < 0, -t, t)
    return t, ok


def _canonical_rows(X: np.ndarray) -> np.ndarray:
    """Rows whose first nonzero entry is positive."""
    nz = X != 0
    first = np.argmax(nz, axis=1)
    lead = X[np.arange(X.shape[0]), first]
    return lead > 0


class _Scanner:
    def __init__(self, variety, sieve: bool = True, prefer: str = "large", clip: bool = True):
        self.variety = variety
        self.form = as_form(variety)
        self.N = variety.nvars
        self.clip = clip
        self.solve = _solve_variable(self.form, prefer)
        self.sieve = sieve and self.solve is not None
        if self.solve is not None:
            f = self.form
            (self.solve_c,) = [c for e, c in f.terms if e[self.solve]]
            rest = tuple((e, c) for e, c in f.terms if not e[self.solve])
            idx = [i for i in range(self.N) if i != self.solve]
            self.rest_terms = tuple((tuple(e[i] for i in idx), c) for e, c in rest)
            self.prefix_idx = idx
            self.tables = []
            for q in SIEVE_MODULI:
                allowed = np.zeros(q, dtype=bool)
                for t in range(q):
                    allowed[(self.solve_c * t**f.degree) % q] = True
                if not allowed.all():
                    self.tables.append((q, allowed))

    @property
    def prefix_dim(self) -> int:
        return self.N - 1 if self.solve is not None else self.N

    def candidates(self, T: int) -> int:
        P = self.prefix_dim
        return (T + 1) * (2 * T + 1) ** (P - 1)

    def _prefix_blocks(self, T: int, shard: int, shards: int) -> Iterator[np.ndarray]:
        P = self.prefix_dim
        span = np.arange(-T, T + 1, dtype=np.int64)
        tail = 0
        while tail < P - 1 and (2 * T + 1) ** (tail + 1) <= BLOCK:
            tail += 1
        head = P - 1 - tail
        if tail:
            grids = np.meshgrid(*([span] * tail), indexing="ij")
            G = np.stack([g.ravel() for g in grids], axis=1)
        else:
            G = np.zeros((1, 0), dtype=np.int64)
        for c0 in range(shard, T + 1, shards):
            for mid in itertools.product(range(-T, T + 1), repeat=head):
                fixed = np.array((c0,) + mid, dtype=np.int64)
                block = np.concatenate([np.broadcast_to(fixed, (G.shape[0], fixed.size)), G], axis=1)
                if c0 == 0:
                    block = block[_canonical_rows(block)] if block.size else block
                if block.shape[0]:
                    yield block

    def _check_range(self, T: int) -> None:
        if self.form is not None and self.form.max_abs_value(T) * (1 if self.clip else 8) >= INT64_SAFE:
            raise BudgetExceeded("values exceed exact int64 range at this height bound")

    def scan(self, T: int, shard: int = 0, shards: int = 1) -> Iterator[np.ndarray]:
        """Blocks of solutions (original variable order), one per {x, -x}."""
        self._check_range(T)
        from .core import eval_terms_array
        for pre in self._prefix_blocks(T, shard, shards):
            if self.form is None:
                yield pre
                continue
            if self.solve is None:
                yield pre[eval_terms_array(self.form.terms, pre) == 0]
                continue
            if self.sieve:
                keep = np.ones(pre.shape[0], dtype=bool)
                for q, allowed in self.tables:
                    r = (-eval_terms_array(self.rest_terms, pre, q)) % q
                    keep &= allowed[r]
                pre = pre[keep]
                if not pre.shape[0]:
                    continue
            s = -eval_terms_array(self.rest_terms, pre)
            divisible = s % self.solve_c == 0
            pre, s = pre[divisible], s[divisible]
            t, ok = _int_root(s // self.solve_c, self.form.degree)
            if self.clip:
                ok &= np.abs(t) <= T
            pre, t = pre[ok], t[ok]
            if self.form.degree % 2 == 0:
                pos = t > 0
                pre = np.concatenate([pre, pre[pos]])
                t = np.concatenate([t, -t[pos]])
            X = np.empty((pre.shape[0], self.N), dtype=np.int64)
            X[:, self.prefix_idx] = pre
            X[:, self.solve] = t
            yield X


def _height_keys(X: np.ndarray, metric: MetricSpec):
    if math.isinf(metric.p):
        return np.abs(X).max(axis=1)
    if metric.p == 2:
        return (X * X).sum(axis=1)
    return np.array([lp_norm(row, metric.p) for row in X.tolist()])


def _unshifted_bound(B: float, metric: MetricSpec) -> float:
    # e^{lam/2} e^{-lam/2} is not exactly 1 in floating point; points whose
    # height sits on the boundary within 1e-12 relative are counted
    if metric.shift == 0:
        return B
    return B * math.exp(-metric.shift / 2) * (1 + SHIFT_RTOL)


def _key_threshold(B: float, metric: MetricSpec, k: int):
    """Largest admissible key value for anticanonical height <= B."""
    Bp = _unshifted_bound(B, metric)
    if Bp < 1 and math.isinf(metric.p):
        return -1
    if math.isinf(metric.p) or metric.p == 2:
        exact = Fraction(Bp)
        e = 1 if math.isinf(metric.p) else 2
        # key^k <= Bp^e
        target = exact**e
        M = int(max(0.0, float(Bp) ** (e / k)))
        while M > 0 and Fraction(M) ** k > target:
            M -= 1
        while Fraction(M + 1) ** k <= target:
            M += 1
        return M
    return Bp ** (1.0 / k)


def _coordinate_bound(B: float, metric: MetricSpec, k: int) -> int:
    Bp = _unshifted_bound(B, metric)
    if Bp <= 0:
        return 0
    T = int(Bp ** (1.0 / k)) + 1
    while T > 0 and T**k > Bp:
        T -= 1
    return T


def default_grid(B: float, grid: int) -> list[float]:
    if grid < 1:
        raise InputError("grid must be positive")
    if grid == 1:
        return [float(B)]
    return [float(v) for v in np.geomspace(B / 2 ** (grid - 1), B, grid)]


def _shard_keys(job) -> np.ndarray:
    scanner, T, shard, shards, exclusions, metric = job
    keys = []
    for X in scanner.scan(T, shard, shards):
        if not X.shape[0]:
            continue
        X = X[np.gcd.reduce(np.abs(X), axis=1) == 1]
        for sub in exclusions:
            X = X[~sub.contains(X)]
        if X.shape[0]:
            keys.append(_height_keys(X, metric))
    return np.concatenate(keys) if keys else None


def count_points(variety, metric: MetricSpec | None = None, B: float = 100.0,
                 exclusions: Sequence[LinearSubvariety] = (), grid: int = 8,
                 B_grid: Sequence[float] | None = None, shards: int = 1, sieve: bool = True,
                 budget: int = DEFAULT_BUDGET, r: int = 0, fit: bool = True,
                 workers: int = 1) -> CountReport:
    """Exact N(B) = #{x : f(x) = 0, H(x) <= B, x not on an excluded subvariety}.

    Shards may run in ``workers`` processes; the result does not depend on either.
    """
    metric = metric or MetricSpec.weil()
    if metric.twist is not None:
        raise InputError("twisted metrics are not supported for counting")
    if B < 1:
        raise InputError("need B >= 1")
    if shards < 1:
        raise InputError("need at least one shard")
    k = anticanonical_twist(variety)
    if k <= 0:
        raise InputError("variety is not Fano; the anticanonical height is undefined")
    grid_vals = sorted(float(b) for b in (B_grid if B_grid is not None else default_grid(B, grid)))
    scanner = _Scanner(variety, sieve)
    truncated = False
    feasible = [b for b in grid_vals if scanner.candidates(_coordinate_bound(b, metric, k)) <= budget]
    if len(feasible) < len(grid_vals):
        truncated = True
        if not feasible:
            raise BudgetExceeded("even the smallest grid bound exceeds the scan budget")
        grid_vals = feasible
    T = _coordinate_bound(grid_vals[-1], metric, k)
    jobs = [(scanner, T, shard, shards, tuple(exclusions), metric) for shard in range(shards)]
    if workers > 1 and shards > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            keys = list(pool.map(_shard_keys, jobs))
    else:
        keys = [_shard_keys(job) for job in jobs]
    keys = [k for k in keys if k is not None]
    allkeys = np.sort(np.concatenate(keys)) if keys else np.zeros(0)
    counts = [int(np.searchsorted(allkeys, _key_threshold(b, metric, k), side="right"))
              for b in grid_vals]
    report = CountReport(grid_vals, counts, [s.name or str(s.equations) for s in exclusions],
                         metric, None, None, r, truncated, shards,
                         "partial grid: budget exceeded" if truncated else "")
    if fit and len(grid_vals) >= 4:
        th, se = fit_theta(report, r)
        report = CountReport(**{**report.__dict__, "theta_hat": th, "stderr": se})
    return report


def fit_theta(report, r: int = 0) -> tuple[float, float]:
    """Least squares N(B) ~ Theta B (log B)^r through the origin on the tail half.

    Accepts a CountReport or a pair (B_grid, counts). A large stderr relative
    to the estimate signals model misfit.
    """
    if isinstance(report, CountReport):
        Bs, Ns = report.B_grid, report.counts
    else:
        Bs, Ns = report
    if len(Bs) < 4:
        raise InsufficientData("need at least 4 grid values")
    m = len(Bs)
    tail = slice(m - max(2, (m + 1) // 2), m)
    B = np.asarray(Bs, dtype=float)[tail]
    N = np.asarray(Ns, dtype=float)[tail]
    x = B * np.log(B) ** r
    sxx = float(np.dot(x, x))
    theta = float(np.dot(x, N) / sxx)
    res = N - theta * x
    dof = max(1, len(x) - 1)
    stderr = float(math.sqrt(np.dot(res, res) / dof / sxx))
    return theta, stderr


# ---------------------------------------------------------------------------
# minimal points


def _eval_gaussian(terms, re: np.ndarray, im: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    out_re = np.zeros(re.shape[0], dtype=np.int64)
    out_im = np.zeros(re.shape[0], dtype=np.int64)
    for exps, c in terms:
        mr = np.full(re.shape[0], c, dtype=np.int64)
        mi = np.zeros(re.shape[0], dtype=np.int64)
        for i, e in enumerate(exps):
            for _ in range(e):
                mr, mi = mr * re[:, i] - mi * im[:, i], mr * im[:, i] + mi * re[:, i]
        out_re += mr
        out_im += mi
    return out_re, out_im


def pointless_certificate(form: HomogeneousForm, max_modulus: int = 10**4,
                          budget: int = 10**6) -> dict | None:
    """Search p^r for which f has no solution primitive mod p (hence no Q-point).

    Odd primes dividing a coefficient are tried first, then all primes < 50.
    """
    from .localdens import count_primitive_affine
    from .core import primes_up_to, prime_factors
    divisors = sorted({q for c in form.coefficients for q in prime_factors(c) if q > 2})
    order = divisors + [q for q in primes_up_to(50) if q not in divisors]
    for p in order:
        r = 1
        while p**r <= max_modulus:
            try:
                c = count_primitive_affine(form, p, r, budget)
            except BudgetExceeded:
                break
            if c == 0:
                return {"p": p, "r": r, "modulus": p**r,
                        "statement": f"no solution primitive mod {p} exists mod {p ** r}"}
            r += 1
    return None


def _point_key(nrm: float, coords) -> tuple:
    # ties: fewer negative entries, then smaller absolute values
    return (nrm, sum(1 for c in coords if c < 0), tuple(abs(c) for c in coords))


def _min_point_q(variety, metric: MetricSpec, T_cap: int, budget: int):
    scanner = _Scanner(variety, prefer="small", clip=False)
    best = None
    T = 1
    while True:
        T = min(T, T_cap)
        if scanner.candidates(T) > budget:
            raise BudgetExceeded(f"search box {T} exceeds budget")
        for X in scanner.scan(T):
            for row in X.tolist():
                if not any(row):
                    continue
                coords = normalize_point(row).coords
                cand = (_point_key(lp_norm(coords, metric.p), coords), coords)
                if best is None or cand < best:
                    best = cand
        # anything not yet scanned has a prefix coordinate >= T + 1
        if best is not None and best[0][0] <= T + 1:
            return (best[0][0], best[1]), T
        if T >= T_cap:
            return ((best[0][0], best[1]) if best else None), T
        T *= 2


def _gaussian_pow(re: np.ndarray, im: np.ndarray, d: int) -> tuple[np.ndarray, np.ndarray]:
    pr, pi = np.ones_like(re), np.zeros_like(re)
    for _ in range(d):
        pr, pi = pr * re - pi * im, pr * im + pi * re
    return pr, pi


def _gaussian_blocks(T: int, dims: int) -> Iterator[np.ndarray]:
    """All tuples of `dims` Gaussian integers with |re|, |im| <= T, as rows
    (re_1..re_dims, im_1..im_dims), in blocks split on the leading coordinates."""
    span = np.arange(-T, T + 1, dtype=np.int64)
    free = 2 * dims
    tail = free
    while tail > 1 and (2 * T + 1) ** tail > BLOCK:
        tail -= 1
    grids = np.meshgrid(*([span] * tail), indexing="ij")
    G = np.stack([g.ravel() for g in grids], axis=1)
    for head in itertools.product(range(-T, T + 1), repeat=free - tail):
        fixed = np.broadcast_to(np.array(head, dtype=np.int64), (G.shape[0], free - tail))
        flat = np.concatenate([fixed, G], axis=1)
        # columns are ordered re_1, im_1, re_2, im_2, ...
        yield np.concatenate([flat[:, 0::2], flat[:, 1::2]], axis=1)


def _gaussian_solutions(form, N: int, solve, block: np.ndarray, dims: int):
    re, im = block[:, :dims], block[:, dims:]
    nonzero = np.any(block != 0, axis=1)
    if solve is None:
        if form is not None:
            vr, vi = _eval_gaussian(form.terms, re, im)
            nonzero &= (vr == 0) & (vi == 0)
        return re[nonzero], im[nonzero]
    d = form.degree
    (c,) = [cc for e, cc in form.terms if e[solve]]
    idx = [i for i in range(N) if i != solve]
    rest = tuple((tuple(e[i] for i in idx), cc) for e, cc in form.terms if not e[solve])
    sr, si = _eval_gaussian(rest, re, im)
    sr, si = -sr, -si
    div = (sr % c == 0) & (si % c == 0) & nonzero
    re, im, ur, ui = re[div], im[div], sr[div] // c, si[div] // c
    u = ur.astype(float) + 1j * ui.astype(float)
    outs_r, outs_i = [], []
    for kk in range(d):
        w = np.abs(u) ** (1.0 / d) * np.exp(1j * (np.angle(u) + 2 * np.pi * kk) / d)
        wr, wi = np.rint(w.real).astype(np.int64), np.rint(w.imag).astype(np.int64)
        pr, pi = _gaussian_pow(wr, wi, d)
        hit = (pr == ur) & (pi == ui)
        XR = np.empty((int(hit.sum()), N), dtype=np.int64)
        XI = np.empty_like(XR)
        XR[:, idx], XI[:, idx] = re[hit], im[hit]
        XR[:, solve], XI[:, solve] = wr[hit], wi[hit]
        outs_r.append(XR)
        outs_i.append(XI)
    return np.concatenate(outs_r), np.concatenate(outs_i)


def _min_point_qi(variety, metric: MetricSpec, T_cap: int, budget: int):
    form = as_form(variety)
    N = variety.nvars
    solve = _solve_variable(form, "small")
    dims = N - 1 if solve is not None else N
    best = None
    T = 1
    while True:
        T = min(T, T_cap)
        if (2 * T + 1) ** (2 * dims) > budget:
            raise BudgetExceeded(f"Gaussian search box {T} exceeds budget")
        for block in _gaussian_blocks(T, dims):
            XR, XI = _gaussian_solutions(form, N, solve, block, dims)
            for rr, ii in zip(XR.tolist(), XI.tolist()):
                if not any(rr) and not any(ii):
                    continue
                pt = normalize_gaussian(list(zip(rr, ii)))
                nrm = lp_norm([complex(z) for z in pt.coords], metric.p)
                key = (nrm, tuple((z.re, z.im) for z in pt.coords))
                if best is None or key < best[0]:
                    best = (key, pt)
        # outside the box some prefix coordinate has |re| or |im| >= T + 1
        if best is not None and best[0][0] <= T + 1:
            return (best[0][0], best[1]), T
        if T >= T_cap:
            return ((best[0][0], best[1]) if best else None), T
        T *= 2


def min_point(variety, metric: MetricSpec | None = None, B_cap: float = 1e6,
              field: str = "q", budget: int = DEFAULT_BUDGET,
              certificate: bool = True) -> MinPointReport:
    """Point of least anticanonical height found by expanding box search.

    A point, once found, is minimal: the search only stops when no point
    outside the searched box can have smaller height. Over Q(i) this bounds the
    infimum over algebraic points from above only.
    """
    metric = metric or MetricSpec.weil()
    if B_cap < 1:
        raise InputError("need B_cap >= 1")
    k = anticanonical_twist(variety)
    if k <= 0:
        raise InputError("variety is not Fano")
    scale = math.exp(metric.shift / 2)
    T_cap = max(1, int((B_cap / scale) ** (1.0 / k)))
    if field == "q" and certificate and as_form(variety) is not None:
        cert = pointless_certificate(as_form(variety))
        if cert is not None:
            return MinPointReport(None, None, B_cap, field, cert, "no rational points at all")
    if field == "q":
        best, T = _min_point_q(variety, metric, T_cap, budget)
    elif field == "qi":
        best, T = _min_point_qi(variety, metric, T_cap, budget)
    else:
        raise InputError("field must be 'q' or 'qi'")
    note = "" if field == "q" else "upper bound for the infimum over algebraic points"
    if best is not None:
        H = best[0] ** k * scale
        if H <= B_cap:
            pt = normalize_point(best[1]) if field == "q" else best[1]
            return MinPointReport(pt, H, B_cap, field, None, note)
    return MinPointReport(None, None, B_cap, field, None,
                          (note + "; " if note else "") + f"no point with H <= {B_cap:g}")


@dataclass(frozen=True)
class GrowthRow:
    a: int
    H_min: float | None
    point: tuple | None
    a_pow: float
    certificate: dict | None = None

    def to_dict(self) -> dict:
        return {"a": self.a, "H_min": self.H_min, "point": list(self.point) if self.point else None,
                "a^(1/d)": self.a_pow, "certificate": self.certificate}


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    lx, ly = np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float))
    return float(np.polyfit(lx, ly, 1)[0])


def min_height_growth(d: int, n: int, a_grid: Sequence[int], metric: MetricSpec | None = None,
                      B_cap: float = 1e3, budget: int = DEFAULT_BUDGET) -> dict:
    """Minimal heights on -a x_0^d + x_1^d + ... + x_{n+1}^d over an a-grid.

    Members without rational points (a local certificate is attached) have
    infinite minimal height; the log-log slope is fitted over the others.
    """
    rows = []
    for a in a_grid:
        rep = min_point(DiagonalForm.xa(d, n, a), metric, B_cap, "q", budget)
        rows.append(GrowthRow(a, rep.H_min, rep.point.coords if rep.point else None,
                              a ** (1 / d), rep.certificate))
    found = [r for r in rows if r.H_min is not None]
    slope = loglog_slope([r.a for r in found], [r.H_min for r in found]) if len(found) >= 2 else None
    return {"d": d, "n": n, "rows": rows, "slope": slope, "reference_exponent": 1 / d,
            "pointless": [r.a for r in rows if r.certificate is not None]}
