"""Moment polytopes of toric Fano varieties: exact volume and barycenter,
K-polystability (barycenter at the origin), degrees, binomial equations of the
monomial embedding and the universal height bound.

Facet combinatorics come from Qhull (scipy); every number reported is then
recomputed exactly with Fractions.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from importlib import resources
from typing import Sequence

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .core import parse_rational
from .errors import Degenerate, InputError
from .verdict import c_n_constant

Vector = tuple[Fraction, ...]


# ---------------------------------------------------------------------------
# exact linear algebra


def det(M: Sequence[Sequence[Fraction]]) -> Fraction:
    """Determinant by fraction-exact Gaussian elimination."""
    A = [list(map(Fraction, row)) for row in M]
    n = len(A)
    out = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            A[col], A[piv] = A[piv], A[col]
            out = -out
        out *= A[col][col]
        for r in range(col + 1, n):
            f = A[r][col] / A[col][col]
            if f:
                for c in range(col, n):
                    A[r][c] -= f * A[col][c]
    return out


def rank(rows: Sequence[Sequence[Fraction]]) -> int:
    A = [list(map(Fraction, r)) for r in rows]
    if not A:
        return 0
    m, n = len(A), len(A[0])
    rk = 0
    for col in range(n):
        piv = next((r for r in range(rk, m) if A[r][col] != 0), None)
        if piv is None:
            continue
        A[rk], A[piv] = A[piv], A[rk]
        for r in range(m):
            if r != rk and A[r][col] != 0:
                f = A[r][col] / A[rk][col]
                for c in range(col, n):
                    A[r][c] -= f * A[rk][c]
        rk += 1
    return rk


def _primitive(v: Sequence[Fraction]) -> tuple[int, ...]:
    den = reduce(lambda a, b: a * b // math.gcd(a, b), (x.denominator for x in v), 1)
    ints = [int(x * den) for x in v]
    g = reduce(math.gcd, (abs(x) for x in ints)) or 1
    return tuple(x // g for x in ints)


def integer_kernel(A: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    """Basis of {a in Z^N : A a = 0} by unimodular column reduction."""
    A = [list(map(int, row)) for row in A]
    m = len(A)
    N = len(A[0]) if A else 0
    U = [[int(i == j) for j in range(N)] for i in range(N)]

    def colop_swap(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in U:
            row[i], row[j] = row[j], row[i]

    def colop_add(dst, src, q):
        # column dst -= q * column src
        for row in A:
            row[dst] -= q * row[src]
        for row in U:
            row[dst] -= q * row[src]

    pivot_col = 0
    for r in range(m):
        if pivot_col >= N:
            break
        while True:
            nz = [c for c in range(pivot_col, N) if A[r][c] != 0]
            if not nz:
                break
            c_min = min(nz, key=lambda c: abs(A[r][c]))
            colop_swap(pivot_col, c_min)
            done = True
            for c in range(pivot_col + 1, N):
                if A[r][c]:
                    colop_add(c, pivot_col, A[r][c] // A[r][pivot_col])
                    if A[r][c]:
                        done = False
            if done:
                break
        if any(A[r][c] for c in range(pivot_col, N)):
            pivot_col += 1
    return [tuple(U[i][c] for i in range(N)) for c in range(pivot_col, N)]


# ---------------------------------------------------------------------------
# polytopes


def _hull(points) -> ConvexHull:
    try:
        return ConvexHull(np.array(points), qhull_options="Qt")
    except QhullError as exc:
        raise Degenerate(f"convex hull failed: {exc}") from exc


@dataclass(frozen=True)
class LatticePolytope:
    """Convex hull of rational vertices; the stored list is the minimal one
    (input order preserved)."""

    vertices: tuple[Vector, ...]
    name: str = ""

    @classmethod
    def from_points(cls, points, name: str = "") -> LatticePolytope:
        pts = [tuple(parse_rational(c) for c in p) for p in points]
        if not pts:
            raise Degenerate("no points")
        n = len(pts[0])
        if any(len(p) != n for p in pts):
            raise InputError("points have different dimensions")
        uniq = list(dict.fromkeys(pts))
        if rank([[a - b for a, b in zip(p, uniq[0])] for p in uniq[1:]]) < n:
            raise Degenerate("polytope is not full-dimensional")
        if n == 1:
            lo, hi = min(uniq), max(uniq)
            return cls(tuple(p for p in uniq if p in (lo, hi)), name)
        hull = _hull([[float(c) for c in p] for p in uniq])
        keep = set(int(i) for i in hull.vertices)
        return cls(tuple(p for i, p in enumerate(uniq) if i in keep), name)

    @classmethod
    def from_dict(cls, data: dict) -> LatticePolytope:
        return cls.from_points(data["vertices"], str(data.get("name", "")))

    def to_dict(self) -> dict:
        return {"name": self.name, "vertices": [[str(c) for c in v] for v in self.vertices]}

    @property
    def dim(self) -> int:
        return len(self.vertices[0])

    def interior_point(self) -> Vector:
        k = len(self.vertices)
        return tuple(sum(v[i] for v in self.vertices) / k for i in range(self.dim))

    def _simplices(self) -> list[tuple[Vector, ...]]:
        """Boundary facets, triangulated, as tuples of n vertices."""
        if self.dim == 1:
            return [(v,) for v in self.vertices]
        hull = _hull([[float(c) for c in v] for v in self.vertices])
        return [tuple(self.vertices[int(i)] for i in s) for s in hull.simplices]

    def halfspaces(self) -> list[tuple[tuple[int, ...], Fraction]]:
        """Facets as exact inequalities a . x <= b with a primitive integral."""
        c = self.interior_point()
        n = self.dim
        out = {}
        for simplex in self._simplices():
            if n == 1:
                a = (Fraction(1),) if simplex[0][0] > c[0] else (Fraction(-1),)
            else:
                rows = [[x - y for x, y in zip(v, simplex[0])] for v in simplex[1:]]
                a = tuple((-1) ** j * det([r[:j] + r[j + 1:] for r in rows]) for j in range(n))
                if all(x == 0 for x in a):
                    continue
            b = sum(x * y for x, y in zip(a, simplex[0]))
            if sum(x * y for x, y in zip(a, c)) > b:
                a, b = tuple(-x for x in a), -b
            prim = _primitive(a)
            scale = Fraction(prim[next(i for i, x in enumerate(prim) if x)], 1) / a[
                next(i for i, x in enumerate(prim) if x)]
            out[prim] = b * scale
        return sorted(out.items())

    def contains(self, x: Sequence[Fraction], strict: bool = False) -> bool:
        for a, b in self.halfspaces():
            s = sum(Fraction(ai) * xi for ai, xi in zip(a, x))
            if s > b or (strict and s == b):
                return False
        return True

    def origin_interior(self) -> bool:
        return all(b > 0 for _, b in self.halfspaces())

    def is_reflexive(self) -> bool:
        """Lattice polytope whose facets all read a . x <= 1."""
        lattice = all(v.denominator == 1 for p in self.vertices for v in p)
        return lattice and all(b == 1 for _, b in self.halfspaces())

    def scaled(self, k: int) -> LatticePolytope:
        return LatticePolytope(tuple(tuple(k * c for c in v) for v in self.vertices), self.name)

    def transformed(self, M: Sequence[Sequence[int]], shift: Sequence[int] | None = None) -> LatticePolytope:
        n = self.dim
        t = shift or [0] * n
        verts = tuple(tuple(sum(Fraction(M[i][j]) * v[j] for j in range(n)) + t[i] for i in range(n))
                      for v in self.vertices)
        return LatticePolytope(verts, self.name)

    def lattice_points(self) -> list[tuple[int, ...]]:
        lo = [math.floor(min(v[i] for v in self.vertices)) for i in range(self.dim)]
        hi = [math.ceil(max(v[i] for v in self.vertices)) for i in range(self.dim)]
        hs = self.halfspaces()
        pts = []
        for x in itertools.product(*[range(a, b + 1) for a, b in zip(lo, hi)]):
            if all(sum(ai * xi for ai, xi in zip(a, x)) <= b for a, b in hs):
                pts.append(x)
        return pts


@dataclass(frozen=True)
class ToricReport:
    volume: Fraction
    barycenter: Vector
    degree: Fraction
    kps: bool
    bound_rhs: float
    name: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "volume": str(self.volume), "degree": str(self.degree),
                "barycenter": [str(c) for c in self.barycenter], "kps": self.kps,
                "bound_rhs": self.bound_rhs}


def volume_and_barycenter(P: LatticePolytope) -> tuple[Fraction, Vector]:
    """Exact volume and barycenter by coning the triangulated boundary from an interior point."""
    n = P.dim
    if n == 1:
        lo, hi = sorted(v[0] for v in P.vertices)
        return hi - lo, ((lo + hi) / 2,)
    c = P.interior_point()
    vol = Fraction(0)
    moment = [Fraction(0)] * n
    fact = math.factorial(n)
    for simplex in P._simplices():
        d = abs(det([[x - y for x, y in zip(v, c)] for v in simplex])) / fact
        if d == 0:
            continue
        vol += d
        for i in range(n):
            moment[i] += d * (c[i] + sum(v[i] for v in simplex)) / (n + 1)
    return vol, tuple(m / vol for m in moment)


def universal_bound_rhs(P: LatticePolytope) -> tuple[float, float]:
    """(-(1/2) vol log(vol / (2 pi^2)^n), c_n / (n+1)!) for the same n."""
    n = P.dim
    vol, _ = volume_and_barycenter(P)
    v = float(vol)
    rhs = -0.5 * v * (math.log(v) - n * math.log(2 * math.pi**2))
    return rhs, c_n_constant(n) / math.factorial(n + 1)


def polytope_measure(P: LatticePolytope) -> ToricReport:
    vol, bary = volume_and_barycenter(P)
    degree = math.factorial(P.dim) * vol
    rhs, _ = universal_bound_rhs(P)
    return ToricReport(vol, bary, degree, all(b == 0 for b in bary), rhs, P.name)


# ---------------------------------------------------------------------------
# binomial models


@dataclass(frozen=True)
class Binomial:
    plus: tuple[int, ...]
    minus: tuple[int, ...]

    def __str__(self) -> str:
        def mono(e):
            parts = [f"x{i + 1}" + (f"^{k}" if k > 1 else "") for i, k in enumerate(e) if k]
            return "*".join(parts) or "1"
        return f"{mono(self.plus)} - {mono(self.minus)}"

    def vanishes_on(self, markers: Sequence[Sequence[int]], z: Sequence[Fraction]) -> bool:
        """Exact check at the torus point z: prod (z^m_i)^plus_i == prod (z^m_i)^minus_i."""
        vals = [math.prod((Fraction(zj) ** mj for zj, mj in zip(z, m)), start=Fraction(1))
                for m in markers]
        lhs = math.prod((v**e for v, e in zip(vals, self.plus)), start=Fraction(1))
        rhs = math.prod((v**e for v, e in zip(vals, self.minus)), start=Fraction(1))
        return lhs == rhs


def marker_points(P: LatticePolytope, k: int = 1, mode: str = "vertices",
                  explicit: Sequence[Sequence[int]] | None = None) -> list[tuple[int, ...]]:
    if k < 1:
        raise InputError("k must be a positive integer")
    if mode == "explicit":
        if not explicit:
            raise InputError("explicit marker list required")
        return [tuple(int(c) for c in m) for m in explicit]
    Q = P.scaled(k)
    if mode == "vertices":
        pts = Q.vertices
        if any(c.denominator != 1 for v in pts for c in v):
            raise InputError("vertices of kP are not lattice points; use a multiple k")
        return [tuple(int(c) for c in v) for v in pts]
    if mode == "lattice":
        return Q.lattice_points()
    raise InputError("markers must be vertices, lattice or explicit")


def canonical_model_binomials(P: LatticePolytope | None, k: int = 1, markers: str = "vertices",
                              explicit: Sequence[Sequence[int]] | None = None) -> list[Binomial]:
    """Binomials x^{a+} - x^{a-}, one per basis vector a of the integer kernel of
    the homogenized marker matrix [(m_i, 1)]."""
    ms = marker_points(P, k, markers, explicit) if P is not None else marker_points(
        None, k, "explicit", explicit)
    n = len(ms[0])
    A = [[m[i] for m in ms] for i in range(n)] + [[1] * len(ms)]
    out = []
    for a in integer_kernel(A):
        if next(x for x in a if x) < 0:
            a = tuple(-x for x in a)
        out.append(Binomial(tuple(max(x, 0) for x in a), tuple(max(-x, 0) for x in a)))
    return out


# ---------------------------------------------------------------------------
# catalogs


def load_catalog(source) -> list[LatticePolytope]:
    """A catalog is a JSON array of {"name", "vertices"}; ``source`` is a path,
    a parsed list, or an int n for the bundled catalog of dimension n."""
    if isinstance(source, int):
        text = resources.files("heightlab.data").joinpath(f"toric_catalog_n{source}.json").read_text()
        data = json.loads(text)
    elif isinstance(source, (list, tuple)):
        data = source
    else:
        with open(source) as fh:
            data = json.load(fh)
    return [LatticePolytope.from_dict(d) for d in data]


def gap_table(catalog: Sequence[LatticePolytope], n: int) -> dict:
    """Degrees in descending order with kps flags.

    ``contract_ok``: the first entry has the degree (n+1)^n of P^n and the
    largest kps degree below it is 2 n^n, the degree of P^{n-1} x P^1.
    """
    rows = []
    for P in catalog:
        if P.dim != n:
            continue
        rep = polytope_measure(P)
        rows.append({"name": P.name, "degree": rep.degree, "kps": rep.kps})
    rows.sort(key=lambda r: (-r["degree"], r["name"]))
    top = Fraction((n + 1) ** n)
    ok = bool(rows) and rows[0]["degree"] == top
    if n >= 2:
        target = Fraction(2 * n**n)
        below = [r for r in rows[1:] if r["kps"]]
        ok = ok and bool(below) and below[0]["degree"] == target
    return {"n": n, "rows": rows, "contract_ok": ok}
