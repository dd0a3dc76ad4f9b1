"""Heights of points of P^m(Q) and P^m(Q(i)) under L^p metrics."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .core import GaussianPoint, MetricSpec, RationalPoint, lp_norm, normalize_point


@dataclass(frozen=True)
class PointHeight:
    """Logarithmic height h (natural log) and exponential height H = e^h."""

    h: float
    H: float
    metric: MetricSpec

    def to_dict(self) -> dict:
        return {"h": self.h, "H": self.H, "metric": self.metric.name, "shift": self.metric.shift}


def _make(h: float, metric: MetricSpec) -> PointHeight:
    return PointHeight(h, math.exp(h), metric)


def point_height(x: RationalPoint, metric: MetricSpec) -> PointHeight:
    """h = log ||x||_p + shift/2 on the primitive representative."""
    if metric.twist is not None:
        raise NotImplementedError("twisted metrics only apply on P^1 via p1lab")
    if math.isinf(metric.p) and metric.shift == 0:
        # exact integer path, so H is the max coordinate on the nose
        H = max(abs(c) for c in x.coords)
        return PointHeight(math.log(H), float(H), metric)
    return _make(math.log(lp_norm(x.coords, metric.p)) + metric.shift / 2, metric)


def gaussian_height(x: GaussianPoint, metric: MetricSpec) -> PointHeight:
    """Absolute height over Q(i): the average over the two embeddings.

    Conjugate embeddings give the same coordinate moduli, so the average of
    the two log norms is just log of the norm of |x_i|.
    """
    if metric.twist is not None:
        raise NotImplementedError("twisted metrics only apply on P^1 via p1lab")
    moduli = [abs(c) for c in x.coords]
    if math.isinf(metric.p) and metric.shift == 0:
        # compare squared norms exactly before taking the root
        best = max(c.norm() for c in x.coords)
        H = math.sqrt(best)
        return PointHeight(0.5 * math.log(best), H, metric)
    return _make(math.log(lp_norm(moduli, metric.p)) + metric.shift / 2, metric)


def height_of(x, metric: MetricSpec) -> PointHeight:
    if isinstance(x, GaussianPoint):
        return gaussian_height(x, metric)
    if not isinstance(x, RationalPoint):
        x = normalize_point(x)
    return point_height(x, metric)


def height_shift_check(x, metric: MetricSpec, lam: float) -> tuple[float, float]:
    """(h_{phi+lam}(x), h_phi(x) + lam/2); these agree."""
    shifted = height_of(x, metric.with_shift(metric.shift + lam)).h
    base = height_of(x, metric).h
    return shifted, base + lam / 2
