"""Weight integrands in Cartesian coordinates and their numerical treatment.

Internal vertex ``j`` sits at ``p_j = x_j + i y_j``; sink 0 at 0 and sink 1
at 1.  The angle ``phi(p, q)`` equals ``arctan(N/D)`` up to a constant with
``N = 2b(a-x)`` and ``D = (a-x)^2 + y^2 - b^2`` for ``p = a+ib``, ``q = x+iy``,
so every partial derivative is ``(D dN - N dD) / (N^2 + D^2)``.
The integrand is the Jacobian determinant of all 2k angles over
``(x_1, y_1, ..., x_k, y_k)`` divided by ``(2 pi)^(2k)``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .graphcore import KontsevichGraph, encode

__all__ = [
    "IntegrandMatrix",
    "weight_integrand",
    "integrand_determinant",
    "is_integrand_zero",
    "monte_carlo_weight",
    "format_integrand",
]

_SINKS = ((0, 0), (1, 0))


def _angle_partials(a, b, x, y):
    """Partials of ``phi(p, q)`` w.r.t. ``(a, b, x, y)``; works on Fractions or arrays."""
    u = a - x
    N = 2 * b * u
    D = u * u + y * y - b * b
    den = N * N + D * D
    # (dN, dD) for a, b, x, y
    da = (D * (2 * b) - N * (2 * u)) / den
    db = (D * (2 * u) - N * (-2 * b)) / den
    dx = (D * (-2 * b) - N * (-2 * u)) / den
    dy = (-N * (2 * y)) / den
    return da, db, dx, dy


@dataclass(frozen=True)
class IntegrandMatrix:
    """Row ``2j + s`` is the angle of edge ``s`` (Left 0, Right 1) of vertex ``j``."""

    graph: KontsevichGraph

    @property
    def k(self) -> int:
        return self.graph.n

    def at(self, points: Sequence[tuple[Fraction, Fraction]]) -> list[list[Fraction]]:
        """Exact matrix at rational points ``[(x_1, y_1), ...]``."""
        g = self.graph
        k = g.n
        mat = [[Fraction(0)] * (2 * k) for _ in range(2 * k)]
        for j in range(k):
            a, b = points[j]
            for s in range(2):
                t = g.targets[2 * j + s]
                row = mat[2 * j + s]
                if t < 2:
                    x, y = _SINKS[t]
                    da, db, _, _ = _angle_partials(a, b, Fraction(x), Fraction(y))
                    row[2 * j] += da
                    row[2 * j + 1] += db
                else:
                    i = t - 2
                    x, y = points[i]
                    da, db, dx, dy = _angle_partials(a, b, x, y)
                    row[2 * j] += da
                    row[2 * j + 1] += db
                    row[2 * i] += dx
                    row[2 * i + 1] += dy
        return mat

    def at_float(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Batched float matrices; ``xs, ys`` have shape ``(samples, k)``."""
        g = self.graph
        k = g.n
        out = np.zeros((xs.shape[0], 2 * k, 2 * k))
        for j in range(k):
            a, b = xs[:, j], ys[:, j]
            for s in range(2):
                t = g.targets[2 * j + s]
                r = 2 * j + s
                if t < 2:
                    x, y = _SINKS[t]
                    da, db, _, _ = _angle_partials(a, b, float(x), float(y))
                    out[:, r, 2 * j] += da
                    out[:, r, 2 * j + 1] += db
                else:
                    i = t - 2
                    da, db, dx, dy = _angle_partials(a, b, xs[:, i], ys[:, i])
                    out[:, r, 2 * j] += da
                    out[:, r, 2 * j + 1] += db
                    out[:, r, 2 * i] += dx
                    out[:, r, 2 * i + 1] += dy
        return out


def weight_integrand(g: KontsevichGraph) -> IntegrandMatrix:
    if g.m != 2 or g.n < 1:
        raise ValueError("weight integrands need two sinks and at least one internal vertex")
    return IntegrandMatrix(g)


def _det(mat: list[list[Fraction]]) -> Fraction:
    a = [row[:] for row in mat]
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if a[r][c]), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            det = -det
        piv = a[c][c]
        det *= piv
        for r in range(c + 1, n):
            f = a[r][c]
            if f:
                f /= piv
                rr, rc = a[r], a[c]
                for cc in range(c, n):
                    rr[cc] -= f * rc[cc]
    return det


def integrand_determinant(g: KontsevichGraph, points: Sequence[tuple[Fraction, Fraction]]) -> Fraction:
    """Exact Jacobian determinant (without the ``(2 pi)^(-2k)`` factor)."""
    return _det(weight_integrand(g).at(points))


def _random_point(rng: random.Random) -> tuple[Fraction, Fraction]:
    x = Fraction(rng.randint(-60, 60), rng.randint(1, 30))
    y = Fraction(rng.randint(1, 60), rng.randint(1, 30))
    return x, y


def _random_configuration(rng: random.Random, k: int) -> list[tuple[Fraction, Fraction]]:
    while True:
        pts = [_random_point(rng) for _ in range(k)]
        if len(set(pts)) == k:
            return pts


def is_integrand_zero(g: KontsevichGraph, trials: int = 20, seed: int = 0) -> bool:
    """True when the determinant vanishes at ``trials`` random rational configurations.

    A ``False`` answer is certain; ``True`` is correct with high probability.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    rng = random.Random(seed)
    for _ in range(trials):
        if integrand_determinant(g, _random_configuration(rng, g.n)):
            return False
    return True


def monte_carlo_weight(
    g: KontsevichGraph,
    samples: int = 100_000,
    seed: int = 0,
    scale: float = 1.0,
    sigma: float = 1.5,
) -> tuple[float, float]:
    """Importance-sampled weight estimate and its standard error.

    Each point is drawn independently with ``x`` Cauchy(1/2, scale) and
    ``y = exp(Z)``, ``Z ~ N(0, sigma^2)``; the estimator averages
    ``det / q`` over the samples, divided by ``(2 pi)^(2k)``.
    """
    k = g.n
    rng = np.random.default_rng(seed)
    xs = 0.5 + scale * rng.standard_cauchy((samples, k))
    z = rng.normal(0.0, sigma, (samples, k))
    ys = np.exp(z)
    # log density of the proposal per point
    log_qx = -np.log(np.pi * scale) - np.log1p(((xs - 0.5) / scale) ** 2)
    log_qy = -0.5 * (z / sigma) ** 2 - np.log(sigma * np.sqrt(2 * np.pi)) - z
    log_q = (log_qx + log_qy).sum(axis=1)
    mats = weight_integrand(g).at_float(xs, ys)
    dets = np.linalg.det(mats)
    vals = dets * np.exp(-log_q) / (2 * np.pi) ** (2 * k)
    est = float(vals.mean())
    se = float(vals.std(ddof=1) / np.sqrt(samples))
    return est, se


def _entry_terms(j: int, t: int, k: int) -> dict[int, str]:
    a, b = f"x{j + 1}", f"y{j + 1}"
    if t < 2:
        x, y = str(_SINKS[t][0]), "0"
    else:
        x, y = f"x{t - 1}", f"y{t - 1}"
    u = f"({a}-{x})"
    N = f"(2*{b}*{u})"
    D = f"({u}^2+{y}^2-{b}^2)"
    den = f"({N}^2+{D}^2)"
    out = {
        2 * j: f"({D}*(2*{b})-{N}*(2*{u}))/{den}",
        2 * j + 1: f"({D}*(2*{u})+{N}*(2*{b}))/{den}",
    }
    if t >= 2:
        i = t - 2
        out[2 * i] = f"({D}*(-2*{b})+{N}*(2*{u}))/{den}"
        out[2 * i + 1] = f"(-{N}*(2*{y}))/{den}"
    return out


def format_integrand(g: KontsevichGraph, coefficient: str = "1") -> str:
    """``(* encoding coefficient *)`` followed by ``Det[{{...}}]`` over ``x1, y1, ...``."""
    k = g.n
    rows = []
    for j in range(k):
        for s in range(2):
            t = g.targets[2 * j + s]
            ent = _entry_terms(j, t, k)
            rows.append("{" + ", ".join(ent.get(c, "0") for c in range(2 * k)) + "}")
    return f"(* {encode(g)}    {coefficient} *)\nDet[{{{', '.join(rows)}}}]\n"
