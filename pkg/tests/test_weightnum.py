from __future__ import annotations

import cmath
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kontsevich.graphcore import KontsevichGraph, basic_set, decode
from kontsevich.weightnum import (
    format_integrand,
    integrand_determinant,
    is_integrand_zero,
    monte_carlo_weight,
    weight_integrand,
)
from test_graphcore import graphs

WEDGE = decode("2 1 1 0 1")
BERNOULLI = decode("2 3 1 3 0 0 4 0 1")

rational_x = st.fractions(min_value=-5, max_value=5, max_denominator=9)
rational_y = st.fractions(min_value=Fraction(1, 9), max_value=5, max_denominator=9)


def configurations(k):
    return st.lists(st.tuples(rational_x, rational_y), min_size=k, max_size=k, unique=True)


def angle(p: complex, q: complex) -> float:
    """Harmonic angle at ``p`` towards ``q`` in the upper half plane."""
    return cmath.phase((q - p) / (q - p.conjugate()))


def finite_difference_matrix(g: KontsevichGraph, pts: list[complex], h: float = 1e-6) -> np.ndarray:
    sinks = [0j, 1 + 0j]
    k = g.n
    out = np.zeros((2 * k, 2 * k))
    for j in range(k):
        for s in range(2):
            t = g.targets[2 * j + s]
            for c in range(2 * k):
                step = h if c % 2 == 0 else h * 1j

                def phi(sign, c=c, step=step, j=j, t=t):
                    moved = list(pts)
                    moved[c // 2] += sign * step
                    q = sinks[t] if t < 2 else moved[t - 2]
                    return angle(moved[j], q)

                d = phi(1) - phi(-1)
                d = (d + np.pi) % (2 * np.pi) - np.pi
                out[2 * j + s, c] = d / (2 * h)
    return out


@settings(max_examples=40, deadline=None)
@given(rational_x, rational_y)
def test_wedge_closed_form(x, y):
    assert integrand_determinant(WEDGE, [(x, y)]) == 4 * y / ((x**2 + y**2) * ((x - 1) ** 2 + y**2))


@settings(max_examples=30, deadline=None)
@given(graphs(max_n=3), st.data())
def test_exact_matrix_matches_finite_differences(g, data):
    pts = data.draw(configurations(g.n))
    exact = np.array(weight_integrand(g).at(pts), dtype=float)
    numeric = finite_difference_matrix(g, [complex(float(x), float(y)) for x, y in pts])
    assert np.allclose(exact, numeric, rtol=1e-4, atol=1e-5)


@settings(max_examples=30, deadline=None)
@given(graphs(max_n=3), st.data())
def test_float_matrix_matches_exact(g, data):
    pts = data.draw(configurations(g.n))
    exact = np.array(weight_integrand(g).at(pts), dtype=float)
    xs = np.array([[float(x) for x, _ in pts]])
    ys = np.array([[float(y) for _, y in pts]])
    assert np.allclose(weight_integrand(g).at_float(xs, ys)[0], exact)


@settings(max_examples=30, deadline=None)
@given(graphs(max_n=3), st.data())
def test_swapping_a_vertex_negates(g, data):
    pts = data.draw(configurations(g.n))
    j = data.draw(st.integers(0, g.n - 1))
    t = list(g.targets)
    t[2 * j], t[2 * j + 1] = t[2 * j + 1], t[2 * j]
    swapped = KontsevichGraph(2, g.n, g.sign, tuple(t))
    assert integrand_determinant(swapped, pts) == -integrand_determinant(g, pts)


@settings(max_examples=30, deadline=None)
@given(graphs(max_n=3), st.data())
def test_relabeling_vertices_with_points_keeps_determinant(g, data):
    pts = data.draw(configurations(g.n))
    perm = data.draw(st.permutations(range(g.n)))
    relabel = {2 + j: 2 + perm[j] for j in range(g.n)}
    targets = [0] * (2 * g.n)
    moved = [None] * g.n
    for j in range(g.n):
        targets[2 * perm[j]] = relabel.get(g.targets[2 * j], g.targets[2 * j])
        targets[2 * perm[j] + 1] = relabel.get(g.targets[2 * j + 1], g.targets[2 * j + 1])
        moved[perm[j]] = pts[j]
    h = KontsevichGraph(2, g.n, g.sign, tuple(targets))
    assert integrand_determinant(h, moved) == integrand_determinant(g, pts)


def test_bernoulli_graph_against_displayed_rational_function():
    rng = random.Random(7)
    for _ in range(5):
        a, c, e = (Fraction(rng.randint(-20, 20), rng.randint(1, 9)) for _ in range(3))
        b, d, f = (Fraction(rng.randint(1, 20), rng.randint(1, 9)) for _ in range(3))
        num = 64 * b * f * d * (c * ((a - c) ** 2 + b**2) + d**2 * (c - 2 * a)) * (f**2 * (e - 2 * c) + e * ((e - c) ** 2 + d**2))
        den = (
            (a**2 + b**2)
            * (f**2 + (e - 1) ** 2)
            * (f**2 + e**2)
            * (c**2 + d**2)
            * ((a - c) ** 2 + (b - d) ** 2)
            * ((a - c) ** 2 + (b + d) ** 2)
            * ((f + d) ** 2 + (e - c) ** 2)
        )
        det = integrand_determinant(BERNOULLI, [(a, b), (c, d), (e, f)])
        # this closed form lacks the factor 1/|p_3 - p_2|^2 and has the opposite sign
        assert det * -((e - c) ** 2 + (f - d) ** 2) == num / den


def test_zero_integrands():
    assert not is_integrand_zero(WEDGE)
    assert not is_integrand_zero(decode("2 2 1 0 1 0 1"))
    # the only order-three basic graph whose integrand vanishes identically
    assert [str(g) for g in basic_set(3) if g.sign and is_integrand_zero(g)] == ["2 3 1 0 3 0 2 1 2"]
    with pytest.raises(ValueError):
        is_integrand_zero(WEDGE, trials=0)


def test_integrand_needs_two_sinks():
    with pytest.raises(ValueError):
        weight_integrand(decode("3 1 1 0 1"))


@pytest.mark.parametrize("enc, exact, samples", [("2 1 1 0 1", Fraction(1, 2), 200_000), ("2 2 1 0 1 0 2", Fraction(1, 12), 200_000)])
def test_monte_carlo_brackets_known_weights(enc, exact, samples):
    est, se = monte_carlo_weight(decode(enc), samples=samples, seed=3)
    assert se > 0
    assert abs(est - float(exact)) < 4 * se


def test_monte_carlo_is_reproducible():
    assert monte_carlo_weight(WEDGE, samples=1000, seed=5) == monte_carlo_weight(WEDGE, samples=1000, seed=5)


def test_format_integrand_layout():
    text = format_integrand(WEDGE, "1/2")
    head, body = text.splitlines()
    assert head == "(* 2 1 1 0 1    1/2 *)"
    assert body.startswith("Det[{{") and body.endswith("}}]")
    assert body.count("}, {") == 1
    three = format_integrand(BERNOULLI).splitlines()[1]
    assert three.count("}, {") == 5 and "x3" in three and "x4" not in three


def test_zero_integrand_count_at_order_four():
    nonzero = [g for g in basic_set(4) if g.sign]
    assert len(nonzero) == 149
    assert sum(is_integrand_zero(g) for g in nonzero) == 21
