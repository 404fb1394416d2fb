from __future__ import annotations

from itertools import permutations, product
from math import factorial

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kontsevich.graphcore import (
    GraphFormatError,
    KontsevichGraph,
    automorphism_count,
    basic_set,
    decode,
    differential_order,
    encode,
    generate,
    has_double_edge,
    has_tadpole,
    in_degrees,
    is_prime,
    iter_graphs,
    mirror_image,
    normal_form,
    prime_factorize,
    sink_product,
)


@st.composite
def graphs(draw, max_n=4, m=2):
    n = draw(st.integers(1, max_n))
    targets = []
    for j in range(n):
        me = m + j
        choices = [t for t in range(m + n) if t != me]
        a = draw(st.sampled_from(choices))
        b = draw(st.sampled_from([t for t in choices if t != a]))
        targets += [a, b]
    sign = draw(st.sampled_from([-1, 1]))
    return KontsevichGraph(m, n, sign, tuple(targets))


def orbit_oracle(g: KontsevichGraph):
    """Brute force over S_n x Z2^n: minimal encoding, sign, zero flag."""
    m, n = g.m, g.n
    seen: dict[tuple[int, ...], set[int]] = {}
    for perm in permutations(range(n)):
        relabel = {m + j: m + perm[j] for j in range(n)}
        for flips in product((0, 1), repeat=n):
            new = [0] * (2 * n)
            sign = g.sign
            for j in range(n):
                a, b = (relabel.get(t, t) for t in g.targets[2 * j : 2 * j + 2])
                if flips[j]:
                    a, b = b, a
                    sign = -sign
                new[2 * perm[j]], new[2 * perm[j] + 1] = a, b
            seen.setdefault(tuple(new), set()).add(sign)
    best = min(seen)
    signs = seen[best]
    return best, (0 if len(signs) == 2 else signs.pop())


def relabel(g: KontsevichGraph, perm, flips) -> KontsevichGraph:
    m, n = g.m, g.n
    new = [0] * (2 * n)
    sign = g.sign
    for j in range(n):
        a, b = (t if t < m else m + perm[t - m] for t in g.targets[2 * j : 2 * j + 2])
        if flips[j]:
            a, b = b, a
            sign = -sign
        new[2 * perm[j]], new[2 * perm[j] + 1] = a, b
    return KontsevichGraph(m, n, sign, tuple(new))


def test_encode_decode():
    g = decode("2 3 1   0 1 0 1 2 3")
    assert (g.m, g.n, g.sign, g.targets) == (2, 3, 1, (0, 1, 0, 1, 2, 3))
    assert encode(g) == "2 3 1 0 1 0 1 2 3"
    assert decode(encode(g)) == g


@pytest.mark.parametrize("line", ["", "2 1", "2 1 1 0", "2 1 1 0 x", "2 1 2 0 1", "2 1 1 0 3", "0 0 1"])
def test_decode_rejects(line):
    with pytest.raises(GraphFormatError):
        decode(line)


@pytest.mark.parametrize("n, count", [(0, 1), (1, 2), (2, 36), (3, 1728)])
def test_enumeration_count(n, count):
    assert len(generate(n)) == count == (n * (n + 1)) ** n
    assert len(list(iter_graphs(n))) == count


def test_generate_one_vertex_lists_the_wedge():
    assert [encode(g) for g in generate(1)] == ["2 1 1 0 1", "2 1 1 1 0"]


def test_encodings_of_one_operator_share_a_normal_form():
    encodings = ["0 1 0 2", "0 1 2 0", "1 0 0 2", "1 0 2 0", "0 3 0 1", "0 3 1 0", "3 0 0 1", "3 0 1 0"]
    signs = [1, -1, -1, 1, 1, -1, -1, 1]
    forms = {encode(normal_form(decode(f"2 2 {s} {e}"))) for s, e in zip(signs, encodings)}
    assert forms == {"2 2 1 0 1 0 2"}


def test_zero_graph_has_sign_zero():
    assert normal_form(decode("2 3 1 0 1 0 1 2 3")).sign == 0


@pytest.mark.parametrize("k, size, nonzero", [(1, 1, 1), (2, 2, 2), (3, 15, 14)])
def test_basic_set_sizes(k, size, nonzero):
    bs = basic_set(k)
    assert len(bs) == size
    assert sum(1 for g in bs if g.sign) == nonzero


def test_basic_set_order_four():
    bs = basic_set(4)
    assert len(bs) == 156
    assert sum(1 for g in bs if g.sign) == 149


def test_basic_set_properties():
    for g in basic_set(3):
        assert is_prime(g)
        assert min(differential_order(g)) > 0
        assert normal_form(g.abs()).targets == g.targets


@settings(max_examples=150, deadline=None)
@given(graphs(max_n=3))
def test_normal_form_matches_orbit_oracle(g):
    best, sign = orbit_oracle(g)
    nf = normal_form(g)
    assert nf.targets == best
    assert nf.sign == sign


@settings(max_examples=100, deadline=None)
@given(graphs(), st.data())
def test_normal_form_invariant_under_relabeling(g, data):
    perm = data.draw(st.permutations(range(g.n)))
    flips = data.draw(st.lists(st.integers(0, 1), min_size=g.n, max_size=g.n))
    assert normal_form(relabel(g, perm, flips)) == normal_form(g)


@settings(max_examples=100, deadline=None)
@given(graphs(), st.data())
def test_single_swap_negates(g, data):
    j = data.draw(st.integers(0, g.n - 1))
    flips = [int(i == j) for i in range(g.n)]
    h = relabel(g, list(range(g.n)), flips).with_sign(g.sign)
    assert normal_form(h).sign == -normal_form(g).sign


@given(graphs())
def test_normal_form_idempotent(g):
    nf = normal_form(g)
    assert normal_form(nf) == nf


@given(graphs())
def test_automorphisms_divide_group_order(g):
    aut = automorphism_count(g)
    assert aut >= 1
    assert (factorial(g.n)) % aut == 0


@given(graphs())
def test_mirror_is_involution(g):
    assert mirror_image(mirror_image(g)) == g
    assert differential_order(mirror_image(g)) == differential_order(g)[::-1]


@given(graphs(max_n=2), graphs(max_n=2))
def test_factorize_sink_product(a, b):
    prod = sink_product(a, b)
    assert prod.n == a.n + b.n
    factors = prime_factorize(prod)
    assert len(factors) == len(prime_factorize(a)) + len(prime_factorize(b))
    assert not is_prime(prod)


@given(graphs())
def test_factors_rebuild_graph(g):
    factors = prime_factorize(g)
    assert all(is_prime(f) for f in factors)
    out = factors[0]
    for f in factors[1:]:
        out = sink_product(out, f)
    assert normal_form(out) == normal_form(g)


def test_in_degrees_and_flags():
    g = decode("2 2 1 0 3 1 2")
    assert in_degrees(g) == [1, 1, 1, 1]
    assert differential_order(g) == (1, 1)
    assert not has_tadpole(g) and not has_double_edge(g)
    assert has_tadpole(decode("2 1 1 0 2"))
    assert has_double_edge(decode("2 1 1 0 0"))


def test_generate_filters():
    assert all(min(differential_order(g)) > 0 for g in generate(2, positive_differential_order=True))
    assert all(is_prime(g) for g in generate(2, prime_only=True))
    capped = generate(3, max_internal_indegree=1)
    assert all(max(in_degrees(g)[2:]) <= 1 for g in capped)
    assert len(generate(2, tadpoles=True, multiple_edges=True)) == 16**2
