from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from test_graphcore import graphs

from helpers import load_series
from kontsevich.coeffs import CoeffExpr, parse_coeff
from kontsevich.graphcore import KontsevichGraph, decode, normal_form
from kontsevich.graphseries import (
    GraphSeries,
    GraphSum,
    SeriesFormatError,
    compose,
    extract_coefficient,
    identity_series,
    insert,
    read_series,
    reduce_mod_skew,
    skew_symmetrize,
    substitute_relations,
    write_series,
    write_sum,
)

DOT = decode("1 0 1")
TWO_DOTS = decode("2 0 1")
WEDGE = decode("2 1 1 0 1")


def gsum(m, *pairs):
    return GraphSum.from_terms(m, [(parse_coeff(c), decode(e)) for e, c in pairs])


coeffs = st.builds(
    CoeffExpr,
    st.fractions(min_value=-9, max_value=9, max_denominator=12),
    st.dictionaries(st.sampled_from(["a", "w_3_1", "w_4_12"]), st.integers(-5, 5), max_size=2),
)


@st.composite
def series(draw):
    prec = draw(st.integers(1, 3))
    powers = {}
    for k in range(prec + 1):
        terms = draw(st.lists(st.tuples(coeffs, graphs(max_n=3)), max_size=4))
        powers[k] = GraphSum(2, tuple(terms))
    return GraphSeries(2, prec, powers)


def test_read_write_small_series():
    s = load_series("star_product2.txt")
    assert s.m == 2 and s.precision == 2
    assert write_series(s).splitlines()[:3] == ["h^0:", "2 0 1 1", "h^1:"]
    assert len(s[2]) == 4


def test_precision_follows_highest_header():
    s = read_series("h^0:\n2 0 1 1\nh^5:\n")
    assert s.precision == 5
    assert not s[5].terms


def test_headerless_terms_are_order_zero():
    s = load_series("jacobiator.txt")
    assert s.precision == 0 and len(s[0]) == 3


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("h^0:\n2 0 1\n", "missing coefficient"),
        ("h^0:\n2 1 1 0\n", "token count"),
        ("h^x:\n", "line 1"),
        ("h^0:\n2 0 1 1\n1 0 1 1\n", "line 3"),
        ("h^0:\n2 1 1 0 1 0.5\n", "line 2"),
    ],
)
def test_read_errors_have_context(text, fragment):
    with pytest.raises(ValueError, match=fragment):
        read_series(text)


def test_series_format_error_is_value_error():
    assert issubclass(SeriesFormatError, ValueError)


@settings(max_examples=60, deadline=None)
@given(series())
def test_write_read_write_is_stable(s):
    once = write_series(s)
    assert write_series(read_series(once)) == once


@settings(max_examples=60, deadline=None)
@given(series())
def test_reduction_is_idempotent_and_preserves_value(s):
    r = s.reduced()
    assert r == s
    assert write_series(r.reduced()) == write_series(r)


def test_double_edge_is_zero():
    assert normal_form(decode("2 1 1 0 0")).sign == 0


def test_zero_graph_is_killed():
    s = read_series("h^3:\n2 3 1  0 1 0 1 2 3    1\n")
    assert write_series(s.reduced()) == "h^0:\nh^1:\nh^2:\nh^3:\n"


def test_reduction_merges_relabelings_with_signs():
    s = gsum(2, ("2 2 1 0 1 0 2", "1"), ("2 2 -1 0 1 2 0", "1/2"), ("2 2 1 1 0 0 2", "1/2"))
    # 1 + (1/2)(-1)(-1) + (1/2)(-1)
    assert write_sum(reduce_mod_skew(s)) == "2 2 1 0 1 0 2 1\n"


def test_reduction_combines_coefficients():
    s = gsum(2, ("2 2 1 0 1 0 2", "w"), ("2 2 1 0 3 0 1", "1/3"))
    assert reduce_mod_skew(s).as_dict() == {decode("2 2 1 0 1 0 2"): parse_coeff("w+1/3")}


def test_skew_symmetrize_wedge():
    out = skew_symmetrize(gsum(2, ("2 1 1 0 1", "1")))
    assert out.as_dict() == {WEDGE: CoeffExpr(2)}
    sym = skew_symmetrize(gsum(2, ("2 2 1 0 1 0 1", "1")))
    assert not sym.terms


@settings(max_examples=40, deadline=None)
@given(graphs(max_n=3))
def test_skew_symmetrize_is_antisymmetric(g):
    s = GraphSum(2, ((CoeffExpr(1), g),))
    mirrored = GraphSum(2, ((CoeffExpr(-1), KontsevichGraph(2, g.n, g.sign, tuple({0: 1, 1: 0}.get(t, t) for t in g.targets))),))
    assert skew_symmetrize(s).as_dict() == skew_symmetrize(mirrored).as_dict()


def test_wedge_on_dot_and_two_dots():
    out = compose(gsum(2, ("2 1 1 0 1", "1")), [gsum(1, ("1 0 1", "1")), gsum(2, ("2 0 1", "1"))])
    assert out.as_dict() == {decode("3 1 1 0 1"): CoeffExpr(1), decode("3 1 1 0 2"): CoeffExpr(1)}


def test_wedge_on_dot_and_wedge():
    out = compose(gsum(2, ("2 1 1 0 1", "1")), [gsum(1, ("1 0 1", "1")), gsum(2, ("2 1 1 0 1", "1"))])
    # inner wedge is vertex 3 over sinks 1, 2; the outer arrow lands on 1, 2 or 3
    expected = {normal_form(decode(f"3 2 1 1 2 0 {t}")) for t in (1, 2, 3)}
    assert set(out.as_dict()) == {g.abs() for g in expected}
    assert len(out.terms) == 3


def test_two_arrows_on_a_pair_of_dots():
    outer = gsum(2, ("2 2 1 0 1 0 2", "1"))
    out = compose(outer, [gsum(2, ("2 0 1", "1")), gsum(1, ("1 0 1", "1"))])
    expected = reduce_mod_skew(
        gsum(3, *[(f"3 2 1 {a} 2 {b} 3", "1") for a in (0, 1) for b in (0, 1)])
    )
    assert out.as_dict() == expected.as_dict()
    assert len(out.terms) == 4


def test_identity_insertion():
    s = load_series("star_product2.txt")
    ident = identity_series(2)
    assert insert(s, [ident, ident]) == s.reduced()


def test_insert_adds_powers():
    s = load_series("star_product2.txt")
    t = read_series("h^0:\n1 0 1 1\nh^1:\n1 1 1 0 0 1\nh^2:\n")
    out = insert(s, [t, identity_series(2)])
    assert out.precision == 2
    assert out[0].as_dict() == s[0].as_dict()
    # the double-edge term of the gauge part vanishes
    assert out[1].as_dict() == {WEDGE: CoeffExpr(1)}
    assert out[2].as_dict()[decode("2 2 1 0 1 0 2")] == CoeffExpr(Fraction(1, 3))


def test_substitute_and_extract():
    s = load_series("star_product2_w.txt")
    b = {"w_2_1": CoeffExpr(Fraction(1, 3)), "w_2_2": CoeffExpr(Fraction(-1, 3)), "w_2_3": CoeffExpr(Fraction(-1, 6))}
    assert substitute_relations(s, b) == load_series("star_product2.txt")
    part = extract_coefficient(s, "w_2_1").reduced()
    assert write_series(part) == "h^0:\nh^1:\nh^2:\n2 2 1 0 1 0 2 1\n"
    const = extract_coefficient(s, "1").reduced()
    assert const[2].as_dict() == {decode("2 2 1 0 1 0 1"): CoeffExpr(Fraction(1, 2))}


def test_differential_order_headers():
    s = load_series("star_product2.txt")
    text = write_series(s, print_differential_orders=True)
    assert "# 1 1" in text and "# 2 2" in text


def test_mixed_sink_counts_rejected():
    with pytest.raises(ValueError):
        GraphSum(2, ((CoeffExpr(1), DOT),))
