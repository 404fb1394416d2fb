"""Star product assembly, associator, cyclic weight relations and gauge maps."""

from __future__ import annotations

from fractions import Fraction
from math import factorial
from typing import Iterable

from .coeffs import ONE, ZERO, CoeffExpr
from .graphcore import (
    KontsevichGraph,
    basic_set,
    canonical,
    generate,
    has_double_edge,
    has_tadpole,
    in_degrees,
    is_prime,
    iter_graphs,
    prime_factorize,
)
from .graphseries import (
    GraphSeries,
    GraphSum,
    compose,
    identity_series,
    insert,
    reduce_mod_skew,
)

__all__ = [
    "BasicWeightTable",
    "MissingWeightError",
    "weight_of",
    "build_star_product",
    "build_star_product_by_enumeration",
    "weight_from_star",
    "associator",
    "cyclic_weight_relations",
    "gauge_inverse",
    "gauge_transform",
    "BULLET",
    "symbolic_basic_weights",
]

BULLET = KontsevichGraph(1, 0, 1, ())


class MissingWeightError(KeyError):
    """A prime factor's basic representative is absent from the weight table."""


def _mirror_targets(targets: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(1 - t if t < 2 else t for t in targets)


class BasicWeightTable:
    """Weights of basic graphs, keyed by normal form, one map per order.

    Entries may be given on any labeling of a graph; they are converted to
    the normal form with the sign rule ``w(t|G|) = t w(|G|)``.
    """

    def __init__(self) -> None:
        self._orders: dict[int, dict[tuple[int, ...], CoeffExpr]] = {}

    @classmethod
    def from_series(cls, s: GraphSeries) -> "BasicWeightTable":
        if s.m != 2:
            raise ValueError("basic weights live on two sinks")
        table = cls()
        for k, part in s.items():
            table._orders.setdefault(k, {})
            for c, g in part.terms:
                table.set(g, c)
        return table

    @classmethod
    def from_mapping(cls, entries: Iterable[tuple[KontsevichGraph, CoeffExpr | int | Fraction]]) -> "BasicWeightTable":
        table = cls()
        for g, c in entries:
            table.set(g, CoeffExpr.coerce(c))
        return table

    def set(self, g: KontsevichGraph, w: CoeffExpr) -> None:
        if g.n == 0:
            self._orders.setdefault(0, {})
            return
        t, nf, _ = canonical(2, g.n, g.targets)
        t *= g.sign
        self._orders.setdefault(g.n, {})[nf] = w * t if t else ZERO

    @property
    def max_order(self) -> int:
        return max(self._orders, default=0)

    def orders(self) -> list[int]:
        return sorted(self._orders)

    def lookup(self, n: int, nf: tuple[int, ...]) -> CoeffExpr | None:
        return self._orders.get(n, {}).get(nf)

    def entries(self, k: int) -> dict[tuple[int, ...], CoeffExpr]:
        return dict(self._orders.get(k, {}))


def symbolic_basic_weights(k: int, prefix: str = "w") -> GraphSeries:
    """Basic set of order ``k`` with indeterminate weights ``w_k_1, w_k_2, ...``.

    Nonzero basic graphs are numbered in lexicographic order of their
    normal forms; zero graphs get coefficient 0.
    """
    terms = []
    i = 0
    for g in basic_set(k):
        if g.sign == 0:
            terms.append((ZERO, g))
        else:
            i += 1
            terms.append((CoeffExpr.var(f"{prefix}_{k}_{i}"), g))
    return GraphSeries(2, k, {k: GraphSum(2, tuple(terms))})


def _prime_weight(n: int, targets: tuple[int, ...], table: BasicWeightTable, strict: bool) -> CoeffExpr:
    deg = [0, 0]
    for t in targets:
        if t < 2:
            deg[t] += 1
    if not deg[0] or not deg[1]:
        return ZERO
    t, nf, _ = canonical(2, n, targets)
    if t == 0:
        return ZERO
    w = table.lookup(n, nf)
    if w is not None:
        return w * t
    t2, mnf, _ = canonical(2, n, _mirror_targets(nf))
    w = table.lookup(n, mnf)
    if w is not None:
        return w * (t * t2 * (-1) ** n)
    if strict:
        raise MissingWeightError(f"no weight for basic graph 2 {n} 1 {' '.join(map(str, nf))}")
    return ZERO


def weight_of(g: KontsevichGraph, table: BasicWeightTable, strict: bool = True) -> CoeffExpr:
    """Kontsevich weight of a labeled signed graph on two sinks.

    Zero for sign 0, double edges, tadpoles or an empty sink; otherwise the
    product of the weights of the prime factors, each resolved through the
    table by normal form, L/R swaps and mirror reflection.
    """
    if g.m != 2:
        raise ValueError("weights are defined for two sinks")
    if g.sign == 0:
        return ZERO
    if g.n == 0:
        return CoeffExpr(g.sign)
    if has_double_edge(g) or has_tadpole(g):
        return ZERO
    deg = in_degrees(g)
    if deg[0] == 0 or deg[1] == 0:
        return ZERO
    w = CoeffExpr(g.sign)
    for f in prime_factorize(g.abs()):
        wf = _prime_weight(f.n, f.targets, table, strict)
        if wf.is_zero():
            return ZERO
        w = w * wf
    return w


def build_star_product(table: BasicWeightTable, k_max: int, strict: bool = False) -> GraphSeries:
    """Star product up to ``h^k_max``.

    The coefficient of a normal form with ``k`` internal vertices is
    ``2^k k! / |Aut| * w / k!``: the orbit of labeled graphs under vertex
    relabeling and L/R swaps, each carrying the same signed contribution.
    Basic graphs absent from the table get weight 0 unless ``strict``.
    """
    if k_max > table.max_order:
        raise ValueError(f"weight table stops at order {table.max_order} < {k_max}")
    powers = {0: GraphSum(2, ((ONE, KontsevichGraph(2, 0, 1, ())),))}
    for k in range(1, k_max + 1):
        terms = []
        for g in generate(k, 2, normal_forms_only=True):
            if g.sign == 0:
                continue
            w = weight_of(g, table, strict)
            if w.is_zero():
                continue
            aut = canonical(2, k, g.targets)[2]
            terms.append((w * Fraction(2**k, aut), g))
        powers[k] = GraphSum(2, tuple(terms))
    return GraphSeries(2, k_max, powers)


def build_star_product_by_enumeration(table: BasicWeightTable, k_max: int, strict: bool = False) -> GraphSeries:
    """Reference assembly: sum over every labeled graph, divided by k!."""
    powers = {0: GraphSum(2, ((ONE, KontsevichGraph(2, 0, 1, ())),))}
    for k in range(1, k_max + 1):
        inv = Fraction(1, factorial(k))
        terms = []
        for g in iter_graphs(k, 2):
            w = weight_of(g, table, strict)
            if not w.is_zero():
                terms.append((w * inv, g))
        powers[k] = reduce_mod_skew(GraphSum(2, tuple(terms)))
    return GraphSeries(2, k_max, powers)


def associator(star: GraphSeries) -> GraphSeries:
    """``(f*g)*h - f*(g*h)`` as a three-sink series."""
    if star.m != 2:
        raise ValueError("associator needs a two-sink star product")
    ident = identity_series(star.precision)
    left = insert(star, [star, ident])
    right = insert(star, [ident, star])
    return (left - right).reduced()


def weight_from_star(star: GraphSeries) -> dict[tuple[int, tuple[int, ...]], CoeffExpr]:
    """Recover ``w(|G|)`` for every normal form in the star by inverting the orbit factor."""
    out: dict[tuple[int, tuple[int, ...]], CoeffExpr] = {}
    for k, part in star.items():
        for c, g in reduce_mod_skew(part).terms:
            aut = canonical(2, g.n, g.targets)[2]
            out[(g.n, g.targets)] = c * Fraction(aut, 2**g.n)
    return out


def _normalized_key(e: CoeffExpr) -> CoeffExpr | None:
    items = list(e.items())
    if items:
        lead = items[0][1]
    elif e.constant:
        lead = e.constant
    else:
        return None
    return e.scale(1 / lead)


def cyclic_weight_relations(star: GraphSeries, orders: Iterable[int] | None = None) -> list[CoeffExpr]:
    """Linear relations ``w(G) - (-1)^n sum_E (-1)^N0(G_E) w(G_E) == 0``.

    The star is used as a table of weights: every weight is read back from
    the coefficient of the relevant normal form.  One relation per prime
    graph of the star; trivial relations and scalar duplicates are dropped.
    """
    if star.m != 2:
        raise ValueError("cyclic relations need a two-sink star product")
    weights = weight_from_star(star)
    wanted = set(orders) if orders is not None else None

    def w_of(n: int, targets: tuple[int, ...]) -> CoeffExpr:
        for j in range(n):
            if targets[2 * j] == targets[2 * j + 1]:
                return ZERO
        t, nf, _ = canonical(2, n, targets)
        if t == 0:
            return ZERO
        w = weights.get((n, nf))
        if w is None:
            return ZERO
        return w if t == 1 else -w

    out: list[CoeffExpr] = []
    seen: set[CoeffExpr] = set()
    for k, part in star.items():
        if k == 0 or (wanted is not None and k not in wanted):
            continue
        for _, g in reduce_mod_skew(part).terms:
            if not is_prime(g):
                continue
            tg = g.targets
            movable = [i for i, t in enumerate(tg) if t != 0]
            rhs = ZERO
            for mask in range(1 << len(movable)):
                flat = list(tg)
                for bit, i in enumerate(movable):
                    if mask >> bit & 1:
                        flat[i] = 0
                ft = tuple(flat)
                w = w_of(k, ft)
                if w.is_zero():
                    continue
                n0 = ft.count(0)
                rhs = rhs + (w if n0 % 2 == 0 else -w)
            rel = w_of(k, tg) - (rhs if k % 2 == 0 else -rhs)
            key = _normalized_key(rel)
            if key is None or key in seen:
                continue
            seen.add(key)
            out.append(rel)
    return out


def _bullet_sum() -> GraphSum:
    return GraphSum(1, ((ONE, BULLET),))


def gauge_inverse(t: GraphSeries) -> GraphSeries:
    """Formal left inverse: ``g_m = -sum_{k<m} g_k(T_{m-k})`` with ``g_0`` the bare vertex."""
    if t.m != 1:
        raise ValueError("gauge transformations act on one sink")
    t0 = reduce_mod_skew(t[0])
    if t0.as_dict() != {BULLET: ONE}:
        raise ValueError("order-0 part of a gauge transformation must be the bare vertex")
    gammas = [_bullet_sum()]
    for mm in range(1, t.precision + 1):
        acc = GraphSum(1)
        for k in range(mm):
            acc = acc + compose(gammas[k], [t[mm - k]])
        gammas.append(reduce_mod_skew(-acc))
    return GraphSeries(1, t.precision, {k: s for k, s in enumerate(gammas)})


def gauge_transform(star: GraphSeries, t: GraphSeries) -> GraphSeries:
    """Gauged product ``f *' g = t^{-1}(t(f) * t(g))``.

    A gauge series of lower precision is padded with empty powers.
    """
    if star.m != 2:
        raise ValueError("gauge transform needs a two-sink star product")
    t = t.pad(star.precision)
    tinv = gauge_inverse(t)
    inner = insert(star, [t, t])
    return insert(tinv, [inner]).truncate(star.precision).reduced()
