"""Formal sums and truncated power series of weighted Kontsevich graphs."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations, product
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .coeffs import CoeffExpr, CoeffParseError, ONE, coefficient_of, parse_coeff, substitute
from .graphcore import GraphFormatError, KontsevichGraph, canonical, differential_order

__all__ = [
    "GraphSum",
    "GraphSeries",
    "SeriesFormatError",
    "reduce_mod_skew",
    "skew_symmetrize",
    "compose",
    "insert",
    "identity_series",
    "substitute_relations",
    "extract_coefficient",
    "read_series",
    "write_series",
    "parse_term_line",
]


class SeriesFormatError(ValueError):
    """Malformed graph-series text."""


def _permutation_sign(p: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(p)
    for i in range(len(p)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = p[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


@dataclass(frozen=True)
class GraphSum:
    """A formal sum of signed graphs over ``m`` sinks.

    Terms are kept as given; :func:`reduce_mod_skew` produces the reduced
    form (distinct normal forms with sign +1 in lexicographic order).
    """

    m: int
    terms: tuple[tuple[CoeffExpr, KontsevichGraph], ...] = ()

    def __post_init__(self) -> None:
        for _, g in self.terms:
            if g.m != self.m:
                raise ValueError(f"mixed sink counts: {g.m} in a sum over {self.m} sinks")

    @classmethod
    def from_terms(cls, m: int, terms: Iterable[tuple[CoeffExpr | int, KontsevichGraph]]) -> "GraphSum":
        return cls(m, tuple((CoeffExpr.coerce(c), g) for c, g in terms))

    @classmethod
    def from_dict(cls, m: int, acc: Mapping[tuple[int, tuple[int, ...]], CoeffExpr]) -> "GraphSum":
        terms = []
        for (n, nf), c in sorted(acc.items()):
            if not c.is_zero():
                terms.append((c, KontsevichGraph(m, n, 1, nf)))
        return cls(m, tuple(terms))

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[tuple[CoeffExpr, KontsevichGraph]]:
        return iter(self.terms)

    def __add__(self, other: "GraphSum") -> "GraphSum":
        if self.m != other.m:
            raise ValueError("mixed sink counts")
        return GraphSum(self.m, self.terms + other.terms)

    def __neg__(self) -> "GraphSum":
        return GraphSum(self.m, tuple((-c, g) for c, g in self.terms))

    def __sub__(self, other: "GraphSum") -> "GraphSum":
        return self + (-other)

    def scale(self, q: CoeffExpr | int) -> "GraphSum":
        q = CoeffExpr.coerce(q)
        return GraphSum(self.m, tuple((c * q, g) for c, g in self.terms))

    def map_coeffs(self, fn: Callable[[CoeffExpr], CoeffExpr]) -> "GraphSum":
        out = []
        for c, g in self.terms:
            c2 = fn(c)
            if not c2.is_zero():
                out.append((c2, g))
        return GraphSum(self.m, tuple(out))

    def as_dict(self) -> dict[KontsevichGraph, CoeffExpr]:
        """Reduced form as a mapping ``graph -> coefficient``."""
        return {g: c for c, g in reduce_mod_skew(self).terms}

    def reduced(self) -> "GraphSum":
        return reduce_mod_skew(self)


@dataclass(frozen=True)
class GraphSeries:
    """Truncated series ``sum_k h^k S_k``; powers above ``precision`` are unknown."""

    m: int
    precision: int
    powers: dict[int, GraphSum] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for k, s in self.powers.items():
            if k < 0 or k > self.precision:
                raise ValueError(f"power {k} outside [0, {self.precision}]")
            if s.m != self.m:
                raise ValueError("mixed sink counts in series")

    def __getitem__(self, k: int) -> GraphSum:
        if k > self.precision:
            raise KeyError(f"power {k} exceeds precision {self.precision}")
        return self.powers.get(k, GraphSum(self.m))

    def items(self) -> Iterator[tuple[int, GraphSum]]:
        for k in range(self.precision + 1):
            yield k, self[k]

    def map_sums(self, fn: Callable[[GraphSum], GraphSum]) -> "GraphSeries":
        return GraphSeries(self.m, self.precision, {k: fn(s) for k, s in self.items()})

    def reduced(self) -> "GraphSeries":
        return self.map_sums(reduce_mod_skew)

    def truncate(self, precision: int) -> "GraphSeries":
        return GraphSeries(self.m, precision, {k: s for k, s in self.powers.items() if k <= precision})

    def pad(self, precision: int) -> "GraphSeries":
        """Same series viewed at a higher precision (missing powers are empty)."""
        return GraphSeries(self.m, max(precision, self.precision), dict(self.powers))

    def __add__(self, other: "GraphSeries") -> "GraphSeries":
        if self.m != other.m:
            raise ValueError("mixed sink counts")
        prec = min(self.precision, other.precision)
        return GraphSeries(self.m, prec, {k: self[k] + other[k] for k in range(prec + 1)})

    def __neg__(self) -> "GraphSeries":
        return self.map_sums(lambda s: -s)

    def __sub__(self, other: "GraphSeries") -> "GraphSeries":
        return self + (-other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GraphSeries):
            return NotImplemented
        if self.m != other.m or self.precision != other.precision:
            return False
        return all(self[k].as_dict() == other[k].as_dict() for k in range(self.precision + 1))

    __hash__ = None  # type: ignore[assignment]


def _accumulate(acc: dict, m: int, n: int, targets: tuple[int, ...], sign: int, c: CoeffExpr) -> None:
    t, nf, _ = canonical(m, n, targets)
    s = sign * t
    if s == 0 or c.is_zero():
        return
    key = (n, nf)
    prev = acc.get(key)
    val = c if s == 1 else -c
    acc[key] = val if prev is None else prev + val


def reduce_mod_skew(s: GraphSum) -> GraphSum:
    """Normal forms with sign +1, like terms merged, zero graphs dropped."""
    acc: dict = {}
    for c, g in s.terms:
        _accumulate(acc, s.m, g.n, g.targets, g.sign, c)
    return GraphSum.from_dict(s.m, acc)


def _skew_sum(s: GraphSum) -> GraphSum:
    m = s.m
    acc: dict = {}
    for perm in permutations(range(m)):
        psign = _permutation_sign(perm)
        for c, g in s.terms:
            flat = tuple(perm[t] if t < m else t for t in g.targets)
            _accumulate(acc, m, g.n, flat, g.sign * psign, c)
    return GraphSum.from_dict(m, acc)


def skew_symmetrize(s: GraphSeries | GraphSum) -> GraphSeries | GraphSum:
    """Signed sum over all permutations of the sinks, without prefactor."""
    if isinstance(s, GraphSum):
        return _skew_sum(s)
    return s.map_sums(_skew_sum)


def _compose_graph(
    outer: KontsevichGraph, args: Sequence[KontsevichGraph]
) -> Iterator[tuple[int, tuple[int, ...], int, int]]:
    """Leibniz expansion of ``outer(args)``: yields ``(m, n, targets, sign)``."""
    m_out = outer.m
    sink_off, int_off = [], []
    total_m = sum(a.m for a in args)
    s_acc, i_acc = 0, total_m
    for a in args:
        sink_off.append(s_acc)
        int_off.append(i_acc)
        s_acc += a.m
        i_acc += a.n
    base = i_acc
    n_total = base - total_m + outer.n

    fixed: list[int] = []
    for a, so, io in zip(args, sink_off, int_off):
        for t in a.targets:
            fixed.append(so + t if t < a.m else io + t - a.m)

    vertex_lists = []
    for a, so, io in zip(args, sink_off, int_off):
        vertex_lists.append(tuple(range(so, so + a.m)) + tuple(range(io, io + a.n)))

    slots = []
    for t in outer.targets:
        if t < m_out:
            slots.append(vertex_lists[t])
        else:
            slots.append((base + t - m_out,))
    sign = outer.sign
    for a in args:
        sign *= a.sign
    fixed_t = tuple(fixed)
    for choice in product(*slots):
        yield total_m, n_total, fixed_t + choice, sign


def compose(outer: GraphSum, args: Sequence[GraphSum]) -> GraphSum:
    """Insert graph sums into the sinks of ``outer`` (multilinear, Leibniz rule)."""
    if len(args) != outer.m:
        raise ValueError(f"{outer.m} arguments expected, got {len(args)}")
    total_m = sum(a.m for a in args)
    acc: dict = {}
    arg_terms = [a.terms for a in args]
    for c0, g0 in outer.terms:
        for combo in product(*arg_terms):
            c = c0
            for ca, _ in combo:
                c = c * ca
            if c.is_zero():
                continue
            for m, n, flat, sign in _compose_graph(g0, [g for _, g in combo]):
                _accumulate(acc, m, n, flat, sign, c)
    return GraphSum.from_dict(total_m, acc)


def insert(outer: GraphSeries, args: Sequence[GraphSeries]) -> GraphSeries:
    """Series composition ``outer(args[0], ..., args[m-1])`` with powers adding."""
    if len(args) != outer.m:
        raise ValueError(f"{outer.m} arguments expected, got {len(args)}")
    prec = min([outer.precision] + [a.precision for a in args])
    total_m = sum(a.m for a in args)
    acc: dict[int, dict] = {k: {} for k in range(prec + 1)}
    arg_items = [[(k, s) for k, s in a.items() if s.terms] for a in args]
    for k0, s0 in outer.items():
        if k0 > prec or not s0.terms:
            continue
        for combo in product(*arg_items):
            k = k0 + sum(kk for kk, _ in combo)
            if k > prec:
                continue
            part = compose(s0, [s for _, s in combo])
            bucket = acc[k]
            for c, g in part.terms:
                key = (g.n, g.targets)
                prev = bucket.get(key)
                bucket[key] = c if prev is None else prev + c
    return GraphSeries(total_m, prec, {k: GraphSum.from_dict(total_m, d) for k, d in acc.items()})


def identity_series(precision: int) -> GraphSeries:
    """The one-sink series whose only term is the bare sink at order 0."""
    return GraphSeries(1, precision, {0: GraphSum(1, ((ONE, KontsevichGraph(1, 0, 1, ())),))})


def substitute_relations(s: GraphSeries, bindings: Mapping[str, CoeffExpr]) -> GraphSeries:
    return s.map_sums(lambda t: t.map_coeffs(lambda c: substitute(c, bindings)))


def extract_coefficient(s: GraphSeries, target: str) -> GraphSeries:
    return s.map_sums(lambda t: t.map_coeffs(lambda c: CoeffExpr(coefficient_of(c, target))))


def parse_term_line(line: str) -> tuple[KontsevichGraph, CoeffExpr]:
    """Split ``"m n s targets... coefficient"``."""
    toks = line.split()
    if len(toks) < 3:
        raise SeriesFormatError(f"too few tokens: {line!r}")
    try:
        m, n, s = int(toks[0]), int(toks[1]), int(toks[2])
    except ValueError:
        raise SeriesFormatError(f"bad graph header: {line!r}") from None
    end = 3 + 2 * n
    if n < 0 or len(toks) < end:
        raise SeriesFormatError(f"wrong token count: {line!r}")
    try:
        targets = tuple(int(t) for t in toks[3:end])
    except ValueError:
        raise SeriesFormatError(f"non-integer target: {line!r}") from None
    g = KontsevichGraph(m, n, s, targets)
    rest = " ".join(toks[end:])
    if not rest:
        raise SeriesFormatError(f"missing coefficient: {line!r}")
    return g, parse_coeff(rest)


def read_series(text: str, m: int | None = None) -> GraphSeries:
    """Parse the ``h^k:`` series format; the precision is the highest header.

    Terms preceding the first header are read as order 0, so a bare list
    of graphs is a valid order-0 series.
    """
    powers: dict[int, list] = {}
    current: int | None = None
    sinks = m
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("h^"):
            body = line[2:].rstrip(":").strip()
            try:
                current = int(body)
            except ValueError:
                raise SeriesFormatError(f"line {lineno}: bad header {raw!r}") from None
            if current < 0:
                raise SeriesFormatError(f"line {lineno}: negative power")
            powers.setdefault(current, [])
            continue
        if current is None:
            # terms before any header belong to h^0 (header-less graph sums)
            current = 0
            powers.setdefault(0, [])
        try:
            g, c = parse_term_line(line)
        except (GraphFormatError, CoeffParseError, SeriesFormatError, ValueError) as exc:
            raise SeriesFormatError(f"line {lineno}: {exc}") from None
        if sinks is None:
            sinks = g.m
        elif g.m != sinks:
            raise SeriesFormatError(f"line {lineno}: mixed sink counts")
        powers[current].append((c, g))
    if not powers:
        raise SeriesFormatError("no h^k header: precision undefined")
    if sinks is None:
        sinks = 2
    prec = max(powers)
    return GraphSeries(sinks, prec, {k: GraphSum(sinks, tuple(v)) for k, v in powers.items()})


def _order_key(g: KontsevichGraph) -> tuple:
    return (g.n, g.targets)


def write_series(s: GraphSeries, print_differential_orders: bool = False) -> str:
    """Canonical text: powers ascending, graphs in lexicographic order."""
    out: list[str] = []
    for k in range(s.precision + 1):
        out.append(f"h^{k}:")
        terms = sorted(s[k].terms, key=lambda t: _order_key(t[1]))
        if print_differential_orders:
            groups: dict[tuple[int, ...], list] = {}
            for c, g in terms:
                groups.setdefault(differential_order(g), []).append((c, g))
            for order in sorted(groups):
                out.append("# " + " ".join(map(str, order)))
                out.extend(f"{g} {c}" for c, g in groups[order])
        else:
            out.extend(f"{g} {c}" for c, g in terms)
    return "\n".join(out) + "\n"


def write_sum(s: GraphSum) -> str:
    return "".join(f"{g} {c}\n" for c, g in sorted(s.terms, key=lambda t: _order_key(t[1])))
