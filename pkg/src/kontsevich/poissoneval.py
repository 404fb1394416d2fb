"""Differential polynomials in jet variables and evaluation of graphs at Poisson structures.

Monomials are packed into a single Python integer: variable ``v`` with
exponent ``e`` contributes ``e * B**v`` for a fixed base ``B``.  Exponents
are balanced digits, so Laurent powers are allowed and the product of two
monomials is plain integer addition.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement, product
from typing import Iterable, Mapping, Sequence

from .coeffs import CoeffExpr, format_rational
from .graphcore import KontsevichGraph, decode, differential_order
from .graphseries import GraphSeries, GraphSum, reduce_mod_skew

__all__ = [
    "JetPoly",
    "PoissonStructure",
    "PolyDiffOperator",
    "InconsistentRelationError",
    "coordinate",
    "jet",
    "catalog",
    "CATALOG_NAMES",
    "evaluate_graph",
    "evaluate",
    "make_vanish",
    "jacobiator",
    "format_evaluation",
    "format_structure",
]

_BITS = 10
_BASE = 1 << _BITS
_HALF = _BASE >> 1


class _Registry:
    """Append-only table of variables (coordinates and jet variables)."""

    def __init__(self) -> None:
        self.info: list[tuple] = []
        self.index: dict[tuple, int] = {}
        self.powers: list[int] = []

    def get(self, key: tuple) -> int:
        v = self.index.get(key)
        if v is None:
            v = len(self.info)
            self.info.append(key)
            self.index[key] = v
            self.powers.append(_BASE**v)
        return v


_REG = _Registry()


def _decode(mono: int) -> list[tuple[int, int]]:
    out = []
    v = 0
    while mono:
        r = mono & (_BASE - 1)
        if r >= _HALF:
            r -= _BASE
        mono = (mono - r) >> _BITS
        if r:
            out.append((v, r))
        v += 1
    return out


def _var_name(v: int) -> str:
    info = _REG.info[v]
    if info[0] == "coord":
        return info[1]
    _, param, multi, coords = info
    if not any(multi):
        return param
    return param + "_" + "".join(c * k for c, k in zip(coords, multi))


class JetPoly:
    """Finite sum of rational multiples of Laurent monomials in coordinates and jets."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[int, int | Fraction] | None = None):
        self.terms: dict[int, int | Fraction] = {k: v for k, v in (terms or {}).items() if v}

    @classmethod
    def constant(cls, c: int | Fraction) -> "JetPoly":
        return cls({0: c})

    @classmethod
    def monomial(cls, powers: Mapping[int, int], coef: int | Fraction = 1) -> "JetPoly":
        key = sum(e * _REG.powers[v] for v, e in powers.items())
        return cls({key: coef})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            other = JetPoly.constant(other)
        if not isinstance(other, JetPoly):
            return NotImplemented
        return self.terms == other.terms

    __hash__ = None  # type: ignore[assignment]

    def __add__(self, other: "JetPoly") -> "JetPoly":
        out = dict(self.terms)
        for k, v in other.terms.items():
            s = out.get(k, 0) + v
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        r = JetPoly()
        r.terms = out
        return r

    def __neg__(self) -> "JetPoly":
        r = JetPoly()
        r.terms = {k: -v for k, v in self.terms.items()}
        return r

    def __sub__(self, other: "JetPoly") -> "JetPoly":
        return self + (-other)

    def scale(self, q: int | Fraction) -> "JetPoly":
        if not q:
            return JetPoly()
        r = JetPoly()
        r.terms = {k: v * q for k, v in self.terms.items()}
        return r

    def __mul__(self, other: "JetPoly | int | Fraction") -> "JetPoly":
        if not isinstance(other, JetPoly):
            return self.scale(other)
        r = JetPoly()
        r.terms = _mul(self.terms, other.terms)
        return r

    __rmul__ = __mul__

    def diff(self, coord: str) -> "JetPoly":
        """Total derivative with respect to the named base coordinate."""
        out: dict[int, int | Fraction] = {}
        for mono, c in self.terms.items():
            for v, e in _decode(mono):
                info = _REG.info[v]
                if info[0] == "coord":
                    if info[1] != coord:
                        continue
                    key = mono - _REG.powers[v]
                    val = c * e
                else:
                    _, param, multi, coords = info
                    if coord not in coords:
                        continue
                    i = coords.index(coord)
                    shifted = multi[:i] + (multi[i] + 1,) + multi[i + 1 :]
                    w = _REG.get(("jet", param, shifted, coords))
                    key = mono - _REG.powers[v] + _REG.powers[w]
                    val = c * e
                s = out.get(key, 0) + val
                if s:
                    out[key] = s
                else:
                    out.pop(key, None)
        r = JetPoly()
        r.terms = out
        return r

    def sorted_terms(self) -> list[tuple[list[tuple[str, int]], int | Fraction]]:
        rows = []
        for mono, c in self.terms.items():
            rows.append((sorted((_var_name(v), e) for v, e in _decode(mono)), c))
        rows.sort(key=lambda r: r[0])
        return rows

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for factors, c in self.sorted_terms():
            mono = "*".join(n if e == 1 else f"{n}^({e})" if e < 0 else f"{n}^{e}" for n, e in factors)
            q = Fraction(c)
            if not mono:
                s = format_rational(q)
            elif q == 1:
                s = mono
            elif q == -1:
                s = "-" + mono
            else:
                s = f"{format_rational(q)}*{mono}"
            if parts and not s.startswith("-"):
                s = "+" + s
            parts.append(s)
        return "".join(parts)

    __repr__ = __str__


def _mul(a: Mapping[int, int | Fraction], b: Mapping[int, int | Fraction]) -> dict[int, int | Fraction]:
    out: dict[int, int | Fraction] = {}
    get = out.get
    for ka, va in a.items():
        for kb, vb in b.items():
            k = ka + kb
            out[k] = get(k, 0) + va * vb
    return {k: v for k, v in out.items() if v}


def coordinate(name: str, power: int = 1) -> JetPoly:
    return JetPoly.monomial({_REG.get(("coord", name)): power})


def jet(param: str, coords: Sequence[str], multi: Sequence[int] | None = None) -> JetPoly:
    """The jet variable for the derivative ``multi`` of functional parameter ``param``."""
    coords = tuple(coords)
    multi = tuple(multi) if multi is not None else (0,) * len(coords)
    return JetPoly.monomial({_REG.get(("jet", param, multi, coords)): 1})


@dataclass
class PoissonStructure:
    """Skew matrix ``P[i][j]`` of differential polynomials over named coordinates."""

    name: str
    coords: tuple[str, ...]
    matrix: list[list[JetPoly]]
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        d = len(self.coords)
        if len(self.matrix) != d or any(len(row) != d for row in self.matrix):
            raise ValueError("matrix shape does not match the coordinates")
        for i in range(d):
            for j in range(d):
                if self.matrix[i][j] != -self.matrix[j][i]:
                    raise ValueError("Poisson matrix must be antisymmetric")

    @property
    def dim(self) -> int:
        return len(self.coords)

    def derivative(self, K: tuple[int, ...], i: int, j: int) -> dict[int, int | Fraction]:
        """Terms of ``d_K P^{ij}`` for a sorted index tuple ``K`` (memoized)."""
        key = (K, i, j)
        hit = self._cache.get(key)
        if hit is None:
            if K:
                poly = JetPoly()
                poly.terms = self.derivative(K[:-1], i, j)
                hit = poly.diff(self.coords[K[-1]]).terms
            else:
                hit = dict(self.matrix[i][j].terms)
            self._cache[key] = hit
        return hit

    def bracket(self, f: JetPoly, g: JetPoly) -> JetPoly:
        out = JetPoly()
        for i, a in enumerate(self.coords):
            fa = f.diff(a)
            if fa.is_zero():
                continue
            for j, b in enumerate(self.coords):
                if not self.matrix[i][j].is_zero():
                    out = out + fa * self.matrix[i][j] * g.diff(b)
        return out


CATALOG_NAMES = ("2d-polar", "2d-polynomial-generic", "3d-generic", "3d-polynomial")


def _levi_civita_matrix(coords: tuple[str, ...], p: JetPoly, q: JetPoly) -> list[list[JetPoly]]:
    # {x^i, x^j} = p * eps^{ijk} d_k q
    dq = [q.diff(c) for c in coords]
    mat = [[JetPoly() for _ in range(3)] for _ in range(3)]
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        mat[i][j] = p * dq[k]
        mat[j][i] = -mat[i][j]
    return mat


def catalog(name: str) -> PoissonStructure:
    """Named Poisson structures with exact differential-polynomial entries."""
    if name == "2d-polar":
        coords = ("r", "t")
        inv = coordinate("r", -1)
        return PoissonStructure(name, coords, [[JetPoly(), inv], [-inv, JetPoly()]])
    if name == "2d-polynomial-generic":
        coords = ("x", "y")
        u = jet("u", coords)
        return PoissonStructure(name, coords, [[JetPoly(), u], [-u, JetPoly()]])
    if name == "3d-generic":
        coords = ("x", "y", "z")
        return PoissonStructure(name, coords, _levi_civita_matrix(coords, jet("p", coords), jet("q", coords)))
    if name == "3d-polynomial":
        coords = ("x", "y", "z")
        q = coordinate("x") * coordinate("y") * coordinate("z")
        return PoissonStructure(name, coords, _levi_civita_matrix(coords, JetPoly.constant(1), q))
    raise KeyError(
        f"unknown Poisson structure {name!r}; available: {', '.join(CATALOG_NAMES)}"
        " (4d and 9d structures are not provided)"
    )


Slots = tuple[tuple[int, ...], ...]
PolyDiffOperator = dict[Slots, JetPoly]


def _incoming(g: KontsevichGraph) -> list[list[int]]:
    inc: list[list[int]] = [[] for _ in range(g.m + g.n)]
    for e, t in enumerate(g.targets):
        inc[t].append(e)
    return inc


def _evaluate_raw(g: KontsevichGraph, P: PoissonStructure) -> dict[Slots, dict[int, int | Fraction]]:
    d = P.dim
    m, n = g.m, g.n
    inc = _incoming(g)
    pairs = [(a, b) for a in range(d) for b in range(d) if not P.matrix[a][b].is_zero()]
    out: dict[Slots, dict[int, int | Fraction]] = {}
    if n == 0:
        out[tuple(() for _ in range(m))] = {0: g.sign}
        return out
    sink_inc = inc[:m]
    vert_inc = inc[m:]
    idx = [0] * (2 * n)
    for combo in product(pairs, repeat=n):
        for j, (a, b) in enumerate(combo):
            idx[2 * j] = a
            idx[2 * j + 1] = b
        poly: dict[int, int | Fraction] | None = None
        for j in range(n):
            K = tuple(sorted(idx[e] for e in vert_inc[j]))
            a, b = combo[j]
            f = P.derivative(K, a, b)
            if not f:
                poly = None
                break
            poly = f if poly is None else _mul(poly, f)
            if not poly:
                break
        if not poly:
            continue
        slots = tuple(tuple(sorted(idx[e] for e in sink_inc[s])) for s in range(m))
        bucket = out.get(slots)
        if bucket is None:
            out[slots] = bucket = {}
        get = bucket.get
        for k, v in poly.items():
            bucket[k] = get(k, 0) + v
    clean = {}
    for slots, bucket in out.items():
        nz = {k: v * g.sign for k, v in bucket.items() if v}
        if nz:
            clean[slots] = nz
    return clean


def evaluate_graph(g: KontsevichGraph, P: PoissonStructure) -> PolyDiffOperator:
    """Polydifferential operator of one signed graph at ``P``.

    Slot keys list, per sink, the sorted coordinate indices of the
    derivatives falling on that argument.
    """
    out = {}
    for slots, terms in _evaluate_raw(g, P).items():
        poly = JetPoly()
        poly.terms = terms
        out[slots] = poly
    return out


def _numeric(c: CoeffExpr) -> Fraction:
    if not c.is_constant():
        raise ValueError(f"symbolic coefficient {c} cannot be evaluated; use make_vanish")
    return c.constant


def evaluate_sum(s: GraphSum, P: PoissonStructure) -> PolyDiffOperator:
    acc: dict[Slots, dict[int, int | Fraction]] = {}
    for c, g in s.terms:
        q = _numeric(c)
        if not q:
            continue
        for slots, terms in _evaluate_raw(g, P).items():
            bucket = acc.setdefault(slots, {})
            for k, v in terms.items():
                bucket[k] = bucket.get(k, 0) + v * q
    out = {}
    for slots, bucket in sorted(acc.items()):
        poly = JetPoly(bucket)
        if not poly.is_zero():
            out[slots] = poly
    return out


def evaluate(s: GraphSeries | GraphSum, P: PoissonStructure) -> dict[int, PolyDiffOperator] | PolyDiffOperator:
    """Operator of a numeric graph sum (or per power of a series) at ``P``."""
    if isinstance(s, GraphSum):
        return evaluate_sum(s, P)
    return {k: evaluate_sum(part, P) for k, part in s.items()}


class InconsistentRelationError(ValueError):
    """A coefficient group without indeterminates failed to vanish."""


def _normalize(e: CoeffExpr) -> CoeffExpr:
    items = list(e.items())
    lead = items[0][1] if items else e.constant
    return e.scale(1 / lead)


def make_vanish(
    s: GraphSeries | GraphSum,
    P: PoissonStructure,
    powers: Iterable[int] | None = None,
    orders: Iterable[Sequence[int]] | None = None,
) -> list[CoeffExpr]:
    """Affine relations forcing the operator of ``s`` at ``P`` to vanish.

    One relation per (power, sink derivatives, monomial) group; relations
    equal up to a rational factor are emitted once (normalized so that the
    first indeterminate has coefficient 1).  ``orders`` restricts to the
    given sink differential orders.
    """
    if isinstance(s, GraphSum):
        parts = [(0, s)]
    else:
        wanted = set(powers) if powers is not None else None
        parts = [(k, part) for k, part in s.items() if wanted is None or k in wanted]
    order_set = {tuple(o) for o in orders} if orders is not None else None
    out: list[CoeffExpr] = []
    seen: set[CoeffExpr] = set()
    for k, part in parts:
        acc: dict[tuple[Slots, int], dict[str, Fraction]] = {}
        for c, g in reduce_mod_skew(part).terms:
            if order_set is not None and differential_order(g) not in order_set:
                continue
            coef = list(c.items())
            if c.constant:
                coef.append(("", c.constant))
            for slots, terms in _evaluate_raw(g, P).items():
                for mono, v in terms.items():
                    bucket = acc.setdefault((slots, mono), {})
                    for name, q in coef:
                        bucket[name] = bucket.get(name, 0) + q * v
        for key in sorted(acc):
            bucket = acc[key]
            const = bucket.pop("", 0)
            expr = CoeffExpr(const, bucket)
            if expr.is_zero():
                continue
            if expr.is_constant():
                raise InconsistentRelationError(
                    f"nonzero constant {expr} at power {k}, slots {key[0]}: not a Poisson structure or a bug"
                )
            norm = _normalize(expr)
            if norm in seen:
                continue
            seen.add(norm)
            out.append(norm)
    return out


def jacobiator() -> GraphSum:
    """The three-graph Jacobiator on three sinks."""
    return GraphSum.from_terms(
        3,
        [
            (-1, decode("3 2 1 0 1 2 3")),
            (1, decode("3 2 1 0 2 1 3")),
            (-1, decode("3 2 1 0 4 1 2")),
        ],
    )


def _slot_label(slot: tuple[int, ...], P: PoissonStructure) -> str:
    return "[ " + " ".join(P.coords[i] for i in slot) + " ]" if slot else "[ ]"


def _multisets(d: int, order: int) -> list[tuple[int, ...]]:
    return list(combinations_with_replacement(range(d), order))


def format_structure(P: PoissonStructure) -> str:
    rows = ["[" + ", ".join(str(e) for e in row) + "]" for row in P.matrix]
    return f"Coordinates: {' '.join(P.coords)}\nPoisson structure matrix:\n[" + "\n".join(rows) + "]\n"


def format_evaluation(s: GraphSeries | GraphSum, P: PoissonStructure) -> str:
    """Paper-style dump of the operator of ``s`` at ``P``.

    For every power and every sink differential order occurring in the
    reduced input, each choice of derivatives on the sinks is listed as a
    ``# [ ... ] [ ... ]`` line followed by its coefficient (``0`` included).
    """
    parts = [(0, s)] if isinstance(s, GraphSum) else list(s.items())
    lines = [format_structure(P), "\n"]
    for k, part in parts:
        red = reduce_mod_skew(part)
        op = evaluate_sum(red, P)
        lines.append(f"h^{k}:\n")
        for order in sorted({differential_order(g) for _, g in red.terms}):
            lines.append("# " + " ".join(map(str, order)) + "\n")
            for slots in product(*(_multisets(P.dim, o) for o in order)):
                label = " ".join(_slot_label(sl, P) for sl in slots)
                lines.append(f"# {label}\n{op.get(slots, JetPoly())}\n")
    return "".join(lines)
