"""Kontsevich graphs: encoding, normal forms, generation and structure.

A graph of type (m, n) has sinks ``0..m-1`` and internal vertices
``m..m+n-1``; internal vertex ``m+j`` emits the ordered edge pair
``targets[2j], targets[2j+1]`` (Left, Right).  The sign multiplies the
polydifferential operator the graph encodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations, product
from typing import Iterable, Iterator, Sequence

__all__ = [
    "KontsevichGraph",
    "GraphFormatError",
    "decode",
    "encode",
    "canonical",
    "normal_form",
    "generate",
    "mirror_image",
    "prime_factorize",
    "sink_product",
    "in_degrees",
    "differential_order",
    "has_double_edge",
    "has_tadpole",
    "is_prime",
    "iter_graphs",
    "basic_set",
    "automorphism_count",
]


class GraphFormatError(ValueError):
    """Malformed graph encoding."""


@dataclass(frozen=True, slots=True)
class KontsevichGraph:
    m: int
    n: int
    sign: int
    targets: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.m < 1 or self.n < 0:
            raise GraphFormatError(f"invalid type ({self.m}, {self.n})")
        if self.sign not in (-1, 0, 1):
            raise GraphFormatError(f"sign must be -1, 0 or 1, got {self.sign}")
        if len(self.targets) != 2 * self.n:
            raise GraphFormatError(f"expected {2 * self.n} targets, got {len(self.targets)}")
        top = self.m + self.n
        for t in self.targets:
            if not 0 <= t < top:
                raise GraphFormatError(f"target {t} out of range [0, {top})")

    @classmethod
    def from_pairs(cls, m: int, pairs: Sequence[tuple[int, int]], sign: int = 1) -> "KontsevichGraph":
        flat = tuple(v for p in pairs for v in p)
        return cls(m, len(pairs), sign, flat)

    @property
    def pairs(self) -> list[tuple[int, int]]:
        t = self.targets
        return [(t[2 * j], t[2 * j + 1]) for j in range(self.n)]

    def with_sign(self, sign: int) -> "KontsevichGraph":
        return KontsevichGraph(self.m, self.n, sign, self.targets)

    def abs(self) -> "KontsevichGraph":
        return self.with_sign(1)

    @property
    def order(self) -> int:
        return self.n

    def __str__(self) -> str:
        return encode(self)


def decode(line: str) -> KontsevichGraph:
    """Parse ``"m n s t1L t1R ..."``; arbitrary whitespace is accepted."""
    toks = line.split()
    try:
        vals = [int(t) for t in toks]
    except ValueError:
        raise GraphFormatError(f"non-integer token in {line!r}") from None
    if len(vals) < 3:
        raise GraphFormatError(f"too few tokens in {line!r}")
    m, n, s = vals[:3]
    if n < 0 or len(vals) != 3 + 2 * n:
        raise GraphFormatError(f"wrong token count in {line!r}")
    return KontsevichGraph(m, n, s, tuple(vals[3:]))


def encode(g: KontsevichGraph) -> str:
    return " ".join(str(v) for v in (g.m, g.n, g.sign, *g.targets))


@lru_cache(maxsize=None)
def _perms(n: int) -> tuple[tuple[int, ...], ...]:
    return tuple(permutations(range(n)))


@lru_cache(maxsize=1 << 21)
def canonical(m: int, n: int, targets: tuple[int, ...]) -> tuple[int, tuple[int, ...], int]:
    """Canonical labeling of an unsigned target list.

    Returns ``(t, nf, aut)`` where ``nf`` is the minimal sorted-pair target
    list over all internal relabelings, ``t`` the sign relating the input to
    ``nf`` (0 for skew-vanishing graphs) and ``aut`` the number of
    relabelings attaining the minimum.
    """
    if n == 0:
        return 1, (), 1
    best: tuple[int, ...] | None = None
    best_sign = 0
    aut = 0
    zero = False
    rng = range(n)
    for perm in _perms(n):
        new = [0] * (2 * n)
        sgn = 1
        for j in rng:
            a = targets[2 * j]
            b = targets[2 * j + 1]
            if a >= m:
                a = m + perm[a - m]
            if b >= m:
                b = m + perm[b - m]
            if a > b:
                a, b = b, a
                sgn = -sgn
            k = 2 * perm[j]
            new[k] = a
            new[k + 1] = b
        key = tuple(new)
        if best is None or key < best:
            best, best_sign, aut, zero = key, sgn, 1, False
        elif key == best:
            aut += 1
            if sgn != best_sign:
                zero = True
    assert best is not None
    # a double edge is its own L/R swap with the opposite sign
    if any(best[2 * j] == best[2 * j + 1] for j in rng):
        zero = True
    return (0 if zero else best_sign), best, aut


def normal_form(g: KontsevichGraph) -> KontsevichGraph:
    """Signed normal form ``t * |g|``; the sign is 0 for zero graphs."""
    t, nf, _ = canonical(g.m, g.n, g.targets)
    return KontsevichGraph(g.m, g.n, g.sign * t, nf)


def automorphism_count(g: KontsevichGraph) -> int:
    return canonical(g.m, g.n, g.targets)[2]


def in_degrees(g: KontsevichGraph) -> list[int]:
    deg = [0] * (g.m + g.n)
    for t in g.targets:
        deg[t] += 1
    return deg


def differential_order(g: KontsevichGraph) -> tuple[int, ...]:
    """In-degrees of the sinks: the orders of derivatives falling on the arguments."""
    return tuple(in_degrees(g)[: g.m])


def has_double_edge(g: KontsevichGraph) -> bool:
    t = g.targets
    return any(t[2 * j] == t[2 * j + 1] for j in range(g.n))


def has_tadpole(g: KontsevichGraph) -> bool:
    t = g.targets
    return any(t[2 * j] == g.m + j or t[2 * j + 1] == g.m + j for j in range(g.n))


def _components(m: int, n: int, targets: Sequence[int]) -> list[list[int]]:
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for j in range(n):
        for t in targets[2 * j : 2 * j + 2]:
            if t >= m:
                a, b = find(j), find(t - m)
                if a != b:
                    parent[max(a, b)] = min(a, b)
    groups: dict[int, list[int]] = {}
    for j in range(n):
        groups.setdefault(find(j), []).append(j)
    return sorted(groups.values())


def prime_factorize(g: KontsevichGraph) -> list[KontsevichGraph]:
    """Split ``g`` into the connected components of its internal vertices.

    Edges that land on sinks do not connect.  Each factor keeps all sinks;
    the sign of ``g`` is carried by the first factor.
    """
    if g.n == 0:
        return []
    comps = _components(g.m, g.n, g.targets)
    out = []
    for idx, comp in enumerate(comps):
        new_index = {old: g.m + i for i, old in enumerate(comp)}
        flat: list[int] = []
        for j in comp:
            for t in g.targets[2 * j : 2 * j + 2]:
                flat.append(t if t < g.m else new_index[t - g.m])
        out.append(KontsevichGraph(g.m, len(comp), g.sign if idx == 0 else 1, tuple(flat)))
    return out


def is_prime(g: KontsevichGraph) -> bool:
    return g.n > 0 and len(_components(g.m, g.n, g.targets)) == 1


def sink_product(a: KontsevichGraph, b: KontsevichGraph) -> KontsevichGraph:
    """Glue two graphs over the same sinks (disjoint union of internal vertices)."""
    if a.m != b.m:
        raise ValueError("sink counts differ")
    shift = a.n
    flat = list(a.targets) + [t if t < b.m else t + shift for t in b.targets]
    return KontsevichGraph(a.m, a.n + b.n, a.sign * b.sign, tuple(flat))


def mirror_image(g: KontsevichGraph) -> KontsevichGraph:
    """Swap the sink labels 0 and 1."""
    if g.m != 2:
        raise ValueError("mirror image is defined for two sinks only")
    swap = {0: 1, 1: 0}
    return KontsevichGraph(2, g.n, g.sign, tuple(swap.get(t, t) for t in g.targets))


def _pair_choices(m: int, n: int, j: int, tadpoles: bool, multiple_edges: bool, sorted_only: bool) -> list[tuple[int, int]]:
    me = m + j
    out = []
    for a in range(m + n):
        if a == me and not tadpoles:
            continue
        for b in range(m + n):
            if b == me and not tadpoles:
                continue
            if a == b and not multiple_edges:
                continue
            if sorted_only and a > b:
                continue
            out.append((a, b))
    return out


def iter_graphs(n: int, m: int = 2, *, tadpoles: bool = False, multiple_edges: bool = False) -> Iterator[KontsevichGraph]:
    """All labeled graphs of type (m, n) in lexicographic order of target lists."""
    choices = [_pair_choices(m, n, j, tadpoles, multiple_edges, False) for j in range(n)]
    for combo in product(*choices):
        yield KontsevichGraph(m, n, 1, tuple(v for p in combo for v in p))


def _normal_forms(n: int, m: int, tadpoles: bool, multiple_edges: bool) -> list[KontsevichGraph]:
    # one representative per (Z_2)^n orbit suffices: sorted pairs
    choices = [_pair_choices(m, n, j, tadpoles, multiple_edges, True) for j in range(n)]
    seen: dict[tuple[int, ...], int] = {}
    for combo in product(*choices):
        flat = tuple(v for p in combo for v in p)
        t, nf, _ = canonical(m, n, flat)
        seen[nf] = 1 if t else 0
    return [KontsevichGraph(m, n, s, nf) for nf, s in sorted(seen.items())]


def generate(
    n: int,
    m: int = 2,
    *,
    normal_forms_only: bool = False,
    positive_differential_order: bool = False,
    prime_only: bool = False,
    modulo_mirror_images: bool = False,
    max_internal_indegree: int | None = None,
    tadpoles: bool = False,
    multiple_edges: bool = False,
) -> list[KontsevichGraph]:
    """Enumerate graphs of type (m, n).

    By default tadpoles (an edge to its own source) and double edges (Left
    equal to Right) are excluded, which yields ``(n(n+1))^n`` graphs for
    ``m = 2``.  Output order is lexicographic in the target list.
    """
    if m < 1 or n < 0:
        raise ValueError("need m >= 1 and n >= 0")
    if normal_forms_only:
        graphs: Iterable[KontsevichGraph] = _normal_forms(n, m, tadpoles, multiple_edges)
    else:
        graphs = iter_graphs(n, m, tadpoles=tadpoles, multiple_edges=multiple_edges)
    out = []
    for g in graphs:
        if positive_differential_order or max_internal_indegree is not None:
            deg = in_degrees(g)
            if positive_differential_order and min(deg[:m]) == 0:
                continue
            if max_internal_indegree is not None and g.n and max(deg[m:]) > max_internal_indegree:
                continue
        if prime_only and not is_prime(g):
            continue
        if modulo_mirror_images:
            mir = canonical(2, g.n, mirror_image(g).targets)[1]
            own = g.targets if normal_forms_only else canonical(2, g.n, g.targets)[1]
            if mir < own:
                continue
        out.append(g)
    return out


def basic_set(k: int) -> list[KontsevichGraph]:
    """Prime, positive-order, mirror-reduced normal forms with k internal vertices."""
    return generate(
        k,
        2,
        normal_forms_only=True,
        positive_differential_order=True,
        prime_only=True,
        modulo_mirror_images=True,
    )
