"""Leibniz graphs: differential consequences of the Jacobi identity.

A Leibniz graph has ``m`` sinks, ``d`` ordinary internal vertices (each
emitting an ordered pair) and ``l`` Jacobiators (each emitting an ordered
triple of arguments).  In the encoding the Jacobiators occupy the last
``2l`` internal vertices ``B, ..., B+2l-1`` with ``B = m + d``; Jacobiator
``i`` is referred to by the placeholder target ``B + i`` and its pair slots
read ``a b B+2i c`` for arguments ``(a, b, c)``.

Expansion replaces Jacobiator ``i`` by the cyclic sum of the pattern
``lower -> (a, b)``, ``upper -> (lower, c)`` and distributes each edge into
the placeholder over the two vertices (Leibniz rule).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from itertools import combinations, permutations, product
from typing import Iterable, Sequence

from .coeffs import CoeffExpr, substitute
from .graphcore import GraphFormatError, KontsevichGraph, differential_order
from .graphseries import GraphSeries, GraphSum, reduce_mod_skew, write_sum
from .linsolve import LinearSystem, natural_key, solve

__all__ = [
    "LeibnizGraph",
    "decode_leibniz",
    "encode_leibniz",
    "expand",
    "generate_leibniz",
    "random_leibniz",
    "reduce_mod_jacobi",
    "JacobiReduction",
    "format_reduction",
]


@dataclass(frozen=True)
class LeibnizGraph:
    m: int
    pairs: tuple[tuple[int, int], ...]
    jacobiators: tuple[tuple[int, int, int], ...]
    sign: int = 1

    def __post_init__(self) -> None:
        if not self.jacobiators:
            raise GraphFormatError("a Leibniz graph needs at least one Jacobiator")
        top = self.m + len(self.pairs) + len(self.jacobiators)
        for j, pr in enumerate(self.pairs):
            if len(pr) != 2 or any(not 0 <= t < top for t in pr):
                raise GraphFormatError(f"bad pair {pr} at vertex {self.m + j}")
        base = self.base
        for i, args in enumerate(self.jacobiators):
            if len(args) != 3:
                raise GraphFormatError(f"Jacobiator {i} needs three arguments, got {len(args)}")
            if len(set(args)) != 3:
                raise GraphFormatError(f"Jacobiator {i} arguments must be distinct: {args}")
            if any(not 0 <= t < top for t in args) or base + i in args:
                raise GraphFormatError(f"bad arguments {args} for Jacobiator {i}")

    @property
    def d(self) -> int:
        return len(self.pairs)

    @property
    def ell(self) -> int:
        return len(self.jacobiators)

    @property
    def n(self) -> int:
        """Internal vertex count of the expanded Kontsevich graphs."""
        return self.d + 2 * self.ell

    @property
    def base(self) -> int:
        return self.m + self.d

    def sink_orders(self) -> tuple[int, ...]:
        deg = [0] * self.m
        for t in (t for pr in self.pairs for t in pr):
            if t < self.m:
                deg[t] += 1
        for t in (t for args in self.jacobiators for t in args):
            if t < self.m:
                deg[t] += 1
        return tuple(deg)

    def jacobiator_indegrees(self) -> list[int]:
        deg = [0] * self.ell
        for t in (t for pr in self.pairs for t in pr):
            if t >= self.base:
                deg[t - self.base] += 1
        for t in (t for args in self.jacobiators for t in args):
            if t >= self.base:
                deg[t - self.base] += 1
        return deg

    def __str__(self) -> str:
        return encode_leibniz(self)


def encode_leibniz(L: LeibnizGraph) -> str:
    flat: list[int] = [t for pr in L.pairs for t in pr]
    for i, (a, b, c) in enumerate(L.jacobiators):
        flat += [a, b, L.base + 2 * i, c]
    return " ".join(str(v) for v in (L.m, L.n, L.sign, *flat))


def decode_leibniz(line: str, jacobiators: int | None = None) -> LeibnizGraph:
    """Parse an encoding; the Jacobiator count is inferred when not given.

    Inference picks the smallest ``l`` for which every Jacobiator pair has
    the literal lower vertex ``B+2i`` in its third slot and the result is a
    valid Leibniz graph.  Encodings can be ambiguous (a pair ``x y B c`` may
    also read as an ordinary vertex); pass ``jacobiators`` to force a layout.
    """
    try:
        vals = [int(t) for t in line.split()]
    except ValueError:
        raise GraphFormatError(f"non-integer token in {line!r}") from None
    if len(vals) < 3:
        raise GraphFormatError(f"too few tokens in {line!r}")
    m, n, s = vals[:3]
    tg = vals[3:]
    if len(tg) != 2 * n:
        raise GraphFormatError(f"wrong token count in {line!r}")
    candidates = [jacobiators] if jacobiators is not None else list(range(1, n // 2 + 1))
    for ell in candidates:
        if ell is None or ell < 1 or 2 * ell > n:
            continue
        d = n - 2 * ell
        base = m + d
        if all(tg[2 * (d + 2 * i) + 2] == base + 2 * i for i in range(ell)):
            pairs = tuple((tg[2 * j], tg[2 * j + 1]) for j in range(d))
            jac = tuple(
                (tg[2 * (d + 2 * i)], tg[2 * (d + 2 * i) + 1], tg[2 * (d + 2 * i) + 3]) for i in range(ell)
            )
            try:
                return LeibnizGraph(m, pairs, jac, s)
            except GraphFormatError:
                if jacobiators is not None:
                    raise
    raise GraphFormatError(f"no Jacobiator layout fits {line!r}")


def expand(L: LeibnizGraph, reduce: bool = True) -> GraphSum:
    """Sum of Kontsevich graphs encoded by ``L``.

    With ``reduce=False`` the raw terms are listed in generation order:
    cyclic rotations outermost, then Leibniz choices (lower vertex first).
    """
    m, base, ell = L.m, L.base, L.ell
    n = L.n

    def slot(t: int) -> int | None:
        # None marks a placeholder target, resolved per Leibniz choice
        return None if base <= t < base + ell else t

    rotations = [((a, b, c), (b, c, a), (c, a, b)) for a, b, c in L.jacobiators]
    terms = []
    for rot in product(range(3), repeat=ell):
        template: list[int] = []
        for pr in L.pairs:
            template += list(pr)
        for i in range(ell):
            a, b, c = rotations[i][rot[i]]
            template += [a, b, base + 2 * i, c]
        holes = [k for k, t in enumerate(template) if slot(t) is None and not _is_literal_lower(k, L)]
        for choice in product((0, 1), repeat=len(holes)):
            flat = list(template)
            for k, off in zip(holes, choice):
                i = template[k] - base
                flat[k] = base + 2 * i + off
            terms.append((CoeffExpr(L.sign), KontsevichGraph(m, n, 1, tuple(flat))))
    raw = GraphSum(m, tuple(terms))
    return reduce_mod_skew(raw) if reduce else raw


def _is_literal_lower(k: int, L: LeibnizGraph) -> bool:
    # the third slot of Jacobiator i's pair is the literal vertex B+2i
    off = k - 2 * L.d
    return off >= 0 and off % 4 == 2


def _canonical_key(m: int, pairs: Sequence[tuple[int, int]], jac: Sequence[tuple[int, int, int]]):
    d, ell = len(pairs), len(jac)
    base = m + d
    best = None
    best_sign = 0
    zero = False
    for sigma in permutations(range(d)):
        for tau in permutations(range(ell)):

            def mp(t: int) -> int:
                if t < m:
                    return t
                if t < base:
                    return m + sigma[t - m]
                return base + tau[t - base]

            sign = 1
            new_pairs = [None] * d
            for j, (a, b) in enumerate(pairs):
                a, b = mp(a), mp(b)
                if a > b:
                    a, b = b, a
                    sign = -sign
                new_pairs[sigma[j]] = (a, b)
            new_jac = [None] * ell
            for i, args in enumerate(jac):
                mapped = [mp(t) for t in args]
                srt = sorted(mapped)
                sign *= _perm_sign([srt.index(x) for x in mapped])
                new_jac[tau[i]] = tuple(srt)
            key = (tuple(new_pairs), tuple(new_jac))
            if best is None or key < best:
                best, best_sign, zero = key, sign, False
            elif key == best and sign != best_sign:
                zero = True
    return best, (0 if zero else best_sign)


def _perm_sign(p: Sequence[int]) -> int:
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


def generate_leibniz(
    m: int,
    n: int,
    max_jacobiators: int = 1,
    max_jac_indegree: int | None = None,
    sink_orders: Iterable[Sequence[int]] | None = None,
) -> list[LeibnizGraph]:
    """All Leibniz graphs whose expansions have ``n`` internal vertices.

    Ordinary vertices carry no tadpoles or double edges; graphs are
    deduplicated up to relabeling, pair swaps and argument permutations,
    and graphs that are zero by symmetry are dropped.  ``sink_orders``
    keeps only graphs with the given sink in-degrees.
    """
    wanted = {tuple(o) for o in sink_orders} if sink_orders is not None else None
    out: list[LeibnizGraph] = []
    for ell in range(1, max_jacobiators + 1):
        d = n - 2 * ell
        if d < 0:
            break
        base = m + d
        top = base + ell
        pair_choices = []
        for j in range(d):
            me = m + j
            pair_choices.append([(a, b) for a, b in combinations(range(top), 2) if me not in (a, b)])
        jac_choices = []
        for i in range(ell):
            jac_choices.append([c for c in combinations(range(top), 3) if base + i not in c])
        seen: set = set()
        for pairs in product(*pair_choices):
            for jac in product(*jac_choices):
                L = LeibnizGraph(m, tuple(pairs), tuple(jac))
                if max_jac_indegree is not None and max(L.jacobiator_indegrees()) > max_jac_indegree:
                    continue
                if wanted is not None and L.sink_orders() not in wanted:
                    continue
                key, sign = _canonical_key(m, pairs, jac)
                if sign == 0 or key in seen:
                    continue
                seen.add(key)
                out.append(LeibnizGraph(m, key[0], key[1]))
    return out


def random_leibniz(rng: random.Random, m: int = 3, max_n: int = 4, max_jacobiators: int = 2) -> LeibnizGraph:
    """A uniformly drawn valid Leibniz graph (used for property tests)."""
    while True:
        n = rng.randint(2, max_n)
        ell = rng.randint(1, min(max_jacobiators, n // 2))
        d = n - 2 * ell
        base = m + d
        top = base + ell
        pairs = []
        for j in range(d):
            me = m + j
            pool = [t for t in range(top) if t != me]
            pairs.append(tuple(rng.sample(pool, 2)))
        jac = []
        for i in range(ell):
            pool = [t for t in range(top) if t != base + i]
            if len(pool) < 3:
                break
            jac.append(tuple(rng.sample(pool, 3)))
        else:
            return LeibnizGraph(m, tuple(pairs), tuple(jac))


@dataclass
class JacobiReduction:
    """Outcome of the factorization search at one power of the series."""

    power: int
    solved: bool
    leibniz: list[tuple[LeibnizGraph, str, CoeffExpr]]
    residual: GraphSum
    equations: GraphSum
    unknowns: dict[str, CoeffExpr]


def _coef_name(index: int, L: LeibnizGraph) -> str:
    return f"c_{L.ell}_{index}_{''.join(map(str, L.sink_orders()))}"


def _reduce_sum(
    k: int, S: GraphSum, max_jacobiators: int, max_jac_indegree: int | None, solve_unknowns: bool
) -> JacobiReduction:
    S = reduce_mod_skew(S)
    s_names = sorted({n for c, _ in S.terms for n in c.names()}, key=natural_key)
    if s_names and not solve_unknowns:
        raise ValueError("series has indeterminate coefficients; pass solve_unknowns to include them")
    orders = {differential_order(g) for _, g in S.terms}
    m = S.m
    candidates = generate_leibniz(m, k, max_jacobiators, max_jac_indegree, orders) if S.terms else []
    names = [_coef_name(i + 1, L) for i, L in enumerate(candidates)]
    diamond = GraphSum(m)
    for name, L in zip(names, candidates):
        diamond = diamond + expand(L).scale(CoeffExpr.var(name))
    eqs_sum = reduce_mod_skew(S - diamond)
    sol = solve(LinearSystem([c for c, _ in eqs_sum.terms], preferred_free=s_names), skip_inconsistent=True)
    bindings = {n: CoeffExpr(0) for n in names}
    bindings.update(sol.solved)
    # free unknowns are set to zero for a particular solution
    free_zero = {n: CoeffExpr(0) for n in sol.free if n not in s_names}
    resolved = {n: substitute(v, free_zero) for n, v in bindings.items()}
    residual = reduce_mod_skew(eqs_sum.map_coeffs(lambda c: substitute(c, resolved)))
    residual = GraphSum(m, tuple((c, g) for c, g in residual.terms if not c.is_zero()))
    used = [(L, n, resolved[n]) for n, L in zip(names, candidates) if not resolved[n].is_zero()]
    unknowns = {n: resolved[n] for n in s_names if n in resolved}
    return JacobiReduction(k, not sol.skipped and not residual.terms, used, residual, eqs_sum, unknowns)


def reduce_mod_jacobi(
    S: GraphSeries | GraphSum,
    max_jacobiators: int = 1,
    max_jac_indegree: int | None = None,
    solve_unknowns: bool = False,
) -> list[JacobiReduction]:
    """Search ``S_k = sum_i c_i expand(L_i)`` at every nonzero power ``k``.

    Candidates are Leibniz graphs whose sink orders occur in ``S_k``.  The
    linear system is solved exactly; unknowns left free are set to 0.
    Failure shows up as a nonempty residual, the part of ``S_k`` no
    combination of candidates reproduces.
    """
    parts = [(0, S)] if isinstance(S, GraphSum) else list(S.items())
    out = []
    for power, part in parts:
        if not reduce_mod_skew(part).terms:
            continue
        r = _reduce_sum(_vertex_count(part), part, max_jacobiators, max_jac_indegree, solve_unknowns)
        out.append(r if isinstance(S, GraphSum) else replace(r, power=power))
    return out


def _vertex_count(S: GraphSum) -> int:
    ns = {g.n for _, g in S.terms}
    if len(ns) > 1:
        raise ValueError("graph sum mixes vertex counts; pass a series")
    return ns.pop() if ns else 0


def format_reduction(r: JacobiReduction) -> str:
    """Equations block, blank line, then ``ENCODING  c_NAME==VALUE`` lines."""
    lines = [f"h^{r.power}:", write_sum(r.equations).rstrip("\n")]
    lines = [x for x in lines if x]
    lines.append("")
    for L, name, value in r.leibniz:
        lines.append(f"{encode_leibniz(L)}    {name}=={value}")
    for name, value in r.unknowns.items():
        lines.append(f"{name}=={value}")
    if not r.solved:
        lines.append("# no factorization found; residual:")
        lines.append(write_sum(r.residual).rstrip("\n"))
    return "\n".join(lines) + "\n"
