"""Exact solver for affine systems over the rationals in named unknowns."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Mapping, Sequence

from .coeffs import CoeffExpr, read_relations, read_substitutions, substitute

__all__ = [
    "LinearSystem",
    "Solution",
    "Inconsistent",
    "solve",
    "verify_solution",
    "natural_key",
    "write_solution",
    "read_solution",
    "read_system",
]


def natural_key(name: str) -> tuple:
    """Order ``w_4_9`` before ``w_4_10``: digit runs compare numerically."""
    return tuple(int(p) if p.isdigit() else p for p in re.split(r"(\d+)", name))


@dataclass
class LinearSystem:
    equations: list[CoeffExpr]
    unknowns: list[str] | None = None
    preferred_free: list[str] = field(default_factory=list)

    def ordered_unknowns(self) -> list[str]:
        mentioned = {n for e in self.equations for n in e.names()}
        if self.unknowns is None:
            return sorted(mentioned, key=natural_key)
        extra = sorted(mentioned - set(self.unknowns), key=natural_key)
        return list(self.unknowns) + extra


@dataclass
class Solution:
    solved: dict[str, CoeffExpr]
    free: list[str]
    skipped: list[int] = field(default_factory=list)
    consistent = True

    def bindings(self) -> dict[str, CoeffExpr]:
        return dict(self.solved)


@dataclass
class Inconsistent:
    """``sum(witness[i] * equations[i])`` is the nonzero constant ``residual``."""

    witness: dict[int, Fraction]
    residual: Fraction
    consistent = False


# A row is (coefficients by unknown index, constant) with integer entries.
Row = tuple[dict[int, int], int]


def _integer_row(e: CoeffExpr, index: Mapping[str, int]) -> tuple[Row, int]:
    den = e.constant.denominator
    for _, c in e.items():
        den = lcm(den, c.denominator)
    coeffs = {index[n]: int(c * den) for n, c in e.items()}
    return (coeffs, int(e.constant * den)), den


def _content(row: Row) -> int:
    coeffs, const = row
    g = abs(const)
    for v in coeffs.values():
        g = gcd(g, v)
        if g == 1:
            return 1
    return g


def _normalize(row: Row) -> tuple[Row, int]:
    coeffs, const = row
    g = _content(row)
    if g > 1:
        return ({k: v // g for k, v in coeffs.items()}, const // g), g
    return row, 1


def _combine(target: Row, pivot: Row, var: int) -> tuple[Row, int, int]:
    """``b*target - a*pivot`` where ``a, b`` are the coefficients of ``var``."""
    a = target[0][var]
    b = pivot[0][var]
    g = gcd(a, b)
    a //= g
    b //= g
    out = {k: v * b for k, v in target[0].items()}
    for k, v in pivot[0].items():
        s = out.get(k, 0) - a * v
        if s:
            out[k] = s
        else:
            out.pop(k, None)
    return (out, target[1] * b - pivot[1] * a), b, a


def _choose_pivot(coeffs: Mapping[int, int], preferred: set[int]) -> int:
    plain = [k for k in coeffs if k not in preferred]
    return max(plain) if plain else max(coeffs)


def solve(sys: LinearSystem, track: bool = False, skip_inconsistent: bool = False) -> Solution | Inconsistent:
    """Gauss-Jordan elimination on integer rows with content normalization.

    Each incoming equation is reduced by the existing pivots and pivots on
    its latest non-preferred unknown (latest preferred one if no other is
    left).  Deterministic in the equation order, unknown order and preferred
    set.  With ``skip_inconsistent`` equations that contradict the earlier
    ones are recorded in ``Solution.skipped`` instead of failing.
    """
    names = sys.ordered_unknowns()
    index = {n: i for i, n in enumerate(names)}
    preferred = {index[n] for n in sys.preferred_free if n in index}
    pivots: dict[int, Row] = {}
    combos: dict[int, dict[int, Fraction]] = {}
    skipped: list[int] = []
    for eq_no, eq in enumerate(sys.equations):
        row, den = _integer_row(eq, index)
        combo = {eq_no: Fraction(den)} if track else {}
        # pivot rows are fully reduced, so one pass clears every pivot column
        for var in [k for k in row[0] if k in pivots]:
            row, mul_t, mul_p = _combine(row, pivots[var], var)
            if track:
                combo = {k: v * mul_t for k, v in combo.items()}
                for k, v in combos[var].items():
                    combo[k] = combo.get(k, 0) - v * mul_p
        row, g = _normalize(row)
        if track and g > 1:
            combo = {k: v / g for k, v in combo.items()}
        if not row[0]:
            if row[1]:
                if skip_inconsistent:
                    skipped.append(eq_no)
                    continue
                if not track:
                    return solve(sys, track=True)
                return Inconsistent({k: v for k, v in combo.items() if v}, Fraction(row[1]))
            continue
        var = _choose_pivot(row[0], preferred)
        for other in list(pivots):
            prow = pivots[other]
            if var in prow[0]:
                new, mul_t, mul_p = _combine(prow, row, var)
                new, g2 = _normalize(new)
                pivots[other] = new
                if track:
                    oc = {k: v * mul_t for k, v in combos[other].items()}
                    for k, v in combo.items():
                        oc[k] = oc.get(k, 0) - v * mul_p
                    combos[other] = {k: v / g2 for k, v in oc.items()}
        pivots[var] = row
        if track:
            combos[var] = combo
    solved: dict[str, CoeffExpr] = {}
    for var in sorted(pivots):
        coeffs, const = pivots[var]
        b = coeffs[var]
        rest = {names[k]: Fraction(-v, b) for k, v in coeffs.items() if k != var}
        solved[names[var]] = CoeffExpr(Fraction(-const, b), rest)
    mentioned = {n for e in sys.equations for n in e.names()}
    free = [n for n in names if n in mentioned and n not in solved]
    return Solution(solved, free, skipped)


def verify_solution(sys: LinearSystem | Iterable[CoeffExpr], bindings: Mapping[str, CoeffExpr]) -> bool:
    """True when every equation becomes exactly 0 after substitution."""
    eqs = sys.equations if isinstance(sys, LinearSystem) else list(sys)
    return all(substitute(e, bindings).is_zero() for e in eqs)


def write_solution(sol: Solution, order: Sequence[str] | None = None) -> str:
    keys = list(order) if order is not None else sorted(sol.solved, key=natural_key)
    return "".join(f"{k}=={sol.solved[k]}\n" for k in keys if k in sol.solved)


def read_solution(text: str) -> dict[str, CoeffExpr]:
    return read_substitutions(text)


def read_system(text: str, preferred_free: Sequence[str] = ()) -> LinearSystem:
    return LinearSystem(read_relations(text), None, list(preferred_free))
