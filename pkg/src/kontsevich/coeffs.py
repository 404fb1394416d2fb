"""Exact affine coefficient expressions over the rationals.

A coefficient is ``constant + sum(q_i * name_i)`` with rational ``q_i``.  This is
the only coefficient algebra the graph calculus needs: star-product weights,
gauge parameters and Leibniz-graph multipliers all enter linearly.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Union

Number = Union[int, Fraction]

__all__ = [
    "CoeffExpr",
    "CoeffParseError",
    "NonlinearError",
    "parse_coeff",
    "parse_relation",
    "parse_substitution",
    "read_substitutions",
    "read_relations",
    "substitute",
    "coefficient_of",
    "format_rational",
    "sum_exprs",
    "ZERO",
    "ONE",
]


class CoeffParseError(ValueError):
    """Raised when a coefficient string does not match the grammar."""


class NonlinearError(ValueError):
    """Raised when an operation would leave the affine class."""


def format_rational(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


class CoeffExpr:
    """Immutable affine expression ``constant + sum(coef * name)``."""

    __slots__ = ("_const", "_terms", "_hash")

    def __init__(self, constant: Number = 0, terms: Mapping[str, Number] | None = None):
        self._const = Fraction(constant)
        items: dict[str, Fraction] = {}
        if terms:
            for name, c in terms.items():
                c = Fraction(c)
                if c:
                    items[name] = c
        self._terms = tuple(sorted(items.items()))
        self._hash: int | None = None

    @classmethod
    def _raw(cls, constant: Fraction, terms: tuple[tuple[str, Fraction], ...]) -> "CoeffExpr":
        obj = object.__new__(cls)
        obj._const = constant
        obj._terms = terms
        obj._hash = None
        return obj

    @classmethod
    def var(cls, name: str, coef: Number = 1) -> "CoeffExpr":
        return cls(0, {name: coef})

    @classmethod
    def coerce(cls, x: "CoeffExpr | Number | str") -> "CoeffExpr":
        if isinstance(x, CoeffExpr):
            return x
        if isinstance(x, str):
            return parse_coeff(x)
        return cls._raw(Fraction(x), ())

    @property
    def constant(self) -> Fraction:
        return self._const

    @property
    def terms(self) -> dict[str, Fraction]:
        return dict(self._terms)

    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self._terms)

    def items(self) -> Iterator[tuple[str, Fraction]]:
        return iter(self._terms)

    def is_constant(self) -> bool:
        return not self._terms

    def is_zero(self) -> bool:
        return not self._terms and self._const == 0

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            return not self._terms and self._const == other
        if not isinstance(other, CoeffExpr):
            return NotImplemented
        return self._const == other._const and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._const, self._terms))
        return self._hash

    def __neg__(self) -> "CoeffExpr":
        return CoeffExpr._raw(-self._const, tuple((n, -c) for n, c in self._terms))

    def __add__(self, other: "CoeffExpr | Number") -> "CoeffExpr":
        if isinstance(other, (int, Fraction)):
            return CoeffExpr._raw(self._const + other, self._terms)
        if not isinstance(other, CoeffExpr):
            return NotImplemented
        if not other._terms:
            return CoeffExpr._raw(self._const + other._const, self._terms)
        if not self._terms:
            return CoeffExpr._raw(self._const + other._const, other._terms)
        acc = dict(self._terms)
        for n, c in other._terms:
            v = acc.get(n, 0) + c
            if v:
                acc[n] = v
            else:
                acc.pop(n, None)
        return CoeffExpr._raw(self._const + other._const, tuple(sorted(acc.items())))

    __radd__ = __add__

    def __sub__(self, other: "CoeffExpr | Number") -> "CoeffExpr":
        if isinstance(other, (int, Fraction)):
            return CoeffExpr._raw(self._const - other, self._terms)
        if not isinstance(other, CoeffExpr):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: Number) -> "CoeffExpr":
        return (-self) + other

    def scale(self, q: Number) -> "CoeffExpr":
        q = Fraction(q)
        if q == 0:
            return ZERO
        if q == 1:
            return self
        return CoeffExpr._raw(self._const * q, tuple((n, c * q) for n, c in self._terms))

    def __mul__(self, other: "CoeffExpr | Number") -> "CoeffExpr":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, CoeffExpr):
            return NotImplemented
        if not other._terms:
            return self.scale(other._const)
        if not self._terms:
            return other.scale(self._const)
        raise NonlinearError(f"product of non-constant expressions ({self}) * ({other})")

    __rmul__ = __mul__

    def __truediv__(self, q: Number) -> "CoeffExpr":
        return self.scale(1 / Fraction(q))

    def __repr__(self) -> str:
        return f"CoeffExpr({str(self)!r})"

    def __str__(self) -> str:
        parts: list[str] = []
        for name, c in self._terms:
            if c == 1:
                s = name
            elif c == -1:
                s = "-" + name
            else:
                s = f"{format_rational(c)}*{name}"
            if parts and not s.startswith("-"):
                s = "+" + s
            parts.append(s)
        if self._const or not parts:
            s = format_rational(self._const)
            if parts and not s.startswith("-"):
                s = "+" + s
            parts.append(s)
        return "".join(parts)


ZERO = CoeffExpr()
ONE = CoeffExpr(1)

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|([-+*/])|(\S))")


def _tokenize(text: str) -> list[tuple[str, str]]:
    toks: list[tuple[str, str]] = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # pragma: no cover - regex always matches non-empty rest
            break
        pos = m.end()
        num, ident, op, bad = m.groups()
        if num is not None:
            toks.append(("int", num))
        elif ident is not None:
            toks.append(("id", ident))
        elif op is not None:
            toks.append(("op", op))
        elif bad == ".":
            raise CoeffParseError(f"floating-point literal not allowed: {text!r}")
        else:
            raise CoeffParseError(f"unexpected character {bad!r} in {text!r}")
    # "1e5" tokenizes as int followed by identifier: reject explicitly
    for a, b in zip(toks, toks[1:]):
        if a[0] == "int" and b[0] in ("id", "int"):
            raise CoeffParseError(f"malformed number in {text!r}")
    return toks


def parse_coeff(text: str) -> CoeffExpr:
    """Parse an affine expression.

    ``EXPR := TERM (('+'|'-') TERM)*`` and
    ``TERM := [sign] FACTOR (('*' FACTOR) | ('/' INTEGER))*`` with
    ``FACTOR := INTEGER | IDENT``; at most one IDENT per term.
    """
    toks = _tokenize(text)
    if not toks:
        raise CoeffParseError("empty coefficient")
    pos = 0

    def peek() -> tuple[str, str] | None:
        return toks[pos] if pos < len(toks) else None

    def term(sign: int) -> CoeffExpr:
        nonlocal pos
        while peek() is not None and peek()[0] == "op" and peek()[1] in "+-":
            if peek()[1] == "-":
                sign = -sign
            pos += 1
        q = Fraction(sign)
        name: str | None = None
        while True:
            tok = peek()
            if tok is None or tok[0] == "op":
                raise CoeffParseError(f"expected number or name in {text!r}")
            pos += 1
            if tok[0] == "int":
                q *= int(tok[1])
            else:
                if name is not None:
                    raise NonlinearError(f"two indeterminates in one term of {text!r}")
                name = tok[1]
            while peek() == ("op", "/"):
                pos += 1
                tok = peek()
                if tok is None or tok[0] != "int":
                    raise CoeffParseError(f"expected integer denominator in {text!r}")
                pos += 1
                d = int(tok[1])
                if d == 0:
                    raise ZeroDivisionError(f"division by zero in {text!r}")
                q /= d
            if peek() == ("op", "*"):
                pos += 1
                continue
            break
        if name is None:
            return CoeffExpr(q)
        return CoeffExpr(0, {name: q})

    result = term(1)
    while pos < len(toks):
        tok = toks[pos]
        if tok[0] != "op" or tok[1] not in "+-":
            raise CoeffParseError(f"unexpected token {tok[1]!r} in {text!r}")
        pos += 1
        result = result + term(1 if tok[1] == "+" else -1)
    return result


def substitute(e: CoeffExpr, bindings: Mapping[str, CoeffExpr]) -> CoeffExpr:
    """Replace every bound indeterminate by its image; unbound names pass through."""
    if not any(n in bindings for n, _ in e.items()):
        return e
    out = CoeffExpr(e.constant)
    rest: dict[str, Fraction] = {}
    for n, c in e.items():
        b = bindings.get(n)
        if b is None:
            rest[n] = c
        else:
            out = out + CoeffExpr.coerce(b).scale(c)
    return out + CoeffExpr(0, rest)


def coefficient_of(e: CoeffExpr, target: str) -> Fraction:
    """Coefficient of ``target`` in ``e``; the target ``"1"`` selects the constant."""
    if target.strip() == "1":
        return e.constant
    return e.terms.get(target.strip(), Fraction(0))


def parse_relation(line: str) -> CoeffExpr:
    """Parse ``LHS==RHS`` into the affine expression ``LHS - RHS``."""
    if "==" not in line:
        raise CoeffParseError(f"relation without '==': {line!r}")
    lhs, rhs = line.split("==", 1)
    return parse_coeff(lhs) - parse_coeff(rhs)


def parse_substitution(line: str) -> tuple[str, CoeffExpr]:
    if "==" not in line:
        raise CoeffParseError(f"substitution without '==': {line!r}")
    lhs, rhs = line.split("==", 1)
    name = lhs.strip()
    if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
        raise CoeffParseError(f"left side of substitution must be a name: {line!r}")
    return name, parse_coeff(rhs)


def _content_lines(text: str) -> Iterator[tuple[int, str]]:
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield lineno, line


def read_substitutions(text: str) -> dict[str, CoeffExpr]:
    out: dict[str, CoeffExpr] = {}
    for lineno, line in _content_lines(text):
        try:
            name, expr = parse_substitution(line)
        except ValueError as exc:
            raise CoeffParseError(f"line {lineno}: {exc}") from None
        out[name] = expr
    return out


def read_relations(text: str) -> list[CoeffExpr]:
    out: list[CoeffExpr] = []
    for lineno, line in _content_lines(text):
        try:
            out.append(parse_relation(line))
        except ValueError as exc:
            raise CoeffParseError(f"line {lineno}: {exc}") from None
    return out


def sum_exprs(exprs: Iterable[CoeffExpr]) -> CoeffExpr:
    acc_c = Fraction(0)
    acc: dict[str, Fraction] = {}
    for e in exprs:
        acc_c += e.constant
        for n, c in e.items():
            acc[n] = acc.get(n, 0) + c
    return CoeffExpr(acc_c, acc)
