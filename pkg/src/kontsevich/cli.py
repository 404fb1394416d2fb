"""Command-line front end: one multiplexed program plus per-command aliases.

Every command reads the text formats of :mod:`kontsevich.graphseries`,
:mod:`kontsevich.coeffs` and :mod:`kontsevich.linsolve`; ``-`` stands for
standard input wherever a file name is expected.
"""

from __future__ import annotations

import argparse
import sys
from typing import Callable, Sequence

from . import __version__
from .coeffs import CoeffExpr, read_relations, read_substitutions
from .graphcore import decode, encode, generate
from .graphseries import (
    extract_coefficient,
    read_series,
    skew_symmetrize,
    substitute_relations,
    write_series,
)
from .leibniz import format_reduction, reduce_mod_jacobi
from .linsolve import Inconsistent, LinearSystem, solve, write_solution
from .poissoneval import catalog, format_evaluation, make_vanish
from .starproduct import (
    BasicWeightTable,
    associator,
    build_star_product,
    cyclic_weight_relations,
    gauge_transform,
)
from .weightnum import format_integrand, monte_carlo_weight

__all__ = ["main", "COMMANDS"]


class CommandError(Exception):
    """A user-facing failure: bad input, unreadable file, domain error."""


def _read_text(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.read()
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise CommandError(f"{path}: {exc.strerror or exc}") from None


def _load(path: str, reader: Callable, *args):
    text = _read_text(path)
    try:
        return reader(text, *args)
    except (ValueError, KeyError) as exc:
        raise CommandError(f"{path}: {exc}") from None


def _yes(value: str) -> bool:
    v = value.lower()
    if v in ("yes", "y", "true", "1"):
        return True
    if v in ("no", "n", "false", "0"):
        return False
    raise argparse.ArgumentTypeError(f"expected yes or no, got {value!r}")


def _write(text: str) -> None:
    sys.stdout.write(text)


def _cmd_generate_graphs(a: argparse.Namespace) -> None:
    basic = a.basic
    graphs = generate(
        a.n,
        a.m,
        normal_forms_only=a.normal_forms or basic,
        positive_differential_order=a.positive_differential_order or basic,
        prime_only=a.prime or basic,
        modulo_mirror_images=a.modulo_mirror_images or basic,
        max_internal_indegree=a.max_internal_indegree,
    )
    out = []
    i = 0
    for g in graphs:
        if not a.zero and g.sign == 0:
            continue
        if a.with_coefficients:
            if g.sign == 0:
                out.append(f"{encode(g)}    0\n")
            else:
                i += 1
                out.append(f"{encode(g)}    w_{a.n}_{i}\n")
        else:
            out.append(encode(g) + "\n")
    _write("".join(out))


def _cmd_reduce_mod_skew(a: argparse.Namespace) -> None:
    s = _load(a.file, read_series)
    _write(write_series(s.reduced(), a.print_differential_orders))


def _cmd_skew_symmetrize(a: argparse.Namespace) -> None:
    s = _load(a.file, read_series)
    _write(write_series(skew_symmetrize(s)))


def _cmd_star_product(a: argparse.Namespace) -> None:
    s = _load(a.file, read_series)
    try:
        table = BasicWeightTable.from_series(s)
        star = build_star_product(table, s.precision, strict=a.strict)
    except (ValueError, KeyError) as exc:
        raise CommandError(f"{a.file}: {exc}") from None
    _write(write_series(star))


def _cmd_associator(a: argparse.Namespace) -> None:
    s = _load(a.file, read_series)
    try:
        out = associator(s)
    except ValueError as exc:
        raise CommandError(f"{a.file}: {exc}") from None
    _write(write_series(out, print_differential_orders=True))


def _cmd_cyclic(a: argparse.Namespace) -> None:
    s = _load(a.file, read_series)
    _write("".join(f"{e}==0\n" for e in cyclic_weight_relations(s)))


def _structure(name: str):
    try:
        return catalog(name)
    except KeyError as exc:
        raise CommandError(str(exc.args[0])) from None


def _cmd_poisson_evaluate(a: argparse.Namespace) -> None:
    s = _load(a.file, read_series)
    P = _structure(a.structure)
    try:
        _write(format_evaluation(s, P))
    except ValueError as exc:
        raise CommandError(f"{a.file}: {exc}") from None


def _parse_orders(text: str | None) -> list[tuple[int, ...]] | None:
    if not text:
        return None
    try:
        return [tuple(int(x) for x in part.split(",")) for part in text.split(";") if part.strip()]
    except ValueError:
        raise CommandError(f"bad --orders value {text!r}; expected e.g. '1,3,2;2,2,2'") from None


def _emit_solution(eqs: list[CoeffExpr], preferred: Sequence[str]) -> None:
    sol = solve(LinearSystem(eqs, preferred_free=list(preferred)))
    if isinstance(sol, Inconsistent):
        combo = " + ".join(f"({q})*eq{i + 1}" for i, q in sorted(sol.witness.items()))
        raise CommandError(f"inconsistent system: {combo} = {sol.residual}")
    _write(write_solution(sol))


def _cmd_poisson_make_vanish(a: argparse.Namespace) -> None:
    s = _load(a.file, read_series)
    P = _structure(a.structure)
    powers = [int(x) for x in a.powers.split(",")] if a.powers else None
    try:
        eqs = make_vanish(s, P, powers=powers, orders=_parse_orders(a.orders))
    except ValueError as exc:
        raise CommandError(f"{a.file}: {exc}") from None
    if a.linear_solve:
        _emit_solution(eqs, [])
    else:
        _write("".join(f"{e}==0\n" for e in eqs))


def _cmd_substitute(a: argparse.Namespace) -> None:
    s = _load(a.file, read_series)
    subs = _load(a.substitutions, read_substitutions)
    _write(write_series(substitute_relations(s, subs)))


def _cmd_extract(a: argparse.Namespace) -> None:
    s = _load(a.file, read_series)
    _write(write_series(extract_coefficient(s, a.expression).reduced()))


def _cmd_gauge(a: argparse.Namespace) -> None:
    star = _load(a.star, read_series)
    t = _load(a.gauge, read_series)
    try:
        _write(write_series(gauge_transform(star, t)))
    except ValueError as exc:
        raise CommandError(str(exc)) from None


def _cmd_reduce_mod_jacobi(a: argparse.Namespace) -> None:
    s = _load(a.file, read_series)
    try:
        results = reduce_mod_jacobi(s, a.max_jacobiators, a.max_jac_indegree, solve_unknowns=a.solve)
    except ValueError as exc:
        raise CommandError(f"{a.file}: {exc}") from None
    _write("".join(format_reduction(r) for r in results))
    if any(not r.solved for r in results):
        raise CommandError("no factorization found; see the residual above")


def _cmd_weight_integrands(a: argparse.Namespace) -> None:
    s = _load(a.file, read_series)
    out = []
    for _, part in s.items():
        for c, g in part.terms:
            if g.n == 0:
                continue
            if g.m != 2:
                raise CommandError(f"{a.file}: weight integrands need two sinks")
            out.append(format_integrand(g, str(c)))
    _write("".join(out))


def _cmd_linsolve(a: argparse.Namespace) -> None:
    eqs = _load(a.file, read_relations)
    preferred = [x for x in (a.prefer or "").split(",") if x]
    _emit_solution(eqs, preferred)


def _cmd_monte_carlo(a: argparse.Namespace) -> None:
    try:
        g = decode(a.graph)
        est, se = monte_carlo_weight(g, a.samples, a.seed)
    except ValueError as exc:
        raise CommandError(str(exc)) from None
    _write(f"{est:.10g} {se:.3g}\n")


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kontsevich", description="Kontsevich graph calculus tools.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate_graphs", help="enumerate Kontsevich graphs")
    g.add_argument("n", type=int)
    g.add_argument("m", type=int, nargs="?", default=2)
    for flag, default in (
        ("--normal-forms", False),
        ("--basic", False),
        ("--with-coefficients", False),
        ("--prime", False),
        ("--positive-differential-order", False),
        ("--modulo-mirror-images", False),
        ("--zero", True),
    ):
        g.add_argument(flag, type=_yes, default=default, metavar="yes|no")
    g.add_argument("--max-internal-indegree", type=int, default=None)
    g.set_defaults(func=_cmd_generate_graphs)

    r = sub.add_parser("reduce_mod_skew", help="reduce a series modulo skew symmetry")
    r.add_argument("file")
    r.add_argument("--print-differential-orders", action="store_true")
    r.set_defaults(func=_cmd_reduce_mod_skew)

    k = sub.add_parser("skew_symmetrize", help="signed sum over sink permutations")
    k.add_argument("file")
    k.set_defaults(func=_cmd_skew_symmetrize)

    sp = sub.add_parser("star_product", help="star product from basic-set weights")
    sp.add_argument("file")
    sp.add_argument("--strict", action="store_true", help="fail on basic graphs missing from the input")
    sp.set_defaults(func=_cmd_star_product)

    sa = sub.add_parser("star_product_associator", help="associator of a star product")
    sa.add_argument("file")
    sa.set_defaults(func=_cmd_associator)

    cw = sub.add_parser("cyclic_weight_relations", help="cyclic relations between weights")
    cw.add_argument("file")
    cw.set_defaults(func=_cmd_cyclic)

    pe = sub.add_parser("poisson_evaluate", help="evaluate a series at a Poisson structure")
    pe.add_argument("file")
    pe.add_argument("structure")
    pe.set_defaults(func=_cmd_poisson_evaluate)

    pm = sub.add_parser("poisson_make_vanish", help="relations making a series vanish at a structure")
    pm.add_argument("file")
    pm.add_argument("structure")
    pm.add_argument("--linear-solve", action="store_true")
    pm.add_argument("--orders", help="sink differential orders, e.g. '1,3,2;2,2,2'")
    pm.add_argument("--powers", help="comma-separated powers of h to use")
    pm.set_defaults(func=_cmd_poisson_make_vanish)

    sr = sub.add_parser("substitute_relations", help="apply NAME==EXPR substitutions")
    sr.add_argument("file")
    sr.add_argument("substitutions")
    sr.set_defaults(func=_cmd_substitute)

    ec = sub.add_parser("extract_coefficient", help="coefficient of a name (or '1') in every term")
    ec.add_argument("file")
    ec.add_argument("expression")
    ec.set_defaults(func=_cmd_extract)

    ga = sub.add_parser("gauge", help="apply a gauge transformation to a star product")
    ga.add_argument("star")
    ga.add_argument("gauge")
    ga.set_defaults(func=_cmd_gauge)

    rj = sub.add_parser("reduce_mod_jacobi", help="factor a series through the Jacobiator")
    rj.add_argument("file")
    rj.add_argument("max_jacobiators", type=int, nargs="?", default=1)
    rj.add_argument("max_jac_indegree", type=int, nargs="?", default=None)
    rj.add_argument("--solve", action="store_true", help="treat the series' indeterminates as unknowns")
    rj.set_defaults(func=_cmd_reduce_mod_jacobi)

    wi = sub.add_parser("weight_integrands", help="Jacobian determinant integrands")
    wi.add_argument("file")
    wi.set_defaults(func=_cmd_weight_integrands)

    ls = sub.add_parser("linsolve", help="solve EXPR==0 relations exactly")
    ls.add_argument("file")
    ls.add_argument("--prefer", help="comma-separated names to keep free when possible")
    ls.set_defaults(func=_cmd_linsolve)

    mc = sub.add_parser("monte_carlo_weight", help="Monte Carlo estimate of a weight")
    mc.add_argument("graph", help='graph encoding, e.g. "2 1 1 0 1"')
    mc.add_argument("--samples", type=int, default=100_000)
    mc.add_argument("--seed", type=int, default=0)
    mc.set_defaults(func=_cmd_monte_carlo)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(list(sys.argv[1:] if argv is None else argv))
    try:
        args.func(args)
    except CommandError as exc:
        sys.stdout.flush()
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except BrokenPipeError:
        return 0
    return 0


def _alias(name: str) -> Callable[[], int]:
    def run() -> int:
        return main([name, *sys.argv[1:]])

    run.__name__ = name
    return run


COMMANDS = (
    "generate_graphs",
    "reduce_mod_skew",
    "skew_symmetrize",
    "star_product",
    "star_product_associator",
    "cyclic_weight_relations",
    "poisson_evaluate",
    "poisson_make_vanish",
    "substitute_relations",
    "extract_coefficient",
    "gauge",
    "reduce_mod_jacobi",
    "weight_integrands",
    "linsolve",
    "monte_carlo_weight",
)

generate_graphs = _alias("generate_graphs")
reduce_mod_skew_cmd = _alias("reduce_mod_skew")
skew_symmetrize_cmd = _alias("skew_symmetrize")
star_product = _alias("star_product")
star_product_associator = _alias("star_product_associator")
cyclic_weight_relations_cmd = _alias("cyclic_weight_relations")
poisson_evaluate = _alias("poisson_evaluate")
poisson_make_vanish = _alias("poisson_make_vanish")
substitute_relations_cmd = _alias("substitute_relations")
extract_coefficient_cmd = _alias("extract_coefficient")
gauge = _alias("gauge")
reduce_mod_jacobi_cmd = _alias("reduce_mod_jacobi")
weight_integrands = _alias("weight_integrands")
linsolve = _alias("linsolve")
monte_carlo_weight_cmd = _alias("monte_carlo_weight")

if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
