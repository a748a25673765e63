"""Command-line interface.

Every subcommand wraps one library operation and prints JSON (keys sorted,
rationals as ``"num/den"`` strings with a float duplicate) or CSV.  Exit
status: 0 on success, 1 on computation failure (e.g. the stage cap is too
low), 2 on invalid arguments.
"""

from __future__ import annotations

import argparse
import ast
import csv
import io
import json
import re
import sys
from fractions import Fraction
from typing import Sequence

from . import arith, flow, fock, similarity, spectral, tower
from .errors import SelfSimError, StageCapExceeded
from .tower import LevelSet, SelfSimilarParams

CSV_HELP = """CSV columns:
  corr      n, numerator, denominator, float
  spectrum  g, theta, density
  pisot     n, dist
"""


class UsageError(Exception):
    """Bad command-line input; reported with exit status 2."""


def rat(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def rat_field(x) -> dict:
    return {"value": rat(x), "float": float(x)}


def parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}") from exc


_SET_RE = re.compile(r"^level:(\d+):(\d+(?:,\d+)*)$")


def parse_level_set(text: str) -> LevelSet:
    """``level:<stage>:<i>[,<i>...]``."""
    m = _SET_RE.match(text.strip())
    if not m:
        raise argparse.ArgumentTypeError(f"set literal must look like level:<stage>:<i>[,<i>...], got {text!r}")
    return LevelSet(int(m.group(1)), [int(v) for v in m.group(2).split(",")])


def parse_interval_set(text: str) -> flow.RectSet:
    """``rect:<stage>:<a>-<b>[,<a>-<b>...]`` with rational endpoints."""
    try:
        kind, stage, body = text.split(":", 2)
        if kind != "rect":
            raise ValueError
        intervals = []
        for part in body.split(","):
            a, b = part.split("-")
            intervals.append((Fraction(a), Fraction(b)))
        return flow.RectSet(int(stage), intervals)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"set literal must look like rect:<stage>:<a>-<b>[,<a>-<b>...], got {text!r}"
        ) from exc


def params_from_args(args) -> SelfSimilarParams:
    if args.p is not None:
        if args.r is not None or args.s is not None:
            raise UsageError("give either --p or --r/--s, not both")
        return SelfSimilarParams.hp(args.h, args.p)
    if args.r is None or args.s is None:
        raise UsageError("need --p, or both --r and --s")
    return SelfSimilarParams(args.h, args.r, tuple(args.s))


def emit(args, payload=None, rows=None, header=None) -> None:
    out = io.StringIO()
    if getattr(args, "format", "json") == "csv" and rows is not None:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    else:
        json.dump(payload, out, sort_keys=True, indent=2)
        out.write("\n")
    text = out.getvalue()
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def level_set_json(A: LevelSet) -> dict:
    return {"stage": A.stage, "indices": list(A.indices)}


# --- subcommands -----------------------------------------------------------


def cmd_build(args) -> None:
    params = params_from_args(args)
    layout = tower.build_stage(params, args.stage)
    emit(args, {
        "stage": layout.j,
        "height": layout.height,
        "width": rat(layout.width),
        "width_float": float(layout.width),
        "q": params.q,
        "column_offsets": list(layout.column_offsets),
        "column_ranges": [list(r) for r in layout.column_ranges],
        "spacer_ranges": [list(r) for r in layout.spacer_ranges],
    })


def _sets(args):
    A = args.set_a.validate(args.params)
    B = (args.set_b or args.set_a).validate(args.params)
    return A, B


def cmd_corr(args) -> None:
    args.params = params_from_args(args)
    A, B = _sets(args)
    seq = spectral.correlation_sequence(args.params, A, B, args.n_max, args.max_stage)
    payload = {
        "set_a": level_set_json(A),
        "set_b": level_set_json(B),
        "values": [{"n": n, **rat_field(v)} for n, v in enumerate(seq.values)],
    }
    emit(args, payload, rows=seq.rows(), header=["n", "numerator", "denominator", "float"])


def _scan_pairs(args, params):
    pairs = []
    for text in args.pair or ():
        a, _, b = text.partition("/")
        pairs.append((parse_level_set(a).validate(params), parse_level_set(b or a).validate(params)))
    if args.stage_levels:
        K = args.stage_levels
        levels = [LevelSet(K, (i,)) for i in range(tower.height(params, K))]
        pairs.extend((A, B) for A in levels for B in levels)
    if not pairs:
        raise UsageError("give --pair and/or --stage-levels")
    return pairs


def cmd_scan(args) -> None:
    params = params_from_args(args)
    pairs = _scan_pairs(args, params)
    hits = spectral.weak_limit_scan(
        params, pairs, args.times, args.m_max, range(args.q_min, args.q_max + 1),
        args.max_stage, args.jobs,
    )
    emit(args, {
        "pairs": [[level_set_json(A), level_set_json(B)] for A, B in pairs],
        "hits": [
            {
                "time": h.time,
                "m": h.m,
                "q": h.q,
                "coefficient": rat(h.coefficient),
                "residual": rat_field(h.residual),
                "exact_pairs": h.exact_pairs,
                "pair_residuals": [rat(r) for r in h.pair_residuals],
            }
            for h in hits
        ],
    })


def _density(args):
    params = params_from_args(args)
    A = args.set_a.validate(params)
    seq = spectral.correlation_sequence(params, A, A, args.n_max, args.max_stage)
    return params, spectral.fejer_density(seq, args.grid)


def cmd_spectrum(args) -> None:
    _, dens = _density(args)
    thetas = dens.thetas
    payload = {
        "grid": dens.G,
        "order": dens.N,
        "min": float(dens.samples.min()),
        "max": float(dens.samples.max()),
        "total_mass": dens.total_mass(),
        "riemann_mass": dens.riemann_mass(),
        "samples": [float(v) for v in dens.samples],
    }
    rows = ((g, repr(float(thetas[g])), repr(float(v))) for g, v in enumerate(dens.samples))
    emit(args, payload, rows=rows, header=["g", "theta", "density"])


def cmd_qinv(args) -> None:
    params, dens = _density(args)
    p = args.rot_p or params.p or params.q
    floor = args.floor_frac * float(dens.samples.max())
    report = spectral.quasi_invariance_report(dens, p, args.n_rot, floor)
    emit(args, report.to_dict())


def cmd_check(args) -> None:
    params = params_from_args(args)
    rep = similarity.conjugacy_check(params, args.stage)
    emit(args, {
        "stage": rep.J,
        "checks_attempted": rep.checks_attempted,
        "checks_passed": rep.checks_passed,
        "first_failure": rep.first_failure,
    })


def cmd_components(args) -> None:
    params = params_from_args(args)
    if args.level is not None:
        emit(args, {
            "stage": args.stage,
            "level": args.level,
            "component": similarity.component_of(params, args.level, args.stage),
        })
        return
    bound = params.p * tower.width(params, args.stage)
    classes = []
    for k, C in enumerate(similarity.component_classes(params, args.stage)):
        defect = similarity.invariance_defect(params, C, params.p)
        classes.append({"component": k, "measure": rat(C.measure(params)), "defect": rat_field(defect)})
    emit(args, {"stage": args.stage, "boundary_bound": rat(bound), "classes": classes})


def cmd_flow(args) -> None:
    q = args.q
    if args.flow_cmd == "corr":
        A = args.set_a or flow.rectangle()
        B = args.set_b or A
        values = [{"t": rat(t), **rat_field(flow.flow_correlation(q, A, B, t, args.max_stage))} for t in args.t]
        emit(args, {"q": rat(q), "correlations": values})
    else:
        samples = flow.sample_points(q, args.stage, args.samples, args.seed)
        reports = []
        for t in args.t:
            rep = flow.flow_conjugacy_check(q, t, samples, args.max_stage)
            reports.append({"t": rat(t), "attempted": rep.attempted, "passed": rep.passed,
                            "first_failure": rep.first_failure})
        emit(args, {"q": rat(q), "checks": reports})


def cmd_times(args) -> None:
    res = arith.weak_limit_times(args.q, args.p, args.i_max)
    entries = []
    for e in res.entries:
        item = {"i": e.i, "n": e.n, "s": e.s}
        if e.k:
            item["reduced"] = {"k": e.k, "i": e.i_red, "n": e.n_red, "s": e.s_red}
        entries.append(item)
    emit(args, {"q": res.q, "p": res.p, "entries": entries,
                "triples": [list(e.as_tuple()) for e in res.entries]})


def cmd_collide(args) -> None:
    rep = arith.intersection_finite(args.m, args.n, args.s, args.p, args.bound)
    emit(args, {"bound": rep.bound, "collisions": [list(c) for c in rep.collisions], "stable": rep.stable})


def cmd_pisot(args) -> None:
    spec = arith.pisot_spec(args.poly)
    dist = arith.pisot_distance(spec, args.n_max)
    traces = spec.traces(args.n_max)
    payload = {
        "poly": list(spec.coefficients),
        "root": spec.root,
        "rows": [{"n": n, "dist": d, "trace": traces[n]} for n, d in dist],
    }
    emit(args, payload, rows=([n, repr(d)] for n, d in dist), header=["n", "dist"])


_CYCLIC = re.compile(r"^C(\d+)$")


def eval_fock(text: str) -> fock.RotationMultiset:
    """Evaluate ``exp(2*C5 + 3*C7, D=3)``-style expressions.

    ``Ck`` is the cyclic spectrum of order ``k``; ``+`` is the direct sum,
    ``m*X`` takes ``m`` copies, ``X*Y`` the tensor product; ``exp(X, D=..)``
    and ``sym(X, d=..)`` are the truncated exponential and symmetric power.
    """
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise UsageError(f"cannot parse expression: {exc.msg}") from exc
    return _eval_node(tree.body)


def _eval_node(node):
    if isinstance(node, ast.Constant) and isinstance(node.value, int):
        return node.value
    if isinstance(node, ast.Name):
        m = _CYCLIC.match(node.id)
        if m:
            return fock.cyclic_spectrum(int(m.group(1)))
        if node.id == "I":
            return fock.CONSTANTS
        raise UsageError(f"unknown name {node.id!r}")
    if isinstance(node, ast.BinOp):
        left, right = _eval_node(node.left), _eval_node(node.right)
        if isinstance(node.op, ast.Add) and _both_spectra(left, right):
            return fock.direct_sum(left, right)
        if isinstance(node.op, ast.Mult):
            if isinstance(left, int) and isinstance(right, fock.RotationMultiset):
                return fock.scale_copies(right, left)
            if isinstance(right, int) and isinstance(left, fock.RotationMultiset):
                return fock.scale_copies(left, right)
            if _both_spectra(left, right):
                return fock.tensor(left, right)
        if isinstance(left, int) and isinstance(right, int):
            raise UsageError("integer arithmetic is not supported")
        raise UsageError(f"unsupported operation {type(node.op).__name__}")
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in ("exp", "sym"):
        if len(node.args) != 1 or len(node.keywords) != 1:
            raise UsageError(f"{node.func.id} takes one spectrum and one degree keyword")
        inner = _eval_node(node.args[0])
        degree = _eval_node(node.keywords[0].value)
        if not isinstance(inner, fock.RotationMultiset) or not isinstance(degree, int):
            raise UsageError(f"bad arguments to {node.func.id}")
        return fock.exp_truncated(inner, degree) if node.func.id == "exp" else fock.sym_power(inner, degree)
    raise UsageError(f"unsupported syntax: {ast.dump(node)}")


def _both_spectra(a, b) -> bool:
    return isinstance(a, fock.RotationMultiset) and isinstance(b, fock.RotationMultiset)


def cmd_fock(args) -> None:
    R = eval_fock(args.expr)
    if not isinstance(R, fock.RotationMultiset):
        raise UsageError("expression does not evaluate to a spectrum")
    emit(args, {
        "expr": args.expr,
        "dim": R.dim,
        "multiset": {rat(t): m for t, m in R.items()},
        "multiplicities": sorted(fock.multiplicity_set(R, args.exclude_zero)),
        "exclude_zero": args.exclude_zero,
    })


# --- parser ----------------------------------------------------------------


def _add_construction(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("construction")
    g.add_argument("--h", type=int, default=1, help="initial height (default 1)")
    g.add_argument("--p", type=int, help="type-(h, p) family: r=2, s=(1, p-3)")
    g.add_argument("--r", type=int, help="number of cuts (general family)")
    g.add_argument("--s", type=parse_int_list, help="spacer multipliers, comma separated")
    g.add_argument("--max-stage", type=int, default=tower.DEFAULT_MAX_STAGE,
                   help="stage cap for automatic refinement (default %(default)s)")


def _add_output(p: argparse.ArgumentParser, csv_ok: bool = False) -> None:
    choices = ["json", "csv"] if csv_ok else ["json"]
    p.add_argument("--format", choices=choices, default="json")
    p.add_argument("--output", "-o", help="write to this file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="selfsim",
        description="Exact computations for self-similar rank-one transformations and flows.",
        epilog=CSV_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="stage layout")
    _add_construction(p)
    p.add_argument("--stage", type=int, required=True)
    _add_output(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("corr", help="exact correlation sequence", epilog=CSV_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_construction(p)
    p.add_argument("--set-a", type=parse_level_set, default=tower.base_set(1))
    p.add_argument("--set-b", type=parse_level_set)
    p.add_argument("--n-max", type=int, required=True)
    _add_output(p, csv_ok=True)
    p.set_defaults(func=cmd_corr)

    p = sub.add_parser("scan", help="weak-limit scan")
    _add_construction(p)
    p.add_argument("--pair", action="append", help="A/B as level literals; repeatable")
    p.add_argument("--stage-levels", type=int, help="add all pairs of single levels of this stage")
    p.add_argument("--times", type=parse_int_list, required=True)
    p.add_argument("--m-max", type=int, default=6)
    p.add_argument("--q-min", type=int, default=-8)
    p.add_argument("--q-max", type=int, default=8)
    p.add_argument("--jobs", type=int, default=1, help="worker processes for the sweep over times")
    _add_output(p)
    p.set_defaults(func=cmd_scan)

    for name, func, help_ in (("spectrum", cmd_spectrum, "Fejer spectral density"),
                              ("qinv", cmd_qinv, "quasi-invariance ratios under rotation")):
        p = sub.add_parser(name, help=help_)
        _add_construction(p)
        p.add_argument("--set-a", type=parse_level_set, default=tower.base_set(1))
        p.add_argument("--n-max", type=int, default=4096)
        p.add_argument("--grid", type=int, default=8192)
        if name == "qinv":
            p.add_argument("--n-rot", type=int, default=1)
            p.add_argument("--rot-p", type=int, help="rotation base (default: p of the construction)")
            p.add_argument("--floor-frac", type=float, default=0.01,
                           help="only grid points with density >= this fraction of the max")
            _add_output(p)
        else:
            _add_output(p, csv_ok=True)
        p.set_defaults(func=func)

    p = sub.add_parser("check", help="self-similarity conjugacy check")
    _add_construction(p)
    p.add_argument("--stage", type=int, required=True)
    _add_output(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("components", help="ergodic components of T^p")
    _add_construction(p)
    p.add_argument("--stage", type=int, required=True)
    p.add_argument("--level", type=int, help="report the component of one level")
    _add_output(p)
    p.set_defaults(func=cmd_components)

    p = sub.add_parser("flow", help="q-self-similar flow")
    fsub = p.add_subparsers(dest="flow_cmd", required=True)
    for name in ("corr", "check"):
        fp = fsub.add_parser(name)
        fp.add_argument("--q", type=parse_fraction, required=True)
        fp.add_argument("--t", type=parse_fraction, action="append", required=True, help="repeatable")
        fp.add_argument("--max-stage", type=int, default=flow.DEFAULT_MAX_STAGE)
        if name == "corr":
            fp.add_argument("--set-a", type=parse_interval_set)
            fp.add_argument("--set-b", type=parse_interval_set)
        else:
            fp.add_argument("--samples", type=int, default=100)
            fp.add_argument("--stage", type=int, default=3)
            fp.add_argument("--seed", type=int, default=0)
        _add_output(fp)
        fp.set_defaults(func=cmd_flow)

    p = sub.add_parser("times", help="times q n_i = p^i + s_i")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--i-max", type=int, required=True)
    _add_output(p)
    p.set_defaults(func=cmd_times)

    p = sub.add_parser("collide", help="collisions m p^j = n p^i + s")
    for flag in ("--m", "--n", "--s", "--p", "--bound"):
        p.add_argument(flag, type=int, required=True)
    _add_output(p)
    p.set_defaults(func=cmd_collide)

    p = sub.add_parser("pisot", help="dist(x^n, Z) for a Pisot root", epilog=CSV_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--poly", type=parse_int_list, required=True,
                   help="monic integer coefficients, highest degree first, e.g. 1,-2,-1")
    p.add_argument("--n-max", type=int, required=True)
    _add_output(p, csv_ok=True)
    p.set_defaults(func=cmd_pisot)

    p = sub.add_parser("fock", help="multiplicity arithmetic, e.g. 'exp(2*C5 + 3*C7, D=3)'")
    p.add_argument("expr")
    p.add_argument("--exclude-zero", action="store_true", help="drop rotation number 0 (constants)")
    _add_output(p)
    p.set_defaults(func=cmd_fock)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except StageCapExceeded as exc:
        hint = f"; try --max-stage {exc.needed}" if exc.needed else "; try a larger --max-stage"
        print(f"error: {exc}{hint}", file=sys.stderr)
        return 1
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SelfSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
