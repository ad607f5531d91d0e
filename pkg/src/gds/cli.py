"""Command-line surface: dataset I/O, computations, generators, checks.

Datasets travel as JSON documents (see dataio); "-" means stdin, and
two-input commands accept --other KIND:ARGS to synthesize the second
input inline, so generators pipe into computations:

    gds gen discrete --n 3 | gds dconc --other singleton:1 --exact

Scalar results are printed as JSON with a 12-significant-digit decimal,
plus the exact rational string in exact mode.  Tables are CSV with a
header row.  Exit codes: 2 for schema violations or otherwise unusable
inputs, 3 when an exact search refuses its budget and no --heuristic
fallback was offered, 1 when the verification suite fails.

Environment: GDS_MODE picks exact or float arithmetic (flag --mode wins);
GDS_BUDGET_CELLS caps the exact box search grid (default 16).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

from .box import box_exact, box_heuristic, box_mm_exact
from .core import GeometricDataSet, gds_to_mm
from .dataio import csv_text, emit_gds, parse_gds
from .errors import BudgetExceeded, GdsError, SchemaError, SizeLimit
from .metrics import (
    ky_fan,
    observable_diameter,
    od_breakpoints,
    partial_diameter,
    prohorov,
)
from .numerics import EXACT, FLOAT, FLOAT_TOL, Q, exact_string, format_scalar, to_scalar
from .observable import dconc_exact, dconc_heuristic, dconc_lower_witness
from .order import check_domination, check_isomorphism
from .spaces import (
    levy_sequence,
    levy_table,
    n_point_discrete,
    product_gds,
    quotient_gds,
    random_gds,
    singleton_gds,
)
from .suite import verify_theorem_suite

__all__ = ["main"]


# ---------------------------------------------------------------------------
# Shared plumbing
# ---------------------------------------------------------------------------


def _resolve_mode(args) -> str:
    if getattr(args, "mode", None):
        return args.mode
    env = os.environ.get("GDS_MODE", EXACT).strip().lower()
    if env not in (EXACT, FLOAT):
        raise SchemaError(f"GDS_MODE must be 'exact' or 'float', not {env!r}")
    return env


def _cell_budget(args) -> int:
    if getattr(args, "cells", None) is not None:
        value = args.cells
    else:
        raw = os.environ.get("GDS_BUDGET_CELLS", "16")
        try:
            value = int(raw)
        except ValueError:
            raise SchemaError(
                f"GDS_BUDGET_CELLS must be an integer, not {raw!r}"
            ) from None
    if value < 1:
        raise SchemaError("cell budget must be at least 1")
    return value


def _load(source: str, mode: str) -> GeometricDataSet:
    if source == "-":
        return parse_gds(sys.stdin.read(), mode)
    try:
        with open(source, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise SchemaError(f"cannot read {source}: {exc}") from exc
    return parse_gds(text, mode)


def _generated(spec: str, mode: str) -> GeometricDataSet:
    kind, _, rest = spec.partition(":")
    try:
        if kind == "singleton":
            values = [v.strip() for v in rest.split(",") if v.strip()]
            if not values:
                raise SchemaError("singleton needs at least one constant")
            return singleton_gds(values, mode)
        if kind == "discrete":
            return n_point_discrete(int(rest), mode)
        if kind == "random":
            parts = [int(v) for v in rest.split(",") if v.strip()]
            if len(parts) < 2:
                raise SchemaError("random needs n,k[,seed[,scale]]")
            n, k = parts[0], parts[1]
            seed = parts[2] if len(parts) > 2 else 0
            scale = parts[3] if len(parts) > 3 else 8
            return random_gds(n, k, seed=seed, scale=scale, mode=mode)
    except ValueError as exc:
        raise SchemaError(f"bad generator spec {spec!r}: {exc}") from exc
    raise SchemaError(
        f"unknown generator {kind!r}; use singleton:…, discrete:N or random:n,k"
    )


def _pair(args, mode: str) -> tuple:
    """Two datasets from positional paths, stdin, and --other."""
    paths = list(args.inputs)
    if getattr(args, "other", None):
        if len(paths) > 1:
            raise SchemaError("--other supplies the second input; give at most one path")
        first = paths[0] if paths else "-"
        return _load(first, mode), _generated(args.other, mode)
    if len(paths) == 2:
        return _load(paths[0], mode), _load(paths[1], mode)
    if len(paths) == 1:
        return _load(paths[0], mode), _load("-", mode)
    raise SchemaError("need two datasets: paths, '-' for stdin, or --other")


def _write(text: str, output: Optional[str]) -> None:
    if output in (None, "-"):
        sys.stdout.write(text)
        return
    with open(output, "w", encoding="utf-8") as handle:
        handle.write(text)


def _num(x, mode: str) -> dict:
    payload = {"value": float(x)}
    if mode == EXACT:
        payload["exact"] = exact_string(x, mode)
    return payload


def _print_json(payload: dict) -> None:
    print(json.dumps(payload, indent=2))


def _scalar_columns(values, mode: str):
    row = [format_scalar(v, mode) for v in values]
    if mode == EXACT:
        row += [exact_string(v, mode) for v in values]
    return row


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_od(args) -> int:
    mode = _resolve_mode(args)
    X = _load(args.dataset, mode)
    if args.kappa is not None:
        kappa = to_scalar(args.kappa, mode)
        payload = {"command": "od", "kappa": format_scalar(kappa, mode)}
        payload.update(_num(observable_diameter(X, kappa), mode))
        _print_json(payload)
        return 0
    if args.step is not None:
        step = to_scalar(args.step, mode)
        if step <= 0:
            raise SchemaError("--step must be positive")
        kappas = []
        j = 0
        while j * step < 1:
            kappas.append(j * step)
            j += 1
    else:
        kappas = list(od_breakpoints(X))
    header = ["kappa", "od"]
    if mode == EXACT:
        header += ["kappa_exact", "od_exact"]
    rows = [
        _scalar_columns([k, observable_diameter(X, k)], mode) for k in kappas
    ]
    _write(csv_text(header, rows), args.output)
    return 0


def _cmd_pd(args) -> int:
    mode = _resolve_mode(args)
    X = _load(args.dataset, mode)
    alpha = to_scalar(args.alpha, mode)
    if args.feature is not None:
        try:
            row = X.features.by_label(args.feature)
        except (GdsError, KeyError) as exc:
            raise SchemaError(f"no feature {args.feature!r}") from exc
        payload = {
            "command": "pd",
            "feature": args.feature,
            "alpha": format_scalar(alpha, mode),
        }
        payload.update(_num(partial_diameter(row, X.measure, alpha), mode))
        _print_json(payload)
        return 0
    header = ["feature", "pd"]
    if mode == EXACT:
        header.append("pd_exact")
    rows = []
    for label, row in zip(X.features.labels, X.features.rows):
        value = partial_diameter(row, X.measure, alpha)
        rows.append([label] + _scalar_columns([value], mode))
    _write(csv_text(header, rows), args.output)
    return 0


def _cmd_dconc(args) -> int:
    mode = _resolve_mode(args)
    X, Y = _pair(args, mode)
    payload = {"command": "dconc"}
    if args.bounds:
        lower = max(
            max(
                (dconc_lower_witness(X, Y, f) for f in X.features.rows),
                default=0,
            ),
            max(
                (dconc_lower_witness(Y, X, g) for g in Y.features.rows),
                default=0,
            ),
        )
        upper, _ = dconc_heuristic(
            X, Y, budget=args.budget or 12, seed=args.seed
        )
        payload["method"] = "bounds"
        payload["lower"] = _num(lower, mode)
        payload["upper"] = _num(upper, mode)
        _print_json(payload)
        return 0
    if not args.heuristic or args.exact:
        try:
            kwargs = {}
            if args.budget is not None:
                kwargs["assignment_budget"] = args.budget
            result = dconc_exact(X, Y, **kwargs)
            payload["method"] = "exact"
            payload.update(_num(result.value, mode))
            _print_json(payload)
            return 0
        except (BudgetExceeded, SizeLimit) as exc:
            if not args.heuristic:
                raise
            payload["note"] = f"exact search declined: {exc}"
    value, _ = dconc_heuristic(X, Y, budget=args.budget or 12, seed=args.seed)
    payload["method"] = "heuristic"
    payload["seed"] = args.seed
    payload.update(_num(value, mode))
    _print_json(payload)
    return 0


def _cmd_box(args) -> int:
    mode = _resolve_mode(args)
    X, Y = _pair(args, mode)
    cells = _cell_budget(args)
    payload = {"command": "box"}
    if args.mm:
        payload["method"] = "mm-exact"
        value = box_mm_exact(gds_to_mm(X), gds_to_mm(Y), cell_budget=cells)
        payload.update(_num(value, mode))
        _print_json(payload)
        return 0
    if not args.heuristic or args.exact:
        try:
            kwargs = {"cell_budget": cells}
            if args.budget is not None:
                kwargs["assignment_budget"] = args.budget
            result = box_exact(X, Y, **kwargs)
            payload["method"] = "exact"
            payload["cells"] = [list(c) for c in result.cells.sorted_cells]
            payload.update(_num(result.value, mode))
            _print_json(payload)
            return 0
        except (BudgetExceeded, SizeLimit) as exc:
            if not args.heuristic:
                raise
            payload["note"] = f"exact search declined: {exc}"
            payload.pop("cells", None)
    value = box_heuristic(X, Y, budget=args.budget or 400, seed=args.seed)
    payload["method"] = "heuristic"
    payload["seed"] = args.seed
    payload.update(_num(value, mode))
    _print_json(payload)
    return 0


def _cmd_prohorov(args) -> int:
    mode = _resolve_mode(args)
    X, Y = _pair(args, mode)
    if X.n != Y.n:
        raise SchemaError("prohorov compares two measures on one space")
    tol = 0 if mode == EXACT else FLOAT_TOL
    for x in range(X.n):
        for y in range(X.n):
            if abs(X.dist[x][y] - Y.dist[x][y]) > tol:
                raise SchemaError(
                    "prohorov inputs must induce the same metric"
                )
    value = prohorov(X.measure, Y.measure, X.dist, args.method)
    payload = {"command": "prohorov", "method": args.method}
    payload.update(_num(value, mode))
    _print_json(payload)
    return 0


def _cmd_kyfan(args) -> int:
    mode = _resolve_mode(args)
    X = _load(args.dataset, mode)
    try:
        f = X.features.by_label(args.first)
        g = X.features.by_label(args.second)
    except (GdsError, KeyError) as exc:
        raise SchemaError(str(exc)) from exc
    payload = {"command": "kyfan", "first": args.first, "second": args.second}
    payload.update(_num(ky_fan(X.measure, f, g), mode))
    _print_json(payload)
    return 0


def _cmd_quotient(args) -> int:
    mode = _resolve_mode(args)
    X = _load(args.dataset, mode)
    labels = [v.strip() for v in args.by.split(",") if v.strip()]
    if not labels:
        raise SchemaError("--by needs a comma-separated list of feature labels")
    for label in labels:
        if label not in X.features.labels:
            raise SchemaError(f"no feature {label!r}")
    Y, mapping = quotient_gds(X, labels)
    _write(emit_gds(Y), args.output)
    print(json.dumps({"mapping": list(mapping)}), file=sys.stderr)
    return 0


def _cmd_product(args) -> int:
    mode = _resolve_mode(args)
    X, Y = _pair(args, mode)
    _write(emit_gds(product_gds(X, Y)), args.output)
    return 0


def _cmd_gen(args) -> int:
    mode = _resolve_mode(args)
    if args.kind == "singleton":
        values = [v.strip() for v in args.values.split(",") if v.strip()]
        if not values:
            raise SchemaError("--values needs at least one constant")
        X = singleton_gds(values, mode)
    elif args.kind == "discrete":
        X = n_point_discrete(args.n, mode)
    elif args.kind == "random":
        X = random_gds(args.n, args.k, seed=args.seed, scale=args.scale, mode=mode)
    else:  # levy
        base = _load(args.base, mode) if args.base else None
        if args.table:
            step = to_scalar(args.step, mode)
            if step <= 0:
                raise SchemaError("--step must be positive")
            kappas = []
            j = 1
            while j * step < 1:
                kappas.append(j * step)
                j += 1
            kappas, rows = levy_table(args.family, args.n, base, kappas)
            header = ["member"] + [format_scalar(k, mode) for k in kappas]
            body = [
                [label] + [format_scalar(v, mode) for v in values]
                for label, values in rows
            ]
            _write(csv_text(header, body), args.output)
            return 0
        member = None
        for member in levy_sequence(args.family, args.n, base):
            pass
        X = member
    _write(emit_gds(X), args.output)
    return 0


def _cmd_check(args) -> int:
    mode = _resolve_mode(args)
    X, Y = _pair(args, mode)
    kwargs = {}
    if args.budget is not None:
        kwargs["map_budget"] = args.budget
    if args.relation == "domination":
        verdict, witness = check_domination(X, Y, **kwargs)
    else:
        verdict, witness = check_isomorphism(X, Y, **kwargs)
    payload = {
        "command": "check",
        "relation": args.relation,
        "verdict": verdict,
        "witness": list(witness) if witness is not None else None,
    }
    _print_json(payload)
    return 0


def _cmd_verify(args) -> int:
    report = verify_theorem_suite(seed=args.seed, trials=args.trials)
    for line in report.lines():
        print(line)
    return 0 if report.ok else 1


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    mode_parent = argparse.ArgumentParser(add_help=False)
    mode_parent.add_argument(
        "--mode",
        choices=[EXACT, FLOAT],
        default=None,
        help="arithmetic mode (default: GDS_MODE or exact)",
    )
    out_parent = argparse.ArgumentParser(add_help=False)
    out_parent.add_argument(
        "-o", "--output", default=None, help="write to this file instead of stdout"
    )
    pair_parent = argparse.ArgumentParser(add_help=False)
    pair_parent.add_argument(
        "inputs",
        nargs="*",
        help="dataset paths ('-' for stdin); missing ones are read from stdin",
    )
    pair_parent.add_argument(
        "--other",
        default=None,
        metavar="KIND:ARGS",
        help="generate the second input inline: singleton:v[,v…], discrete:N, random:n,k[,seed[,scale]]",
    )

    parser = argparse.ArgumentParser(
        prog="gds",
        description="Distances, diameters and order checks for geometric data sets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "od",
        parents=[mode_parent, out_parent],
        help="observable diameter, one kappa or a CSV over a grid",
    )
    p.add_argument("dataset", help="dataset path or '-'")
    p.add_argument("--kappa", default=None, help="single kappa instead of a grid")
    p.add_argument(
        "--step", default=None, help="uniform grid step (default: value breakpoints)"
    )
    p.set_defaults(func=_cmd_od)

    p = sub.add_parser(
        "pd",
        parents=[mode_parent, out_parent],
        help="partial diameter of one feature, or CSV over all features",
    )
    p.add_argument("dataset", help="dataset path or '-'")
    p.add_argument("--alpha", required=True, help="mass the interval must catch")
    p.add_argument("--feature", default=None, help="feature label (default: all)")
    p.set_defaults(func=_cmd_pd)

    p = sub.add_parser(
        "dconc",
        parents=[mode_parent, pair_parent],
        help="observable distance between two datasets",
    )
    p.add_argument("--exact", action="store_true", help="exact search (default)")
    p.add_argument(
        "--heuristic",
        action="store_true",
        help="alternating search; with --exact it is the over-budget fallback",
    )
    p.add_argument(
        "--bounds", action="store_true", help="certified lower and upper bounds"
    )
    p.add_argument("--budget", type=int, default=None, help="search budget")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_dconc)

    p = sub.add_parser(
        "box",
        parents=[mode_parent, pair_parent],
        help="box distance between two datasets",
    )
    p.add_argument("--exact", action="store_true", help="exact search (default)")
    p.add_argument(
        "--heuristic",
        action="store_true",
        help="local search; with --exact it is the over-budget fallback",
    )
    p.add_argument(
        "--mm",
        action="store_true",
        help="compare the induced metric-measure structures instead of the families",
    )
    p.add_argument("--budget", type=int, default=None, help="search budget")
    p.add_argument(
        "--cells", type=int, default=None, help="cell cap (default: GDS_BUDGET_CELLS or 16)"
    )
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_box)

    p = sub.add_parser(
        "prohorov",
        parents=[mode_parent, pair_parent],
        help="Prohorov distance of two measures on one induced metric",
    )
    p.add_argument("--method", choices=["auto", "brute", "flow"], default="auto")
    p.set_defaults(func=_cmd_prohorov)

    p = sub.add_parser(
        "kyfan",
        parents=[mode_parent],
        help="Ky Fan distance between two features of one dataset",
    )
    p.add_argument("dataset", help="dataset path or '-'")
    p.add_argument("-f", "--first", required=True, help="feature label")
    p.add_argument("-g", "--second", required=True, help="feature label")
    p.set_defaults(func=_cmd_kyfan)

    p = sub.add_parser(
        "quotient",
        parents=[mode_parent, out_parent],
        help="collapse a 1-Lipschitz subfamily; mapping goes to stderr",
    )
    p.add_argument("dataset", help="dataset path or '-'")
    p.add_argument("--by", required=True, help="comma-separated feature labels")
    p.set_defaults(func=_cmd_quotient)

    p = sub.add_parser(
        "product",
        parents=[mode_parent, out_parent, pair_parent],
        help="product dataset with the max combination of metrics",
    )
    p.set_defaults(func=_cmd_product)

    p = sub.add_parser(
        "gen",
        parents=[mode_parent, out_parent],
        help="emit a generated dataset as JSON",
    )
    gen_sub = p.add_subparsers(dest="kind", required=True)
    g = gen_sub.add_parser(
        "singleton", parents=[mode_parent, out_parent], help="one point, constant features"
    )
    g.add_argument("--values", required=True, help="comma-separated constants")
    g.set_defaults(func=_cmd_gen)
    g = gen_sub.add_parser(
        "discrete", parents=[mode_parent, out_parent], help="N points, indicator features"
    )
    g.add_argument("--n", type=int, required=True)
    g.set_defaults(func=_cmd_gen)
    g = gen_sub.add_parser(
        "random", parents=[mode_parent, out_parent], help="seeded random dataset"
    )
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--scale", type=int, default=8)
    g.set_defaults(func=_cmd_gen)
    g = gen_sub.add_parser(
        "levy",
        parents=[mode_parent, out_parent],
        help="member N of a vanishing-diameter family, or its od table",
    )
    g.add_argument(
        "--family", choices=["discrete", "product_power"], default="discrete"
    )
    g.add_argument("--n", type=int, required=True, help="member index (1-based)")
    g.add_argument("--base", default=None, help="base dataset for product_power")
    g.add_argument(
        "--table", action="store_true", help="CSV of od values for members 1..n"
    )
    g.add_argument("--step", default="1/20", help="kappa grid step for --table")
    g.set_defaults(func=_cmd_gen)

    p = sub.add_parser(
        "check",
        parents=[mode_parent],
        help="decide domination or isomorphism between two datasets",
    )
    p.add_argument("relation", choices=["domination", "isomorphism"])
    p.add_argument(
        "inputs",
        nargs="*",
        help="dataset paths ('-' for stdin); missing ones are read from stdin",
    )
    p.add_argument(
        "--other",
        default=None,
        metavar="KIND:ARGS",
        help="generate the second input inline: singleton:v[,v…], discrete:N, random:n,k[,seed[,scale]]",
    )
    p.add_argument("--budget", type=int, default=None, help="map enumeration cap")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser(
        "verify",
        help="run the randomized theorem suite (exit 1 on failure)",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=50)
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except (BudgetExceeded, SizeLimit) as exc:
        print(f"gds: budget: {exc}", file=sys.stderr)
        return 3
    except SchemaError as exc:
        print(f"gds: {exc}", file=sys.stderr)
        return 2
    except GdsError as exc:
        print(f"gds: invalid input: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
