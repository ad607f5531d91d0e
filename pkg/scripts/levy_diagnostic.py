#!/usr/bin/env python3
"""Print the observable-diameter table of a vanishing-diameter family.

Each row is one family member, each column one kappa on a uniform grid;
watching the rows flatten to zero is the quickest sanity check that a
family concentrates.
"""

import argparse
import sys

from gds import csv_text, levy_table, n_point_discrete
from gds.numerics import EXACT, Q, format_scalar, to_scalar


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--family",
        choices=("discrete", "product_power"),
        default="discrete",
        help="which family to tabulate",
    )
    parser.add_argument("--n", type=int, default=6, help="number of members")
    parser.add_argument(
        "--step", default="1/20", help="kappa grid step (rational or decimal)"
    )
    parser.add_argument(
        "--base-points",
        type=int,
        default=2,
        help="size of the discrete base for product_power",
    )
    args = parser.parse_args(argv)

    step = to_scalar(args.step, EXACT)
    if not 0 < step < 1:
        parser.error("step must sit strictly between 0 and 1")
    kappas = []
    k = Q(0)
    while k < 1:
        kappas.append(k)
        k += step
    base = n_point_discrete(args.base_points) if args.family == "product_power" else None
    kappas, rows = levy_table(args.family, args.n, base=base, kappas=kappas)

    header = ["member"] + [format_scalar(k, EXACT) for k in kappas]
    table = [[label] + [format_scalar(v, EXACT) for v in vals] for label, vals in rows]
    sys.stdout.write(csv_text(header, table))
    return 0


if __name__ == "__main__":
    sys.exit(main())
