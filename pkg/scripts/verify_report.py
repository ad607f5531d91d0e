#!/usr/bin/env python3
"""Run the randomized theorem suite and print its report.

Exit status is 0 when every asserted property held on every trial and 1
otherwise, so the script slots into CI pipelines directly.
"""

import argparse
import sys

from gds import verify_theorem_suite


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0, help="base random seed")
    parser.add_argument("--trials", type=int, default=50, help="trials per property")
    args = parser.parse_args(argv)

    report = verify_theorem_suite(seed=args.seed, trials=args.trials)
    for line in report.lines():
        print(line)
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
