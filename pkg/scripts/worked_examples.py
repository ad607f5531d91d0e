#!/usr/bin/env python3
"""Walk through the package's small closed-form computations.

Runs the distance calculations whose values can be checked by hand and
prints both the computed and the expected numbers.  Useful as a smoke
test and as a tour of the library API.
"""

import sys

from gds import (
    MmSpace,
    box_exact,
    box_mm_exact,
    dconc_exact,
    dconc_lower_witness,
    n_point_discrete,
    singleton_gds,
)
from gds.numerics import Q


def show(label, got, want):
    mark = "ok" if got == want else "MISMATCH"
    print(f"  {label}: {got} (expected {want}) {mark}")
    return got == want


def main() -> int:
    ok = True

    print("discrete spaces against the one-point space:")
    for N in (2, 3, 4):
        value = dconc_exact(n_point_discrete(N), singleton_gds([1])).value
        ok &= show(f"dconc(discrete {N}, point)", value, Q(1, N))

    print("distinct constants stay maximally apart:")
    value = dconc_exact(singleton_gds([0]), singleton_gds([1])).value
    ok &= show("dconc(const 0, const 1)", value, 1)

    print("a two-level witness beats every constant:")
    grid = singleton_gds([Q(j, 8) for j in range(9)])
    value = dconc_lower_witness(n_point_discrete(4), grid, (0, 0, 1, 1))
    ok &= show("lower bound", value, Q(1, 2))

    print("box distance between two-point geometries:")

    def two_point(d):
        return MmSpace.build([[0, d], [d, 0]], [Q(1, 2), Q(1, 2)])

    for d, e in [(Q(1, 2), Q(1, 4)), (2, 1)]:
        value = box_mm_exact(two_point(d), two_point(e))
        ok &= show(f"box(two@{d}, two@{e})", value, min(abs(d - e), Q(1, 2)))

    print("the box distance dominates the observable distance:")
    X, Y = n_point_discrete(3), n_point_discrete(2)
    dv, bv = dconc_exact(X, Y).value, box_exact(X, Y).value
    print(f"  dconc = {dv}, box = {bv}, ordered {'ok' if dv <= bv else 'MISMATCH'}")
    ok &= dv <= bv

    print("overall:", "all examples agree" if ok else "MISMATCHES FOUND")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
