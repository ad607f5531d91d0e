"""Observable distance against independently computed values.

The two-marginal case with two points on each side is solvable by hand:
the coupling polytope is a segment, the objective is piecewise linear in
the free parameter, so scanning every crossing of the participating
linear pieces finds the exact minimum.
"""

import pytest

from gds import (
    dconc_at_coupling,
    dconc_exact,
    dconc_heuristic,
    dconc_lower_witness,
    feature_transfer,
    n_point_discrete,
    product_coupling,
    singleton_gds,
)
from gds.coupling import Coupling, enumerate_couplings
from gds.errors import BudgetExceeded, WitnessNotLipschitz
from gds.numerics import Q
from gds.spaces import random_gds


def pi_transposed(pi):
    n, m = pi.n, pi.m
    return Coupling(
        tuple(tuple(pi.matrix[x][y] for x in range(n)) for y in range(m)),
        pi.mode,
    )


def kf_on_cells(masses, diffs):
    """Ky Fan value of a cellwise gap profile, by interval scan."""
    levels = sorted({Q(0)} | {Q(d) for d in diffs})
    best = None
    for idx, lo in enumerate(levels):
        mass = sum(w for w, d in zip(masses, diffs) if d > lo)
        cand = max(lo, mass)
        hi = levels[idx + 1] if idx + 1 < len(levels) else None
        if hi is not None and cand >= hi:
            continue
        if best is None or cand < best:
            best = cand
    return best


def hausdorff_kf(masses, X, Y, cells):
    """Hausdorff gap between the lifted families, from scratch."""
    table = [
        [
            kf_on_cells(masses, [abs(f[x] - g[y]) for (x, y) in cells])
            for g in Y.features.rows
        ]
        for f in X.features.rows
    ]
    left = max(min(row) for row in table)
    right = max(min(table[i][j] for i in range(X.k)) for j in range(Y.k))
    return max(left, right)


def dconc_two_by_two_oracle(X, Y):
    """Exact observable distance for 2x2 marginals by segment scan.

    Couplings form a segment parametrized by the mass t on cell (0, 0).
    Every Ky Fan interval bound is either a constant level or a cell-mass
    sum linear in t, so the final objective is piecewise linear with
    kinks only where two such lines cross.  Evaluating at every crossing
    (plus the endpoints and segment midpoints, as insurance) is exact.
    """
    a, c = X.measure.weights[0], Y.measure.weights[0]
    lo, hi = max(Q(0), a + c - 1), min(a, c)
    cells = [(0, 0), (0, 1), (1, 0), (1, 1)]
    # cell masses as const + slope * t
    lin_cells = {
        (0, 0): (Q(0), 1),
        (0, 1): (a, -1),
        (1, 0): (c, -1),
        (1, 1): (1 - a - c, 1),
    }
    lines = [(lo, 0), (hi, 0)]
    pairs = [
        (f, g) for f in X.features.rows for g in Y.features.rows
    ]
    for f, g in pairs:
        diffs = {cell: abs(f[x] - g[y]) for cell in cells for (x, y) in [cell]}
        levels = sorted({Q(0)} | set(diffs.values()))
        for level in levels:
            lines.append((level, 0))
            const = sum(lin_cells[cell][0] for cell in cells if diffs[cell] > level)
            slope = sum(lin_cells[cell][1] for cell in cells if diffs[cell] > level)
            lines.append((const, slope))
    candidates = {lo, hi}
    for i in range(len(lines)):
        a1, b1 = lines[i]
        for j in range(i + 1, len(lines)):
            a2, b2 = lines[j]
            if b1 != b2:
                t = Q(a2 - a1, b1 - b2)
                if lo <= t <= hi:
                    candidates.add(t)
    ordered = sorted(candidates)
    for u, v in zip(ordered, ordered[1:]):
        candidates.add((u + v) / 2)

    def value_at(t):
        masses = [lin_cells[cell][0] + lin_cells[cell][1] * t for cell in cells]
        return hausdorff_kf(masses, X, Y, cells)

    return min(value_at(t) for t in candidates)


class TestAgainstHandComputation:
    def test_discrete_vs_singleton_unique_coupling(self):
        # one point on the right means a single coupling, so the value
        # is a plain Hausdorff computation
        for N in (2, 3, 4):
            X = n_point_discrete(N)
            Y = singleton_gds([1])
            cells = [(x, 0) for x in range(N)]
            masses = list(X.measure.weights)
            by_hand = hausdorff_kf(masses, X, Y, cells)
            assert by_hand == Q(1, N)
            assert dconc_exact(X, Y).value == Q(1, N)

    def test_distinct_integer_singletons_are_far(self):
        for u, v in [(0, 1), (2, 7), (3, 4)]:
            d = dconc_exact(singleton_gds([u]), singleton_gds([v])).value
            assert d == 1

    def test_matching_singletons_coincide(self):
        assert dconc_exact(singleton_gds([5]), singleton_gds([5])).value == 0

    def test_two_by_two_scan_oracle(self):
        for seed in range(25):
            X = random_gds(2, 1 + seed % 3, seed=seed)
            Y = random_gds(2, 1 + (seed // 3) % 3, seed=1000 + seed)
            want = dconc_two_by_two_oracle(X, Y)
            got = dconc_exact(X, Y).value
            assert got == want, f"seed {seed}: {got} != {want}"


class TestExactStructure:
    def test_identity_and_symmetry(self):
        X = random_gds(3, 2, seed=11)
        Y = random_gds(2, 2, seed=12)
        assert dconc_exact(X, X).value == 0
        assert dconc_exact(X, Y).value == dconc_exact(Y, X).value

    def test_witness_coupling_attains_the_value(self):
        X = random_gds(3, 2, seed=21)
        Y = random_gds(3, 2, seed=22)
        res = dconc_exact(X, Y)
        assert dconc_at_coupling(X, Y, res.coupling) == res.value
        res.coupling.check_marginals(X.measure, Y.measure)

    def test_any_coupling_bounds_from_above(self):
        X = random_gds(3, 2, seed=31)
        Y = random_gds(2, 1, seed=32)
        best = dconc_exact(X, Y).value
        for pi in enumerate_couplings(X.measure, Y.measure, method="grid"):
            assert dconc_at_coupling(X, Y, pi) >= best

    def test_transfer_maps_pick_argmin_features(self):
        X = random_gds(3, 3, seed=41)
        Y = random_gds(3, 2, seed=42)
        pi = product_coupling(X.measure, Y.measure)
        to_right = feature_transfer(X, Y, pi)
        to_left = feature_transfer(Y, X, pi_transposed(pi))
        cells = [(x, y) for x in range(X.n) for y in range(Y.n)]
        masses = [pi.matrix[x][y] for (x, y) in cells]
        for i, f in enumerate(X.features.rows):
            vals = [
                kf_on_cells(masses, [abs(f[x] - g[y]) for (x, y) in cells])
                for g in Y.features.rows
            ]
            assert vals[to_right[i]] == min(vals)
        for j, g in enumerate(Y.features.rows):
            vals = [
                kf_on_cells(masses, [abs(f[x] - g[y]) for (x, y) in cells])
                for f in X.features.rows
            ]
            assert vals[to_left[j]] == min(vals)

    def test_budget_gate(self):
        X = random_gds(3, 3, seed=51)
        Y = random_gds(3, 3, seed=52)
        with pytest.raises(BudgetExceeded):
            dconc_exact(X, Y, assignment_budget=10)


class TestHeuristic:
    def test_never_below_exact(self):
        for seed in range(8):
            X = random_gds(3, 2, seed=seed)
            Y = random_gds(2, 2, seed=100 + seed)
            exact = dconc_exact(X, Y).value
            approx, pi = dconc_heuristic(X, Y, seed=seed)
            assert approx >= exact
            assert dconc_at_coupling(X, Y, pi) == approx

    def test_deterministic_for_a_seed(self):
        X = random_gds(3, 2, seed=61)
        Y = random_gds(3, 2, seed=62)
        assert dconc_heuristic(X, Y, seed=7)[0] == dconc_heuristic(X, Y, seed=7)[0]


class TestLowerWitness:
    def test_step_function_separates_discrete_from_constants(self):
        # the two-level step on the four-point discrete space keeps mass
        # 1/2 at distance >= 1/2 from any constant
        X = n_point_discrete(4)
        grid = singleton_gds([Q(j, 8) for j in range(9)])
        step = (0, 0, 1, 1)
        assert dconc_lower_witness(X, grid, step) == Q(1, 2)

    def test_family_member_bounds_from_below(self):
        for seed in range(6):
            X = random_gds(3, 2, seed=seed)
            Y = random_gds(2, 2, seed=200 + seed)
            exact = dconc_exact(X, Y).value
            for row in X.features.rows:
                assert dconc_lower_witness(X, Y, row) <= exact

    def test_non_lipschitz_witness_rejected(self):
        X = n_point_discrete(2)
        Y = singleton_gds([1])
        with pytest.raises(WitnessNotLipschitz):
            dconc_lower_witness(X, Y, (0, 5))
