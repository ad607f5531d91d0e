"""Observable distance between geometric data sets.

The distance is a minimax: over all couplings of the two measures, the
Hausdorff distance (in the coupling's Ky Fan metric) between the two
feature families lifted to the product.  The exact solver exploits that
the minimum is attained and that, once a Hausdorff bound is encoded by a
pair of total assignments between the families, the remaining optimisation
over couplings is a linear program.

All candidate optima live on a finite grid: the Ky Fan exceedance sets can
only change at the absolute differences |f(x) - g(y)|, so the search walks
the half-open intervals between those values, keeping every comparison
exact in rational mode.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Optional, Sequence

from .core import GeometricDataSet
from .coupling import (
    Coupling,
    SetMassProgram,
    enumerate_couplings,
    feasibility_lp,
    max_mass_on_set,
    product_coupling,
)
from .errors import BudgetExceeded, GdsError, WitnessNotLipschitz
from .metrics import CellSet, hausdorff, ky_fan_coupling
from .numerics import FLOAT_TOL, EXACT, Scalar, same_mode

ASSIGNMENT_BUDGET = 70000


@dataclass(frozen=True)
class DconcResult:
    """Observable distance value with the witnesses that certify it."""

    value: Scalar
    coupling: Coupling
    to_right: tuple  # assignment F_X index -> F_Y index
    to_left: tuple  # assignment F_Y index -> F_X index


def dconc_at_coupling(X: GeometricDataSet, Y: GeometricDataSet, pi) -> Scalar:
    """Hausdorff distance of the lifted families under one fixed coupling.

    An upper bound for the observable distance at any coupling, exact at
    an optimal one.
    """
    same_mode(X.mode, Y.mode)
    return hausdorff(
        X.features.rows,
        Y.features.rows,
        lambda f, g: ky_fan_coupling(pi, f, g),
    )


def feature_transfer(X: GeometricDataSet, Y: GeometricDataSet, pi) -> tuple:
    """Best Ky Fan partner in F_Y for each feature of F_X, lowest index wins.

    Every transferred pair satisfies ky_fan <= dconc_at_coupling(X, Y, pi),
    since the Hausdorff value dominates each row's best match.
    """
    out = []
    for f in X.features.rows:
        best_j, best_v = 0, None
        for j, g in enumerate(Y.features.rows):
            v = ky_fan_coupling(pi, f, g)
            if best_v is None or v < best_v:
                best_j, best_v = j, v
        out.append(best_j)
    return tuple(out)


class _DconcSearch:
    """Shared state for the exact search: diff tables, memoised flows/LPs."""

    def __init__(self, X: GeometricDataSet, Y: GeometricDataSet):
        self.mode = same_mode(X.mode, Y.mode)
        self.X, self.Y = X, Y
        self.n, self.m = X.n, Y.n
        self.kx, self.ky = X.k, Y.k
        # diff[f][g][cell] = |f(x) - g(y)| flattened over the n*m grid
        self.diff = [
            [
                [abs(fr[i] - gr[j]) for i in range(self.n) for j in range(self.m)]
                for gr in Y.features.rows
            ]
            for fr in X.features.rows
        ]
        levels = {0, 1}
        for fr in self.diff:
            for cells in fr:
                for d in cells:
                    if 0 < d < 1:
                        levels.add(d)
        self.levels = sorted(levels)
        self._exceed_cache: dict = {}
        self._minmass_cache: dict = {}
        self._lp_cache: dict = {}

    def exceed_set(self, f: int, g: int, level_idx: int) -> frozenset:
        """Cells where |f - g| > level, as a frozenset of flat indices."""
        key = (f, g, level_idx)
        hit = self._exceed_cache.get(key)
        if hit is None:
            b = self.levels[level_idx]
            hit = frozenset(
                c for c, d in enumerate(self.diff[f][g]) if d > b
            )
            self._exceed_cache[key] = hit
        return hit

    def min_mass(self, cells: frozenset) -> Scalar:
        """min over couplings of pi(cells) = 1 - max mass on the complement."""
        hit = self._minmass_cache.get(cells)
        if hit is None:
            full = frozenset(range(self.n * self.m))
            comp = CellSet.from_pairs(
                self.n, self.m, [divmod(c, self.m) for c in full - cells]
            )
            value, _ = max_mass_on_set(self.X.measure, self.Y.measure, comp)
            hit = 1 - value
            self._minmass_cache[cells] = hit
        return hit

    def joint_min_cap(self, sets: frozenset) -> tuple:
        """min over couplings of max mass over several cell sets, via LP."""
        hit = self._lp_cache.get(sets)
        if hit is None:
            live = [s for s in sets if s]
            if not live:
                pi = product_coupling(self.X.measure, self.Y.measure)
                hit = (0, pi)
            elif len(live) == 1:
                cs = CellSet.from_pairs(
                    self.n, self.m, [divmod(c, self.m) for c in live[0]]
                )
                comp = cs.complement()
                value, pi = max_mass_on_set(self.X.measure, self.Y.measure, comp)
                hit = (1 - value, pi)
            else:
                constraints = tuple(
                    (
                        CellSet.from_pairs(
                            self.n, self.m, [divmod(c, self.m) for c in s]
                        ),
                        0,
                    )
                    for s in sorted(live, key=sorted)
                )
                prog = SetMassProgram(
                    self.X.measure, self.Y.measure, constraints, "minimize-common-cap"
                )
                _, pi, t = feasibility_lp(prog)
                hit = (t, pi)
            self._lp_cache[sets] = hit
        return hit

    def pair_sets(self, u: Sequence[int], v: Sequence[int], level_idx: int):
        sets = set()
        for f, g in enumerate(u):
            sets.add(self.exceed_set(f, g, level_idx))
        for g, f in enumerate(v):
            sets.add(self.exceed_set(f, g, level_idx))
        return frozenset(sets)

    def candidate_lists(self, level_idx: int, cutoff) -> Optional[tuple]:
        """Per-feature partner lists that could stay under `cutoff`.

        A chosen pair (f, g) forces at least min_mass(exceed set) onto the
        common cap, so partners whose single-set bound already reaches the
        cutoff are pruned.  Returns None when some feature has no partner.
        """
        gs_for_f = []
        for f in range(self.kx):
            opts = [
                g
                for g in range(self.ky)
                if self.min_mass(self.exceed_set(f, g, level_idx)) < cutoff
            ]
            if not opts:
                return None
            gs_for_f.append(opts)
        fs_for_g = []
        for g in range(self.ky):
            opts = [
                f
                for f in range(self.kx)
                if self.min_mass(self.exceed_set(f, g, level_idx)) < cutoff
            ]
            if not opts:
                return None
            fs_for_g.append(opts)
        return gs_for_f, fs_for_g

    def scan_level(self, level_idx: int, stop_at_first: bool):
        """Best assignment pair at one level of the threshold grid.

        Returns (cap, coupling, u, v)  for the least achievable common cap
        among assignment pairs, or None if no pair beats the next level
        (i.e. the interval [level, next) contains no feasible epsilon).
        With stop_at_first, any single feasible pair suffices.
        """
        level = self.levels[level_idx]
        is_last = level_idx + 1 == len(self.levels)
        nxt = None if is_last else self.levels[level_idx + 1]
        cutoff = 2 if is_last else nxt  # mass bounds never exceed 1
        lists = self.candidate_lists(level_idx, cutoff)
        if lists is None:
            return None
        gs_for_f, fs_for_g = lists
        best = None
        for u in itertools.product(*gs_for_f):
            u_sets = frozenset(
                self.exceed_set(f, g, level_idx) for f, g in enumerate(u)
            )
            u_floor = max(self.min_mass(s) for s in u_sets)
            if best is not None and u_floor >= best[0]:
                continue
            for v in itertools.product(*fs_for_g):
                sets = u_sets | frozenset(
                    self.exceed_set(f, g, level_idx) for g, f in enumerate(v)
                )
                floor = max(self.min_mass(s) for s in sets)
                if floor >= cutoff:
                    continue
                if best is not None and floor >= best[0]:
                    continue
                cap, pi = self.joint_min_cap(sets)
                if cap >= cutoff:
                    continue
                if best is None or cap < best[0]:
                    best = (cap, pi, u, v)
                    if stop_at_first or cap <= level:
                        return best
        return best


def _forced_coupling_result(X, Y) -> DconcResult:
    pi = product_coupling(X.measure, Y.measure)
    value = dconc_at_coupling(X, Y, pi)
    u = feature_transfer(X, Y, pi)
    v = feature_transfer(Y, X, Coupling(tuple(zip(*pi.matrix)), pi.mode))
    return DconcResult(value, pi, u, v)


def dconc_exact(
    X: GeometricDataSet,
    Y: GeometricDataSet,
    assignment_budget: int = ASSIGNMENT_BUDGET,
) -> DconcResult:
    """Observable distance, exact, with witness coupling and assignments.

    When either space is a single point the coupling is forced and the
    value is read off directly; the family sizes do not matter there.
    Otherwise the search bisects the threshold grid for the first interval
    containing a feasible bound, then minimises the joint LP cap over all
    surviving assignment pairs inside it.  The reported minimum is attained
    by the returned witnesses.
    """
    same_mode(X.mode, Y.mode)
    if X.n == 1 or Y.n == 1:
        return _forced_coupling_result(X, Y)
    pairs = X.k ** Y.k * Y.k ** X.k
    if pairs > assignment_budget:
        raise BudgetExceeded(
            f"{pairs} assignment pairs exceed the budget {assignment_budget}"
        )
    search = _DconcSearch(X, Y)

    # A certified upper bound narrows the bisection range: the interval
    # holding the optimum can never lie above the one holding the bound.
    ub = dconc_at_coupling(X, Y, product_coupling(X.measure, Y.measure))
    hi = 0
    while hi + 1 < len(search.levels) and search.levels[hi + 1] <= ub:
        hi += 1
    lo = 0
    while lo < hi:
        mid = (lo + hi) // 2
        if search.scan_level(mid, stop_at_first=True) is not None:
            hi = mid
        else:
            lo = mid + 1
    best = search.scan_level(lo, stop_at_first=False)
    if best is None:
        raise AssertionError("bisection landed on an infeasible level")
    cap, pi, u, v = best
    level = search.levels[lo]
    value = cap if cap > level else level
    return DconcResult(value, pi, u, v)


def dconc_heuristic(
    X: GeometricDataSet,
    Y: GeometricDataSet,
    budget: int = 12,
    seed: int = 0,
) -> tuple[Scalar, Coupling]:
    """Alternating descent on (coupling, assignments); certified upper bound.

    From several anchor couplings: read off the best assignments under the
    current coupling, re-optimise the coupling for those assignments by the
    single-pair exact search, and repeat while the bound improves.  The
    reported value is dconc_at_coupling at the best coupling seen, so it is
    monotone across iterations and never below the exact distance.
    """
    same_mode(X.mode, Y.mode)
    if X.n == 1 or Y.n == 1:
        res = _forced_coupling_result(X, Y)
        return res.value, res.coupling
    search = _DconcSearch(X, Y)
    rng = random.Random(seed)

    anchors = list(enumerate_couplings(X.measure, Y.measure, "grid", 2))
    rng.shuffle(anchors)
    anchors = [product_coupling(X.measure, Y.measure)] + anchors[: max(1, budget // 2)]

    def pair_value(u, v):
        """Exact optimum over couplings for one fixed assignment pair."""
        lo = 0
        hi = len(search.levels) - 1

        def feasible(idx):
            sets = search.pair_sets(u, v, idx)
            cap, _ = search.joint_min_cap(sets)
            if idx + 1 == len(search.levels):
                return True
            return cap < search.levels[idx + 1]

        while lo < hi:
            mid = (lo + hi) // 2
            if feasible(mid):
                hi = mid
            else:
                lo = mid + 1
        sets = search.pair_sets(u, v, lo)
        cap, pi = search.joint_min_cap(sets)
        level = search.levels[lo]
        return (cap if cap > level else level), pi

    best_val, best_pi = None, None
    for pi in anchors:
        current = pi
        seen = set()
        for _ in range(max(1, budget)):
            val = dconc_at_coupling(X, Y, current)
            if best_val is None or val < best_val:
                best_val, best_pi = val, current
            u = feature_transfer(X, Y, current)
            v = feature_transfer(
                Y, X, Coupling(tuple(zip(*current.matrix)), current.mode)
            )
            if (u, v) in seen:
                break
            seen.add((u, v))
            cand_val, cand_pi = pair_value(u, v)
            if cand_val >= val:
                break
            current = cand_pi
    return best_val, best_pi


def dconc_lower_witness(
    X: GeometricDataSet, Y: GeometricDataSet, witness: Sequence
) -> Scalar:
    """Certified lower bound from a single 1-Lipschitz witness function.

    Any coupling must match the witness against some feature of Y, so
    min over g of (min over couplings of ky_fan(witness o pr1, g o pr2))
    bounds the observable distance from below whenever the witness belongs
    to the closed family of X; 1-Lipschitz for the induced metric is how
    that membership is checked here.
    """
    mode = same_mode(X.mode, Y.mode)
    if len(witness) != X.n:
        raise GdsError("witness length disagrees with the space")
    tol = 0 if mode == EXACT else FLOAT_TOL
    for x in range(X.n):
        for y in range(X.n):
            if abs(witness[x] - witness[y]) > X.dist[x][y] + tol:
                raise WitnessNotLipschitz(
                    f"witness violates 1-Lipschitz between points {x} and {y}"
                )
    search = _DconcSearch(X, Y)
    best = None
    for g_idx in range(Y.k):
        g = Y.features.rows[g_idx]
        diffs = [
            abs(witness[i] - g[j]) for i in range(X.n) for j in range(Y.n)
        ]
        levels = sorted({0, 1} | {d for d in diffs if 0 < d < 1})

        def min_kf_at(idx):
            cells = frozenset(c for c, d in enumerate(diffs) if d > levels[idx])
            return search.min_mass(cells)

        lo, hi = 0, len(levels) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            cap = min_kf_at(mid)
            ok = cap < levels[mid + 1] if mid + 1 < len(levels) else True
            if ok:
                hi = mid
            else:
                lo = mid + 1
        cap = min_kf_at(lo)
        val = cap if cap > levels[lo] else levels[lo]
        if best is None or val < best:
            best = val
    return best
