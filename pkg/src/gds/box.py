"""Box distance: distortion, per-pair objectives, and exact minimisation.

The objective pairs a coupling pi and a cell set S: keep 1 - pi(S) small
while the two feature families stay close in the sup distance restricted
to S (doubled), or for metric measure spaces, while S has small distortion.
For fixed S the Hausdorff (or distortion) term does not involve pi at all,
so the best coupling is a max-flow putting as much mass on S as possible.

The solvers below never enumerate all 2^(n*m) cell sets.  Both objective
terms are monotone along the threshold grid of the instance (the first
increases, the second decreases), so the minimum sits where they cross,
and each threshold level needs only the best mass among the cell sets
that the level permits:

  * features: a set has Hausdorff radius <= h exactly when it fits inside
    a rectangle-intersection pattern cut out by a pair of feature
    assignments, so the best mass at level h is a max over assignment
    pairs of one max-flow;
  * metric measure spaces / fixed couplings: a set has distortion <= t
    exactly when it is a clique in the compatibility graph at t, so the
    best mass is a clique search.

The subset enumeration the sweep replaces is kept alive in the test suite
as an independent oracle.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from .core import FeatureFamily, GeometricDataSet, MmSpace
from .coupling import Coupling, max_mass_on_set
from .errors import EmptyCellSet, GdsError, SizeLimit, WitnessNotLipschitz
from .flows import max_flow_on_cells
from .metrics import CellSet, hausdorff, sup_pseudometric
from .numerics import EXACT, FLOAT_TOL, Scalar, close, same_mode

ASSIGNMENT_BUDGET = 70000
CELL_BUDGET = 16


@dataclass(frozen=True)
class BoxResult:
    """Box distance value with the witnessing coupling and cell set."""

    value: Scalar
    coupling: Coupling
    cells: CellSet


def distortion(S, dX, dY) -> Scalar:
    """Worst additive disagreement of the two metrics over pairs from S.

    Zero for empty and singleton sets; self-pairs never contribute.
    """
    best = 0
    cells = list(S)
    for a in range(len(cells)):
        x1, y1 = cells[a]
        for b in range(a + 1, len(cells)):
            x2, y2 = cells[b]
            gap = abs(dX[x1][x2] - dY[y1][y2])
            if gap > best:
                best = gap
    return best


def lip1_witness(S, f, dX, dY) -> tuple:
    """Transport a 1-Lipschitz function across a cell set.

    The returned g is 1-Lipschitz for dY (a minimum of cone functions) and
    stays within distortion(S)/2 of f on every cell of S, which is the
    tight general bound.
    """
    cells = list(S)
    if not cells:
        raise EmptyCellSet("cannot transport a function across no cells")
    tol = FLOAT_TOL if any(isinstance(v, float) for v in f) else 0
    n = len(dX)
    for x in range(n):
        for y in range(n):
            if abs(f[x] - f[y]) > dX[x][y] + tol:
                raise WitnessNotLipschitz(
                    f"function violates 1-Lipschitz between points {x} and {y}"
                )
    dis = distortion(S, dX, dY)
    half = dis / 2 if dis else 0
    m = len(dY)
    return tuple(
        half + min(f[x] + dY[z][y] for x, z in cells) for y in range(m)
    )


def box_objective(pi: Coupling, S: CellSet, FX: FeatureFamily, FY: FeatureFamily) -> Scalar:
    """max(1 - pi(S), 2 * Hausdorff over S); the empty set scores 1."""
    h = hausdorff(FX.rows, FY.rows, lambda f, g: sup_pseudometric(f, g, S))
    a = 1 - pi.mass(S)
    b = 2 * h
    return a if a > b else b


def _v_crossing(levels, rise, fall):
    """Minimise max(rise, fall) over a grid where rise grows and fall shrinks.

    Only the crossing level and its predecessor can attain the minimum, so
    a bisection for the first index with rise >= fall settles it with
    O(log) evaluations of the expensive falling term.
    """
    lo, hi = 0, len(levels) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if rise(mid) >= fall(mid):
            hi = mid
        else:
            lo = mid + 1
    best = None
    for i in ([lo - 1] if lo else []) + [lo]:
        a, b = rise(i), fall(i)
        v = a if a > b else b
        if best is None or v < best[0]:
            best = (v, i)
    return best


def _max_weight_clique(weights, adj):
    """Heaviest clique, branch and bound, vertices tried by weight.

    adj[v] is the neighbour bitmask (no self loops).  Returns
    (weight, vertex bitmask); the empty clique weighs 0.
    """
    count = len(weights)
    order = sorted(range(count), key=weights.__getitem__, reverse=True)
    pos = {v: p for p, v in enumerate(order)}
    w = [weights[v] for v in order]
    radj = [0] * count
    for v in range(count):
        mask = adj[v]
        while mask:
            u = (mask & -mask).bit_length() - 1
            mask &= mask - 1
            radj[pos[v]] |= 1 << pos[u]
    best_w, best_mask = 0, 0

    def remaining(mask):
        total = 0
        while mask:
            v = (mask & -mask).bit_length() - 1
            mask &= mask - 1
            total += w[v]
        return total

    def extend(cand, cur_w, cur_mask):
        nonlocal best_w, best_mask
        if cur_w > best_w:
            best_w, best_mask = cur_w, cur_mask
        while cand:
            if cur_w + remaining(cand) <= best_w:
                return
            v = (cand & -cand).bit_length() - 1
            cand &= ~(1 << v)
            extend(cand & radj[v], cur_w + w[v], cur_mask | (1 << v))

    extend((1 << count) - 1, 0, 0)
    out = 0
    for p in range(count):
        if best_mask >> p & 1:
            out |= 1 << order[p]
    return best_w, out


def _maximal_cliques(count, adj):
    """All maximal cliques as bitmasks (pivoting Bron-Kerbosch)."""
    out = []

    def bk(r, p, x):
        if not p and not x:
            out.append(r)
            return
        px = p | x
        pivot, fan = -1, -1
        t = px
        while t:
            v = (t & -t).bit_length() - 1
            t &= t - 1
            c = bin(p & adj[v]).count("1")
            if c > fan:
                pivot, fan = v, c
        ext = p & ~adj[pivot]
        while ext:
            v = (ext & -ext).bit_length() - 1
            ext &= ext - 1
            bk(r | (1 << v), p & adj[v], x & adj[v])
            p &= ~(1 << v)
            x |= 1 << v

    bk(0, (1 << count) - 1, 0)
    return out


def dis_coupling(pi: Coupling, dX, dY, cell_budget: int = CELL_BUDGET) -> tuple:
    """Distortion of a coupling: best trade-off of discarded mass vs spread.

    Minimises max(1 - pi(S), distortion(S)) over cell sets.  Cells outside
    the support can be dropped from S without raising either term, so the
    clique search runs on the support only; its size is capped because the
    branch and bound is exact, not polynomial.
    """
    matrix = pi.matrix
    support = [
        (i, j)
        for i in range(pi.n)
        for j in range(pi.m)
        if matrix[i][j] > 0
    ]
    if len(support) > cell_budget:
        raise SizeLimit(
            f"{len(support)} support cells exceed the exact budget {cell_budget}"
        )
    weights = [matrix[i][j] for i, j in support]
    count = len(support)
    gaps = [
        [
            abs(dX[support[a][0]][support[b][0]] - dY[support[a][1]][support[b][1]])
            for b in range(count)
        ]
        for a in range(count)
    ]
    levels = sorted({0} | {gaps[a][b] for a in range(count) for b in range(a + 1, count)})
    cache = {}

    def fall(idx):
        if idx not in cache:
            t = levels[idx]
            adj = [0] * count
            for a in range(count):
                for b in range(count):
                    if a != b and gaps[a][b] <= t:
                        adj[a] |= 1 << b
            wval, mask = _max_weight_clique(weights, adj)
            cache[idx] = (1 - wval, mask)
        return cache[idx][0]

    value, idx = _v_crossing(levels, lambda i: levels[i], fall)
    mask = cache[idx][1]
    cells = CellSet.from_pairs(
        pi.n, pi.m, [support[p] for p in range(count) if mask >> p & 1]
    )
    got = max(1 - pi.mass(cells), distortion(cells, dX, dY))
    if not close(got, value, pi.mode):
        raise AssertionError("distortion sweep witness disagrees with its value")
    return value, cells


class _FamilyGrids:
    """Per-instance tables for the feature-side sweeps.

    diff[f][g][cell] is the lifted gap |f(x) - g(y)| on the flat cell grid;
    levels is the sorted set of candidate Hausdorff radii; masks and flow
    values are memoised since the sweep revisits them across levels.
    """

    def __init__(self, X: GeometricDataSet, Y: GeometricDataSet):
        self.mode = same_mode(X.mode, Y.mode)
        self.n, self.m = X.n, Y.n
        self.mu = X.measure.weights
        self.nu = Y.measure.weights
        self.kx, self.ky = X.k, Y.k
        self.diff = [
            [
                [abs(fr[i] - gr[j]) for i in range(self.n) for j in range(self.m)]
                for gr in Y.features.rows
            ]
            for fr in X.features.rows
        ]
        levels = {0}
        for per_f in self.diff:
            for cells in per_f:
                levels.update(cells)
        self.levels = sorted(levels)
        self._allowed = {}
        self._sides = {}
        self._flow = {}

    def allowed(self, f: int, g: int, idx: int) -> int:
        key = (f, g, idx)
        hit = self._allowed.get(key)
        if hit is None:
            h = self.levels[idx]
            hit = 0
            for c, d in enumerate(self.diff[f][g]):
                if d <= h:
                    hit |= 1 << c
            self._allowed[key] = hit
        return hit

    def side_masks(self, idx: int) -> tuple:
        """Deduplicated cell masks cut out by each total assignment."""
        hit = self._sides.get(idx)
        if hit is None:
            full = (1 << (self.n * self.m)) - 1
            u_masks = set()
            for u in itertools.product(range(self.ky), repeat=self.kx):
                mask = full
                for f, g in enumerate(u):
                    mask &= self.allowed(f, g, idx)
                u_masks.add(mask)
            v_masks = set()
            for v in itertools.product(range(self.kx), repeat=self.ky):
                mask = full
                for g, f in enumerate(v):
                    mask &= self.allowed(f, g, idx)
                v_masks.add(mask)
            hit = (sorted(u_masks), sorted(v_masks))
            self._sides[idx] = hit
        return hit

    def flow(self, mask: int) -> Scalar:
        hit = self._flow.get(mask)
        if hit is None:
            hit, _ = max_flow_on_cells(self.mu, self.nu, mask)
            self._flow[mask] = hit
        return hit

    def best_pair_mass(self, idx: int, value_of) -> tuple:
        """Largest value_of(u_mask & v_mask) over assignment pairs.

        value_of must be monotone under set inclusion, which makes
        min(value_of(u), value_of(v)) a sound bound for pruning.
        """
        u_masks, v_masks = self.side_masks(idx)
        us = sorted(((value_of(mk), mk) for mk in u_masks), reverse=True)
        vs = sorted(((value_of(mk), mk) for mk in v_masks), reverse=True)
        best, best_mask = None, 0
        for uval, um in us:
            if best is not None and uval <= best:
                break
            for vval, vm in vs:
                bound = uval if uval < vval else vval
                if best is not None and bound <= best:
                    break
                val = value_of(um & vm)
                if best is None or val > best:
                    best, best_mask = val, um & vm
        return best, best_mask


def _gate_assignments(X, Y, assignment_budget):
    count = Y.k ** X.k + X.k ** Y.k
    if count > assignment_budget:
        raise SizeLimit(
            f"{count} feature assignments exceed the budget {assignment_budget}"
        )


def box_fixed_coupling(
    X: GeometricDataSet,
    Y: GeometricDataSet,
    pi: Coupling,
    assignment_budget: int = ASSIGNMENT_BUDGET,
) -> tuple:
    """Best cell set for one fixed coupling: (objective value, witness S)."""
    same_mode(same_mode(X.mode, Y.mode), pi.mode)
    pi.check_marginals(X.measure, Y.measure)
    _gate_assignments(X, Y, assignment_budget)
    grids = _FamilyGrids(X, Y)
    flat = [pi.matrix[i][j] for i in range(X.n) for j in range(Y.n)]
    mass_cache = {}

    def mass(mask: int) -> Scalar:
        hit = mass_cache.get(mask)
        if hit is None:
            hit = 0
            t = mask
            while t:
                c = (t & -t).bit_length() - 1
                t &= t - 1
                hit = hit + flat[c]
            mass_cache[mask] = hit
        return hit

    cache = {}

    def fall(idx):
        if idx not in cache:
            val, mask = grids.best_pair_mass(idx, mass)
            cache[idx] = (1 - val, mask)
        return cache[idx][0]

    value, idx = _v_crossing(grids.levels, lambda i: 2 * grids.levels[i], fall)
    cells = CellSet.from_mask(X.n, Y.n, cache[idx][1])
    got = box_objective(pi, cells, X.features, Y.features)
    if not close(got, value, grids.mode):
        raise AssertionError("fixed-coupling sweep witness disagrees with its value")
    return value, cells


def box_exact(
    X: GeometricDataSet,
    Y: GeometricDataSet,
    cell_budget: int = CELL_BUDGET,
    assignment_budget: int = ASSIGNMENT_BUDGET,
) -> BoxResult:
    """Box distance with witnesses, minimised over couplings and cell sets.

    The coupling only enters through the mass it puts on the candidate set,
    so at each threshold level the inner problem is one max-flow per
    assignment-pair mask and no coupling enumeration happens at all.
    """
    same_mode(X.mode, Y.mode)
    if X.n * Y.n > cell_budget:
        raise SizeLimit(
            f"{X.n * Y.n} cells exceed the exact budget {cell_budget}"
        )
    _gate_assignments(X, Y, assignment_budget)
    grids = _FamilyGrids(X, Y)
    cache = {}

    def fall(idx):
        if idx not in cache:
            val, mask = grids.best_pair_mass(idx, grids.flow)
            cache[idx] = (1 - val, mask)
        return cache[idx][0]

    value, idx = _v_crossing(grids.levels, lambda i: 2 * grids.levels[i], fall)
    cells = CellSet.from_mask(X.n, Y.n, cache[idx][1])
    _, pi = max_mass_on_set(X.measure, Y.measure, cells)
    got = box_objective(pi, cells, X.features, Y.features)
    if not close(got, value, grids.mode):
        raise AssertionError("box sweep witness disagrees with its value")
    return BoxResult(value, pi, cells)


def box_mm_exact(
    MX: MmSpace, MY: MmSpace, cell_budget: int = CELL_BUDGET
) -> Scalar:
    """Box distance between metric measure spaces, distortion flavour.

    Minimises max(1 - best coupling mass on S, distortion(S)).  Cell sets
    of distortion <= t are the cliques of the compatibility graph at t and
    the mass term is monotone, so only maximal cliques need a flow solve.
    """
    mode = same_mode(MX.mode, MY.mode)
    n, m = MX.n, MY.n
    count = n * m
    if count > cell_budget:
        raise SizeLimit(f"{count} cells exceed the exact budget {cell_budget}")
    cells = [(i, j) for i in range(n) for j in range(m)]
    gaps = [
        [
            abs(MX.dist[a[0]][b[0]] - MY.dist[a[1]][b[1]])
            for b in cells
        ]
        for a in cells
    ]
    levels = sorted({0} | {gaps[a][b] for a in range(count) for b in range(a + 1, count)})
    flow_cache = {}

    def flow(mask):
        hit = flow_cache.get(mask)
        if hit is None:
            hit, _ = max_flow_on_cells(MX.measure.weights, MY.measure.weights, mask)
            flow_cache[mask] = hit
        return hit

    cache = {}

    def fall(idx):
        if idx not in cache:
            t = levels[idx]
            adj = [0] * count
            for a in range(count):
                for b in range(count):
                    if a != b and gaps[a][b] <= t:
                        adj[a] |= 1 << b
            best, best_mask = None, 0
            for clique in sorted(_maximal_cliques(count, adj)):
                val = flow(clique)
                if best is None or val > best:
                    best, best_mask = val, clique
            cache[idx] = (1 - best, best_mask)
        return cache[idx][0]

    value, idx = _v_crossing(levels, lambda i: levels[i], fall)
    mask = cache[idx][1]
    witness = CellSet.from_mask(n, m, mask)
    got = max(1 - flow(mask), distortion(witness, MX.dist, MY.dist))
    if not close(got, value, mode):
        raise AssertionError("clique sweep witness disagrees with its value")
    return value


def box_heuristic(
    X: GeometricDataSet, Y: GeometricDataSet, budget: int = 400, seed: int = 0
) -> Scalar:
    """Upper bound on the box distance by local search over cell sets.

    Starts from the empty and full sets, greedy threshold patterns, and
    seeded random assignment patterns, then hill-climbs by single-cell
    toggles.  budget caps the number of distinct objective evaluations;
    the running best is non-increasing as the budget grows, and the value
    returned is a true objective at a realisable pair, hence an upper
    bound for any budget.
    """
    same_mode(X.mode, Y.mode)
    grids = _FamilyGrids(X, Y)
    n, m = X.n, Y.n
    nm = n * m
    full = (1 << nm) - 1
    pm = [grids.mu[i] * grids.nu[j] for i in range(n) for j in range(m)]

    def weight(mask):
        total = 0
        while mask:
            c = (mask & -mask).bit_length() - 1
            mask &= mask - 1
            total = total + pm[c]
        return total

    def radius(mask):
        """Hausdorff distance of the families over the masked cells."""
        best = 0
        for f in range(grids.kx):
            near = None
            for g in range(grids.ky):
                d = 0
                t = mask
                while t:
                    c = (t & -t).bit_length() - 1
                    t &= t - 1
                    if grids.diff[f][g][c] > d:
                        d = grids.diff[f][g][c]
                if near is None or d < near:
                    near = d
            if near > best:
                best = near
        for g in range(grids.ky):
            near = None
            for f in range(grids.kx):
                d = 0
                t = mask
                while t:
                    c = (t & -t).bit_length() - 1
                    t &= t - 1
                    if grids.diff[f][g][c] > d:
                        d = grids.diff[f][g][c]
                if near is None or d < near:
                    near = d
            if near > best:
                best = near
        return best

    evals = {}
    spent = 0

    def objective(mask):
        # Budget counts requests, not distinct masks: small grids run out
        # of new masks long before a generous budget would otherwise stop.
        nonlocal spent
        spent += 1
        hit = evals.get(mask)
        if hit is None:
            a = 1 - grids.flow(mask)
            b = 2 * radius(mask)
            hit = a if a > b else b
            evals[mask] = hit
        return hit

    def greedy_mask(idx):
        mask = full
        for f in range(grids.kx):
            mask &= max(
                (grids.allowed(f, g, idx) for g in range(grids.ky)),
                key=weight,
            )
        for g in range(grids.ky):
            mask &= max(
                (grids.allowed(f, g, idx) for f in range(grids.kx)),
                key=weight,
            )
        return mask

    rng = random.Random(seed)

    def starts():
        yield 0
        yield full
        count = len(grids.levels)
        step = max(1, count // 12)
        for idx in range(0, count, step):
            yield greedy_mask(idx)
        while True:
            mask = full
            for f in range(grids.kx):
                mask &= grids.allowed(f, rng.randrange(grids.ky), rng.randrange(count))
            for g in range(grids.ky):
                mask &= grids.allowed(rng.randrange(grids.kx), g, rng.randrange(count))
            yield mask

    best = None
    for start in starts():
        if spent >= budget:
            break
        current = start
        cur_val = objective(current)
        moved = True
        while moved and spent < budget:
            moved = False
            cand, cand_val = None, cur_val
            for c in range(nm):
                if spent >= budget:
                    break
                nb_val = objective(current ^ (1 << c))
                if nb_val < cand_val:
                    cand, cand_val = current ^ (1 << c), nb_val
            if cand is not None:
                current, cur_val = cand, cand_val
                moved = True
        if best is None or cur_val < best[0]:
            best = (cur_val, current)
    value, mask = best
    cells = CellSet.from_mask(n, m, mask)
    _, pi = max_mass_on_set(X.measure, Y.measure, cells)
    return box_objective(pi, cells, X.features, Y.features)
