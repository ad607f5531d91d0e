"""Metrics between functions and between measures on a finite space.

The Ky Fan metric measures how far two functions are apart in probability;
the Prohorov metric compares two measures on a shared finite metric space.
Both are computed exactly by scanning the finite grid of thresholds where
their defining step functions can change.  Partial and observable diameter
sit on top of the same machinery.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

from .core import DiscreteMeasure, GeometricDataSet
from .errors import GdsError, ModeMismatch, SizeLimit
from .flows import max_flow_on_cells
from .numerics import EXACT, Scalar, same_mode

BRUTE_FORCE_POINT_LIMIT = 12


@dataclass(frozen=True)
class CellSet:
    """A subset of the n x m product grid, stored as frozen (i, j) pairs."""

    n: int
    m: int
    cells: frozenset

    def __post_init__(self):
        for (i, j) in self.cells:
            if not (0 <= i < self.n and 0 <= j < self.m):
                raise GdsError(f"cell ({i},{j}) outside {self.n}x{self.m} grid")

    @classmethod
    def from_pairs(cls, n: int, m: int, pairs: Iterable) -> "CellSet":
        return cls(n, m, frozenset((int(i), int(j)) for i, j in pairs))

    @classmethod
    def full(cls, n: int, m: int) -> "CellSet":
        return cls(n, m, frozenset((i, j) for i in range(n) for j in range(m)))

    @classmethod
    def empty(cls, n: int, m: int) -> "CellSet":
        return cls(n, m, frozenset())

    @classmethod
    def from_mask(cls, n: int, m: int, mask: int) -> "CellSet":
        cells = frozenset(
            (i, j) for i in range(n) for j in range(m) if mask >> (i * m + j) & 1
        )
        return cls(n, m, cells)

    def to_mask(self) -> int:
        mask = 0
        for (i, j) in self.cells:
            mask |= 1 << (i * self.m + j)
        return mask

    def complement(self) -> "CellSet":
        allc = frozenset((i, j) for i in range(self.n) for j in range(self.m))
        return CellSet(self.n, self.m, allc - self.cells)

    @property
    def sorted_cells(self) -> tuple:
        return tuple(sorted(self.cells))

    def __contains__(self, cell) -> bool:
        return cell in self.cells

    def __iter__(self):
        return iter(self.sorted_cells)

    def __len__(self) -> int:
        return len(self.cells)


def _ky_fan_from_pairs(pairs: Sequence) -> Scalar:
    """Ky Fan value from (weight, deviation) pairs with total weight 1.

    Finds min eps with mass{deviation > eps} <= eps by walking the
    half-open intervals between consecutive deviation values; within an
    interval the tail mass is constant, so the least feasible point there
    is max(interval start, tail mass).  The first interval that admits one
    yields the minimum, which is always attained.
    """
    starts = sorted({0} | {d for _, d in pairs})
    for idx, lo in enumerate(starts):
        tail = sum((w for w, d in pairs if d > lo), start=lo - lo)
        cand = tail if tail > lo else lo
        if idx + 1 == len(starts) or cand < starts[idx + 1]:
            return cand
    raise AssertionError("threshold scan cannot exhaust without an answer")


def ky_fan(mu: DiscreteMeasure, a: Sequence, b: Sequence) -> Scalar:
    """Ky Fan distance between two functions under one measure.

    The least eps such that {|a - b| > eps} has mass at most eps.  Never
    exceeds 1 for a probability measure.
    """
    if len(a) != mu.n or len(b) != mu.n:
        raise GdsError("function rows disagree with the measure's point count")
    pairs = [(mu.weights[i], abs(a[i] - b[i])) for i in range(mu.n)]
    return _ky_fan_from_pairs(pairs)


def ky_fan_coupling(pi, f: Sequence, g: Sequence) -> Scalar:
    """Ky Fan distance of f o pr1 and g o pr2 under a coupling.

    `pi` may be a Coupling or a raw matrix (sequence of rows).
    """
    matrix = getattr(pi, "matrix", pi)
    n, m = len(matrix), len(matrix[0])
    if len(f) != n or len(g) != m:
        raise GdsError("row lengths disagree with the coupling's shape")
    pairs = [
        (matrix[i][j], abs(f[i] - g[j]))
        for i in range(n)
        for j in range(m)
    ]
    return _ky_fan_from_pairs(pairs)


def sup_pseudometric(f: Sequence, g: Sequence, cells: Iterable) -> Scalar:
    """sup over the cell set of |f(x) - g(y)|; zero on the empty set."""
    best = 0
    for (i, j) in cells:
        d = abs(f[i] - g[j])
        if d > best:
            best = d
    return best


def hausdorff(items_a: Sequence, items_b: Sequence, dist: Callable) -> Scalar:
    """Hausdorff distance between two finite nonempty sets under `dist`."""
    if not items_a or not items_b:
        raise GdsError("hausdorff needs two nonempty families")
    forward = max(min(dist(a, b) for b in items_b) for a in items_a)
    backward = max(min(dist(a, b) for a in items_a) for b in items_b)
    return forward if forward >= backward else backward


# ---------------------------------------------------------------------------
# Prohorov metric on a shared finite metric space
# ---------------------------------------------------------------------------


def prohorov_weights(
    mu_weights: Sequence,
    nu_weights: Sequence,
    dist: Sequence,
    method: str = "auto",
) -> Scalar:
    """Prohorov distance for raw weight vectors, zero masses permitted.

    Core of `prohorov`, shared with the coupling-to-coupling comparison
    where zero cells are routine.  Dropping a zero-mass point from a set A
    keeps nu(A) while shrinking the neighborhood, so the subset scan over
    the full grid still attains its maximum on supported sets and the
    value is unaffected by null points.
    """
    n = len(mu_weights)
    if len(nu_weights) != n or len(dist) != n:
        raise GdsError("prohorov needs two weight vectors on one metric space")
    if method == "auto":
        method = "brute" if n <= 8 else "flow"
    thresholds = sorted({dist[x][y] for x in range(n) for y in range(n)} | {0})

    def interval_answer(i: int, need) -> Optional[Scalar]:
        lo = thresholds[i]
        hi = thresholds[i + 1] if i + 1 < len(thresholds) else None
        if need <= lo:
            return lo
        if hi is None or need <= hi:
            return need
        return None

    if method == "brute":
        if n > BRUTE_FORCE_POINT_LIMIT:
            raise SizeLimit(
                f"brute-force prohorov caps at {BRUTE_FORCE_POINT_LIMIT} points"
            )
        req = _prohorov_requirements_brute(mu_weights, nu_weights, dist, thresholds)
        for i in range(len(thresholds)):
            ans = interval_answer(i, req[i])
            if ans is not None:
                return ans
        raise AssertionError("final prohorov interval is always feasible")

    if method != "flow":
        raise GdsError(f"unknown prohorov method {method!r}")

    # Feasibility of an interval is monotone in its index, so bisect for the
    # first interval containing a feasible eps, then read off its least one.
    def requirement(i: int) -> Scalar:
        return _prohorov_requirement_flow(mu_weights, nu_weights, dist, thresholds[i])

    def feasible(i: int) -> bool:
        if i + 1 < len(thresholds):
            return requirement(i) <= thresholds[i + 1]
        return True

    lo_i, hi_i = 0, len(thresholds) - 1
    while lo_i < hi_i:
        mid = (lo_i + hi_i) // 2
        if feasible(mid):
            hi_i = mid
        else:
            lo_i = mid + 1
    ans = interval_answer(lo_i, requirement(lo_i))
    if ans is None:
        raise AssertionError("bisection landed on an infeasible interval")
    return ans


def _neighborhood_mass_table(dist, weights, member_mask: int, thresholds):
    """mu({x : d(x, A) <= t}) for each threshold t, for one subset A."""
    n = len(weights)
    d_to_A = []
    for x in range(n):
        best = None
        for a in range(n):
            if member_mask >> a & 1:
                if best is None or dist[x][a] < best:
                    best = dist[x][a]
        d_to_A.append(best)
    masses = []
    for t in thresholds:
        acc = 0
        for x in range(n):
            if d_to_A[x] <= t:
                acc += weights[x]
        masses.append(acc)
    return masses


def _prohorov_requirements_brute(mu_weights, nu_weights, dist, thresholds):
    """For each threshold index i, the least eps any subset forces on the
    interval (t_i, t_{i+1}]: max over A of nu(A) - mu({d(.,A) <= t_i})."""
    n = len(mu_weights)
    req = [None] * len(thresholds)
    for mask in range(1, 1 << n):
        nu_mass = sum(nu_weights[x] for x in range(n) if mask >> x & 1)
        table = _neighborhood_mass_table(dist, mu_weights, mask, thresholds)
        for i, covered in enumerate(table):
            need = nu_mass - covered
            if req[i] is None or need > req[i]:
                req[i] = need
    return req


def _prohorov_requirement_flow(mu_weights, nu_weights, dist, t):
    """Same requirement via transportation duality: 1 - max coupling mass
    on the cells with d(x, y) <= t."""
    n = len(mu_weights)
    allowed = 0
    for x in range(n):
        for y in range(n):
            if dist[x][y] <= t:
                allowed |= 1 << (x * n + y)
    value, _ = max_flow_on_cells(mu_weights, nu_weights, allowed)
    total = sum(nu_weights)
    return total - value


def prohorov(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    dist: Sequence,
    method: str = "auto",
) -> Scalar:
    """Prohorov distance of two measures on one finite metric space.

    Defined through open neighborhoods: the least eps such that every set A
    satisfies mu({d(., A) < eps}) >= nu(A) - eps.  The requirement is
    piecewise constant on the half-open intervals between distance values,
    so the infimum is found exactly; it can sit at an interval's open left
    end, in which case it is a genuine unattained infimum.

    method: "brute" enumerates all subsets, "flow" evaluates the same
    requirement through max-flow duality, "auto" picks by size.  Both
    paths return identical values.
    """
    same_mode(mu.mode, nu.mode)
    if nu.n != mu.n:
        raise GdsError("prohorov needs two measures on one metric space")
    return prohorov_weights(mu.weights, nu.weights, dist, method)


# ---------------------------------------------------------------------------
# Partial and observable diameter
# ---------------------------------------------------------------------------


def _atoms(values: Sequence, weights: Sequence):
    acc = {}
    for v, w in zip(values, weights):
        acc[v] = acc.get(v, 0) + w
    items = sorted(acc.items())
    return [v for v, _ in items], [w for _, w in items]


def partial_diameter(values: Sequence, mu: DiscreteMeasure, alpha) -> Scalar:
    """Least diameter of a closed interval catching mass at least alpha.

    Computed on the pushforward of mu under the value row.  alpha <= 0
    returns 0 (the empty interval suffices); alpha > 1 is out of range.
    """
    if len(values) != mu.n:
        raise GdsError("value row disagrees with the measure's point count")
    if alpha > 1:
        raise GdsError("partial diameter is undefined for alpha > 1")
    if alpha <= 0:
        return 0
    vs, ws = _atoms(values, mu.weights)
    best = None
    j = -1
    window = 0
    for i in range(len(vs)):
        if j < i:
            j = i
            window = ws[i]
        while window < alpha and j + 1 < len(vs):
            j += 1
            window += ws[j]
        if window >= alpha:
            diam = vs[j] - vs[i]
            if best is None or diam < best:
                best = diam
        else:
            break
        window -= ws[i]
    if best is None:
        raise AssertionError("total mass 1 always covers alpha <= 1")
    return best


def observable_diameter(X: GeometricDataSet, kappa) -> Scalar:
    """Largest partial diameter, at level 1 - kappa, over the features."""
    alpha = 1 - kappa
    if alpha <= 0:
        return 0
    return max(
        partial_diameter(row, X.measure, alpha) for row in X.features.rows
    )


def od_breakpoints(X: GeometricDataSet) -> tuple:
    """kappa values where the observable diameter can jump.

    The partial diameter of a feature changes only when 1 - kappa crosses
    the mass of some contiguous value window, so those crossings (plus 0)
    enumerate every candidate discontinuity.
    """
    kappas = {0}
    for row in X.features.rows:
        _, ws = _atoms(row, X.measure.weights)
        u = len(ws)
        for i in range(u):
            acc = 0
            for j in range(i, u):
                acc += ws[j]
                kap = 1 - acc
                if 0 <= kap <= 1:
                    kappas.add(kap)
    return tuple(sorted(kappas))
