"""Couplings of two finite measures and the solvers that search over them.

A coupling is a nonnegative matrix with prescribed row and column sums.
Three search routes live here and deliberately stay independent of each
other so they can cross-validate:

  * max_mass_on_set: bipartite max-flow, specialised and fast;
  * feasibility_lp: a dense two-phase simplex with Bland's rule, exact in
    rational arithmetic, handling several set-mass constraints at once;
  * enumerate_couplings: explicit vertex enumeration of the transportation
    polytope on tiny grids, plus a deterministic mixture lattice.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .core import DiscreteMeasure
from .errors import (
    GdsError,
    InfeasibleMarginals,
    MarginalMismatch,
    SizeLimit,
)
from .flows import max_flow_on_cells
from .metrics import CellSet, prohorov_weights
from .numerics import EXACT, FLOAT, FLOAT_TOL, Q, Scalar, check_mode, same_mode

VERTEX_CELL_LIMIT = 9


@dataclass(frozen=True)
class Coupling:
    """Nonnegative matrix on the n x m grid; marginals live with the caller."""

    matrix: tuple
    mode: str = EXACT

    def __post_init__(self):
        check_mode(self.mode)
        if not self.matrix or not self.matrix[0]:
            raise GdsError("a coupling needs a nonempty matrix")
        width = len(self.matrix[0])
        tol = 0 if self.mode == EXACT else FLOAT_TOL
        for row in self.matrix:
            if len(row) != width:
                raise GdsError("coupling rows have inconsistent lengths")
            for v in row:
                if v < -tol:
                    raise GdsError(f"negative coupling entry {v!r}")

    @classmethod
    def build(cls, rows: Sequence[Sequence], mode: str = EXACT) -> "Coupling":
        if mode == FLOAT:
            frozen = tuple(
                tuple(max(0.0, float(v)) for v in row) for row in rows
            )
        else:
            frozen = tuple(tuple(row) for row in rows)
        return cls(frozen, mode)

    @property
    def n(self) -> int:
        return len(self.matrix)

    @property
    def m(self) -> int:
        return len(self.matrix[0])

    def row_sums(self) -> tuple:
        return tuple(sum(row) for row in self.matrix)

    def col_sums(self) -> tuple:
        return tuple(
            sum(self.matrix[i][j] for i in range(self.n)) for j in range(self.m)
        )

    def mass(self, cells) -> Scalar:
        return sum((self.matrix[i][j] for (i, j) in cells), start=0)

    def support(self) -> tuple:
        return tuple(
            (i, j)
            for i in range(self.n)
            for j in range(self.m)
            if self.matrix[i][j] > 0
        )

    def check_marginals(self, mu: DiscreteMeasure, nu: DiscreteMeasure) -> None:
        same_mode(self.mode, mu.mode, nu.mode)
        tol = 0 if self.mode == EXACT else FLOAT_TOL
        for i, s in enumerate(self.row_sums()):
            if abs(s - mu.weights[i]) > tol:
                raise MarginalMismatch(f"row {i} sums to {s}, expected {mu.weights[i]}")
        for j, s in enumerate(self.col_sums()):
            if abs(s - nu.weights[j]) > tol:
                raise MarginalMismatch(f"col {j} sums to {s}, expected {nu.weights[j]}")


def product_coupling(mu: DiscreteMeasure, nu: DiscreteMeasure) -> Coupling:
    """The independent coupling mu x nu."""
    mode = same_mode(mu.mode, nu.mode)
    rows = tuple(
        tuple(mu.weights[i] * nu.weights[j] for j in range(nu.n))
        for i in range(mu.n)
    )
    return Coupling(rows, mode)


def _completed_plan(mu, nu, plan, mode):
    """Extend a partial transport plan to a full coupling.

    Residual row and column masses are matched with their product
    completion, which is again a valid filling because both residual
    vectors carry the same total.
    """
    n, m = mu.n, nu.n
    res_mu = [mu.weights[i] - sum(plan[i]) for i in range(n)]
    res_nu = [nu.weights[j] - sum(plan[i][j] for i in range(n)) for j in range(m)]
    leftover = sum(res_mu)
    rows = [list(plan[i]) for i in range(n)]
    if leftover > 0:
        for i in range(n):
            if res_mu[i] == 0:
                continue
            for j in range(m):
                if res_nu[j] == 0:
                    continue
                rows[i][j] += res_mu[i] * res_nu[j] / leftover
    return Coupling(tuple(tuple(r) for r in rows), mode)


def max_mass_on_set(
    mu: DiscreteMeasure, nu: DiscreteMeasure, cells: CellSet
) -> tuple[Scalar, Coupling]:
    """Largest coupling mass placeable on a cell set, with a witness.

    Solved by bipartite max-flow; the witness is the flow plan completed to
    a genuine coupling by product-filling the residual marginals.  The
    filled mass cannot land on the target set (that would beat the
    maximum), so the witness attains exactly the returned value.
    """
    mode = same_mode(mu.mode, nu.mode)
    if cells.n != mu.n or cells.m != nu.n:
        raise GdsError("cell set shape disagrees with the marginals")
    value, plan = max_flow_on_cells(mu.weights, nu.weights, cells.to_mask())
    coupling = _completed_plan(mu, nu, plan, mode)
    coupling.check_marginals(mu, nu)
    return value, coupling


# ---------------------------------------------------------------------------
# Exact simplex
# ---------------------------------------------------------------------------


def _simplex(rows, rhs, costs, mode):
    """Two-phase dense simplex with Bland's rule, minimising costs . x.

    rows/rhs describe equality constraints Ax = b with x >= 0.  Returns
    (feasible, solution list, optimal value).  Exact mode never divides
    inexactly; float mode uses a small pivot tolerance.
    """
    eps = 0 if mode == EXACT else 1e-12
    coerce = (lambda v: Q(v)) if mode == EXACT else float
    n_rows = len(rows)
    n_cols = len(costs)
    costs = [coerce(c) for c in costs]
    tab = []
    for r in range(n_rows):
        row = [coerce(v) for v in rows[r]]
        b = coerce(rhs[r])
        if b < 0:
            row = [-v for v in row]
            b = -b
        # One artificial per row, identity block appended after real columns.
        art = [coerce(0)] * n_rows
        art[r] = coerce(1)
        tab.append(row + art + [b])
    basis = [n_cols + r for r in range(n_rows)]
    total_cols = n_cols + n_rows

    def pivot(pr, pc):
        prow = tab[pr]
        pv = prow[pc]
        inv = [v / pv for v in prow]
        tab[pr] = inv
        for r in range(len(tab)):
            if r == pr:
                continue
            factor = tab[r][pc]
            if factor != 0:
                row = tab[r]
                tab[r] = [row[k] - factor * inv[k] for k in range(len(row))]
        basis[pr] = pc

    def run_phase(cost_vec, blocked):
        # Reduced-cost row for the current basis, rebuilt from scratch.
        while True:
            red = list(cost_vec)
            for r in range(len(tab)):
                cb = cost_vec[basis[r]]
                if cb != 0:
                    row = tab[r]
                    for k in range(total_cols):
                        if row[k] != 0:
                            red[k] -= cb * row[k]
            enter = -1
            for k in range(total_cols):
                if k in blocked:
                    continue
                if red[k] < -eps:
                    enter = k
                    break
            if enter < 0:
                return
            leave = -1
            best_ratio = None
            for r in range(len(tab)):
                a = tab[r][enter]
                if a > eps:
                    ratio = tab[r][-1] / a
                    if (
                        best_ratio is None
                        or ratio < best_ratio
                        or (ratio == best_ratio and basis[r] < basis[leave])
                    ):
                        best_ratio = ratio
                        leave = r
            if leave < 0:
                raise GdsError("unbounded linear program")
            pivot(leave, enter)

    phase1_cost = [0] * n_cols + [1] * n_rows
    run_phase(phase1_cost, blocked=set())
    infeas = sum(phase1_cost[basis[r]] * tab[r][-1] for r in range(len(tab)))
    if infeas > (0 if mode == EXACT else FLOAT_TOL):
        return False, None, None

    # Drive leftover artificials out of the basis or drop redundant rows.
    r = 0
    while r < len(tab):
        if basis[r] >= n_cols:
            pivot_col = -1
            for k in range(n_cols):
                if abs(tab[r][k]) > eps:
                    pivot_col = k
                    break
            if pivot_col >= 0:
                pivot(r, pivot_col)
                r += 1
            else:
                del tab[r]
                del basis[r]
        else:
            r += 1

    blocked = set(range(n_cols, total_cols))
    full_costs = list(costs) + [0] * n_rows
    run_phase(full_costs, blocked)
    solution = [0] * n_cols
    for r in range(len(tab)):
        if basis[r] < n_cols:
            solution[basis[r]] = tab[r][-1]
    value = sum(costs[k] * solution[k] for k in range(n_cols) if solution[k] != 0)
    return True, solution, value


OBJECTIVES = ("feasibility", "minimize-common-cap", "maximize-mass-on-set")


@dataclass(frozen=True)
class SetMassProgram:
    """Transport program with mass caps on cell sets.

    constraints is a tuple of (CellSet, cap) pairs.  The cap scalars are
    read only in feasibility mode; the other two objectives quantify over
    them instead.
    """

    mu: DiscreteMeasure
    nu: DiscreteMeasure
    constraints: tuple = field(default=())
    objective: str = "feasibility"

    def __post_init__(self):
        same_mode(self.mu.mode, self.nu.mode)
        if self.objective not in OBJECTIVES:
            raise GdsError(f"unknown objective {self.objective!r}")
        for (cells, _cap) in self.constraints:
            if cells.n != self.mu.n or cells.m != self.nu.n:
                raise GdsError("constraint cell set disagrees with the marginals")
        if self.objective == "maximize-mass-on-set" and len(self.constraints) != 1:
            raise GdsError("maximize-mass-on-set takes exactly one cell set")


def feasibility_lp(
    prog: SetMassProgram,
) -> tuple[bool, Optional[Coupling], Optional[Scalar]]:
    """Solve a SetMassProgram by the exact simplex.

    feasibility: is there a coupling with pi(B_k) <= cap_k for all k?
    minimize-common-cap: least t admitting a coupling with pi(B_k) <= t.
    maximize-mass-on-set: largest pi(B) over couplings.

    Returns (feasible, witness coupling, optimal scalar or None).
    """
    mu, nu = prog.mu, prog.nu
    mode = same_mode(mu.mode, nu.mode)
    tol = 0 if mode == EXACT else FLOAT_TOL
    if abs(sum(mu.weights) - sum(nu.weights)) > tol:
        raise InfeasibleMarginals("marginals carry different total mass")
    n, m = mu.n, nu.n
    ncells = n * m
    K = len(prog.constraints)

    has_t = prog.objective == "minimize-common-cap"
    n_slack = K if prog.objective in ("feasibility", "minimize-common-cap") else 0
    t_col = ncells
    slack0 = ncells + (1 if has_t else 0)
    n_cols = slack0 + n_slack

    rows, rhs = [], []
    for i in range(n):
        row = [0] * n_cols
        for j in range(m):
            row[i * m + j] = 1
        rows.append(row)
        rhs.append(mu.weights[i])
    for j in range(m):
        row = [0] * n_cols
        for i in range(n):
            row[i * m + j] = 1
        rows.append(row)
        rhs.append(nu.weights[j])
    if prog.objective != "maximize-mass-on-set":
        for k, (cells, cap) in enumerate(prog.constraints):
            row = [0] * n_cols
            for (i, j) in cells:
                row[i * m + j] = 1
            row[slack0 + k] = 1
            if has_t:
                row[t_col] = -1
                rows.append(row)
                rhs.append(0)
            else:
                rows.append(row)
                rhs.append(cap)

    costs = [0] * n_cols
    if prog.objective == "minimize-common-cap":
        costs[t_col] = 1
    elif prog.objective == "maximize-mass-on-set":
        cells, _cap = prog.constraints[0]
        for (i, j) in cells:
            costs[i * m + j] = -1

    feasible, solution, value = _simplex(rows, rhs, costs, mode)
    if not feasible:
        return False, None, None
    matrix = tuple(
        tuple(solution[i * m + j] for j in range(m)) for i in range(n)
    )
    witness = Coupling.build(matrix, mode)
    witness.check_marginals(mu, nu)
    if prog.objective == "feasibility":
        return True, witness, None
    if prog.objective == "minimize-common-cap":
        return True, witness, solution[t_col]
    return True, witness, -value


# ---------------------------------------------------------------------------
# Gluing and comparison
# ---------------------------------------------------------------------------


def glue(pi_xy: Coupling, pi_yz: Coupling) -> tuple[tuple, Coupling]:
    """Glue two couplings along their shared middle marginal.

    rho(x,y,z) = pi_xy(x,y) * pi_yz(y,z) / nu(y), with 0/0 read as 0.
    Returns the triple tensor and its (x,z) marginal as a Coupling.
    """
    mode = same_mode(pi_xy.mode, pi_yz.mode)
    tol = 0 if mode == EXACT else FLOAT_TOL
    mid_a = pi_xy.col_sums()
    mid_b = pi_yz.row_sums()
    if len(mid_a) != len(mid_b) or any(
        abs(a - b) > tol for a, b in zip(mid_a, mid_b)
    ):
        raise MarginalMismatch("middle marginals disagree; cannot glue")
    n, mid, p = pi_xy.n, pi_xy.m, pi_yz.m
    tensor = []
    for x in range(n):
        plane = []
        for y in range(mid):
            ny = mid_a[y]
            if ny == 0:
                plane.append((0,) * p)
                continue
            a = pi_xy.matrix[x][y]
            plane.append(tuple(a * pi_yz.matrix[y][z] / ny for z in range(p)))
        tensor.append(tuple(plane))
    xz = tuple(
        tuple(sum(tensor[x][y][z] for y in range(mid)) for z in range(p))
        for x in range(n)
    )
    return tuple(tensor), Coupling(xz, mode)


def coupling_prohorov(
    pi: Coupling, rho: Coupling, dist_x: Sequence, dist_y: Sequence
) -> Scalar:
    """Prohorov distance between two couplings of the same pair of spaces.

    Both are read as measures on the product grid under the sup combination
    max(d_X, d_Y) of the two ground metrics.
    """
    mode = same_mode(pi.mode, rho.mode)
    del mode
    n, m = pi.n, pi.m
    if rho.n != n or rho.m != m:
        raise GdsError("couplings live on different grids")
    flat_pi = [pi.matrix[i][j] for i in range(n) for j in range(m)]
    flat_rho = [rho.matrix[i][j] for i in range(n) for j in range(m)]
    dist = []
    for i in range(n):
        for j in range(m):
            row = []
            for i2 in range(n):
                for j2 in range(m):
                    dx = dist_x[i][i2]
                    dy = dist_y[j][j2]
                    row.append(dx if dx >= dy else dy)
            dist.append(row)
    method = "brute" if n * m <= 9 else "flow"
    return prohorov_weights(flat_pi, flat_rho, dist, method)


# ---------------------------------------------------------------------------
# Vertex and lattice enumeration
# ---------------------------------------------------------------------------


def _forest_flows(n, m, edges, mu, nu):
    """Unique flow on a spanning forest of the transport graph, or None.

    Peels degree-one nodes; each leaf pins its incident edge's flow to the
    node's remaining marginal.  Returns the matrix if all flows end up
    nonnegative and all marginals are exhausted.
    """
    need = list(mu) + list(nu)
    adj = {u: set() for u in range(n + m)}
    for (i, j) in edges:
        adj[i].add((i, j))
        adj[n + j].add((i, j))
    flow = {}
    pending = set(edges)
    while pending:
        leaf = None
        for u in range(n + m):
            live = [e for e in adj[u] if e in pending]
            if len(live) == 1:
                leaf = (u, live[0])
                break
        if leaf is None:
            return None  # a cycle survives; not a forest
        u, (i, j) = leaf
        amount = need[u]
        if amount < 0:
            return None
        flow[(i, j)] = amount
        need[i] -= amount
        need[n + j] -= amount
        pending.discard((i, j))
    if any(v != 0 for v in need):
        return None
    if any(v < 0 for v in flow.values()):
        return None
    zero = mu[0] - mu[0]
    matrix = [[zero] * m for _ in range(n)]
    for (i, j), v in flow.items():
        matrix[i][j] = v
    return tuple(tuple(r) for r in matrix)


def transportation_vertices(mu: DiscreteMeasure, nu: DiscreteMeasure) -> tuple:
    """All vertices of the transportation polytope, deduplicated.

    Any vertex is the unique flow on some spanning forest with at most
    n + m - 1 edges, so scanning the edge subsets of that size finds all
    of them.  Capped at 9 cells, which keeps the scan at a few hundred
    candidates.
    """
    mode = same_mode(mu.mode, nu.mode)
    n, m = mu.n, nu.n
    if n * m > VERTEX_CELL_LIMIT:
        raise SizeLimit(
            f"vertex enumeration caps at {VERTEX_CELL_LIMIT} cells, got {n * m}"
        )
    from itertools import combinations

    cells = [(i, j) for i in range(n) for j in range(m)]
    target = min(n + m - 1, len(cells))
    seen = {}
    for edges in combinations(cells, target):
        matrix = _forest_flows(n, m, edges, mu.weights, nu.weights)
        if matrix is not None and matrix not in seen:
            seen[matrix] = Coupling(matrix, mode)
    return tuple(seen[k] for k in sorted(seen))


def _northwest_corner(mu, nu, row_order, col_order, mode):
    n, m = len(mu), len(nu)
    zero = mu[0] - mu[0]
    remaining_mu = list(mu)
    remaining_nu = list(nu)
    matrix = [[zero] * m for _ in range(n)]
    ri = ci = 0
    while ri < n and ci < m:
        i, j = row_order[ri], col_order[ci]
        amount = min(remaining_mu[i], remaining_nu[j])
        matrix[i][j] += amount
        remaining_mu[i] -= amount
        remaining_nu[j] -= amount
        if remaining_mu[i] == 0:
            ri += 1
        if remaining_nu[j] == 0:
            ci += 1
    return Coupling(tuple(tuple(r) for r in matrix), mode)


def enumerate_couplings(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    method: str = "vertices",
    resolution: int = 4,
) -> tuple:
    """Finite, deterministic slices of the coupling polytope.

    "vertices" lists the polytope's vertices exactly (small grids only).
    "grid" is a mixture lattice: corner couplings from the four monotone
    orders plus the product coupling, blended pairwise with weights
    k/resolution.  Every emitted matrix satisfies the marginals exactly,
    in both modes, since the polytope is convex.
    """
    mode = same_mode(mu.mode, nu.mode)
    if method == "vertices":
        return transportation_vertices(mu, nu)
    if method != "grid":
        raise GdsError(f"unknown enumeration method {method!r}")
    if resolution < 1:
        raise GdsError("grid resolution must be at least 1")
    n, m = mu.n, nu.n
    anchors = [product_coupling(mu, nu)]
    orders = [
        (range(n), range(m)),
        (range(n), reversed(range(m))),
        (reversed(range(n)), range(m)),
        (reversed(range(n)), reversed(range(m))),
    ]
    for ro, co in orders:
        anchors.append(
            _northwest_corner(mu.weights, nu.weights, list(ro), list(co), mode)
        )
    out = {}
    for a in range(len(anchors)):
        for b in range(len(anchors)):
            for k in range(resolution + 1):
                lam = k / resolution if mode == FLOAT else Q(k, resolution)
                matrix = tuple(
                    tuple(
                        lam * anchors[a].matrix[i][j]
                        + (1 - lam) * anchors[b].matrix[i][j]
                        for j in range(m)
                    )
                    for i in range(n)
                )
                if matrix not in out:
                    out[matrix] = Coupling(matrix, mode)
    return tuple(out[k] for k in sorted(out))
