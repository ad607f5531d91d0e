"""Domination and isomorphism checks by exhaustive map enumeration.

Both relations quantify over measurable maps; on finite point sets every
map is a total assignment, so enumeration is complete and the verdicts
are decisions, not heuristics.  Maps are tried in lexicographic order and
the first witness wins, which keeps reruns reproducible.
"""

from __future__ import annotations

import itertools
from typing import Optional, Sequence

from .core import GeometricDataSet, pushforward_vector
from .errors import BudgetExceeded
from .numerics import EXACT, FLOAT_TOL, same_mode

MAP_BUDGET = 50000


def _sup_gap(a: Sequence, b: Sequence):
    return max(abs(x - y) for x, y in zip(a, b))


def _tolerance(mode: str, tol) -> object:
    if tol is not None:
        return tol
    return 0 if mode == EXACT else FLOAT_TOL


def _measure_matches(X, Y, assignment, tol) -> bool:
    pushed = pushforward_vector(X.measure, assignment, Y.n)
    return all(abs(p - w) <= tol for p, w in zip(pushed, Y.measure.weights))


def _maps(X: GeometricDataSet, Y: GeometricDataSet, map_budget: int):
    count = Y.n ** X.n
    if count > map_budget:
        raise BudgetExceeded(
            f"{count} candidate maps exceed the budget {map_budget}"
        )
    return itertools.product(range(Y.n), repeat=X.n)


def check_domination(
    X: GeometricDataSet,
    Y: GeometricDataSet,
    tol=None,
    map_budget: int = MAP_BUDGET,
) -> tuple:
    """Does X dominate Y?  (verdict, witness map X -> Y or None).

    A witness pushes the measure of X onto that of Y and pulls every
    feature of Y back to (within tol of) some feature of X.  Any such map
    is automatically 1-Lipschitz for the induced metrics, so no separate
    continuity check is needed.
    """
    mode = same_mode(X.mode, Y.mode)
    eps = _tolerance(mode, tol)
    for assignment in _maps(X, Y, map_budget):
        if not _measure_matches(X, Y, assignment, eps):
            continue
        pulled = [
            tuple(g[assignment[x]] for x in range(X.n)) for g in Y.features.rows
        ]
        if all(
            any(_sup_gap(p, f) <= eps for f in X.features.rows) for p in pulled
        ):
            return True, assignment
    return False, None


def check_isomorphism(
    X: GeometricDataSet,
    Y: GeometricDataSet,
    tol=None,
    map_budget: int = MAP_BUDGET,
) -> tuple:
    """Are the two spaces the same up to relabeling?

    A witness is measure preserving and pulls the feature family of Y back
    to exactly the family of X as a set of rows (mutually within tol).
    With full-support measures and separating families this forces the map
    to be a bijection, so no inverse needs to be searched separately.
    """
    mode = same_mode(X.mode, Y.mode)
    eps = _tolerance(mode, tol)
    for assignment in _maps(X, Y, map_budget):
        if not _measure_matches(X, Y, assignment, eps):
            continue
        pulled = [
            tuple(g[assignment[x]] for x in range(X.n)) for g in Y.features.rows
        ]
        forward = all(
            any(_sup_gap(p, f) <= eps for f in X.features.rows) for p in pulled
        )
        backward = all(
            any(_sup_gap(p, f) <= eps for p in pulled) for f in X.features.rows
        )
        if forward and backward:
            return True, assignment
    return False, None
