"""Convex-hull vertex access through conical hull frames.

Working with the full convex hull is avoided on purpose: for a hull vertex p,
the minimal set of difference vectors q - p whose cone equals the cone of all
of them (the frame) identifies exactly p's neighboring hull vertices. The
frame is found by membership tests: a vector belongs to the frame iff it is
not a nonnegative combination of the other vectors.

Membership testing inside conical_frame runs on a local active-set NNLS
first (a nonnegative reconstruction with zero residual is a self-certifying
witness), falling back to the exact LP only when no witness is found; the
LP-backed in_conical_hull stays as the reference form and is used by the
tests to certify every frame this module produces.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from . import lp
from .geometry import Point
from .skyline import CandidateSet

# residual threshold for NNLS cone membership on unit-normalized vectors
TAU_FRAME = 1e-7
# an apex is degenerate when some convex combination of unit difference
# vectors reaches the origin; the gray zone below gets a second look
TAU_POINTED = 1e-8
TAU_POINTED_RETRY = 1e-9


class DegenerateApexError(RuntimeError):
    """The apex is not a cone vertex of its difference vectors."""


@dataclass(frozen=True)
class ConeFrame:
    """Minimal generator subset of the difference cone at an apex."""

    apex: int
    frame_members: Tuple[int, ...]
    checked_against: int


def initial_vertex(candidates: Sequence[Point]) -> Point:
    """The candidate maximizing the uniform utility; ties to lowest id.

    Such a maximizer is always a convex-hull vertex, so it is a safe seed
    apex for the neighbor-walk display strategy.
    """
    if not len(candidates):
        raise ValueError("candidate set must be nonempty")
    best = None
    best_score = -np.inf
    d = candidates[0].coords.size
    for p in candidates:
        score = float(p.coords.sum()) / d
        if score > best_score or (score == best_score and p.id < best.id):
            best, best_score = p, score
    return best


def in_conical_hull(v, generators, tol: float = lp.TOL) -> bool:
    """True iff v is a nonnegative combination of the generators (LP form).

    Vectors are scaled to unit norm first; membership is invariant under
    positive scaling and the LP tolerance is absolute.
    """
    v = np.asarray(v, dtype=float)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise ValueError("v must be nonzero")
    gens = [np.asarray(g, dtype=float) for g in generators]
    if not gens:
        return False
    d = v.size
    for g in gens:
        if g.size != d:
            raise ValueError("dimension mismatch")
    unit_v = v / norm
    cols = []
    for g in gens:
        g_norm = float(np.linalg.norm(g))
        cols.append(g / g_norm if g_norm > 0 else g)
    A = np.array(cols).T  # d rows, one column per generator
    rows = [(A[j], "=", unit_v[j]) for j in range(d)]
    return lp.feasible(rows, num_vars=len(gens))


def _nnls_small(columns: np.ndarray, v: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Nonnegative least squares tuned for systems with very few rows.

    Lawson-Hanson active set: the passive set cannot usefully exceed the row
    count, so every inner solve stays tiny no matter how many columns there
    are. Iteration caps guard degenerate inputs; the caller judges the result
    by its residual, so an early exit is merely a weaker witness search.
    """
    d, m = columns.shape
    x = np.zeros(m)
    in_passive = np.zeros(m, dtype=bool)
    resid = np.array(v, dtype=float)
    for _ in range(2 * d + 12):
        grad = columns.T @ resid
        grad[in_passive] = -np.inf
        j = int(np.argmax(grad))
        if grad[j] <= tol:
            break
        in_passive[j] = True
        for _ in range(2 * d + 8):
            passive = np.flatnonzero(in_passive)
            z = np.linalg.lstsq(columns[:, passive], v, rcond=None)[0]
            if z.min() > 0.0:
                x.fill(0.0)
                x[passive] = z
                break
            xp = x[passive]
            shrink = z <= 0.0
            denom = xp[shrink] - z[shrink]
            steps = np.where(denom > 1e-300, xp[shrink] / denom, 0.0)
            alpha = float(steps.min())
            x[passive] = xp + alpha * (z - xp)
            drop = passive[x[passive] <= tol]
            x[drop] = 0.0
            in_passive[drop] = False
        resid = v - columns @ x
    return x


def _cone_witness(columns: np.ndarray, v: np.ndarray, tol: float = TAU_FRAME) -> bool:
    """Certified cone membership: an explicit nonnegative reconstruction.

    The residual is recomputed from the returned weights rather than trusted
    from the solver, so a True here is always backed by a witness. A False
    only means no witness was found and is not a proof of non-membership.
    """
    if columns.shape[1] == 0:
        return False
    x = _nnls_small(columns, v)
    return float(np.linalg.norm(columns @ x - v)) <= tol


def _lp_in_cone(columns: np.ndarray, v: np.ndarray) -> bool:
    """Exact membership verdict for unit vectors via the LP core."""
    rows = [(columns[j], "=", float(v[j])) for j in range(columns.shape[0])]
    return lp.feasible(rows, num_vars=columns.shape[1])


def _unit_differences(apex: Point, others: Sequence[Point]):
    """Deduped unit difference directions; keeps the farthest point per ray."""
    rep: dict = {}
    order: list = []
    for q in others:
        diff = q.coords - apex.coords
        norm = float(np.linalg.norm(diff))
        if norm == 0.0:
            raise ValueError("apex appears among the other points")
        unit = diff / norm
        key = tuple(np.round(unit, 9))
        if key not in rep:
            rep[key] = (unit, norm, q.id)
            order.append(key)
        elif norm > rep[key][1]:
            rep[key] = (unit, norm, q.id)
    units = np.array([rep[k][0] for k in order])
    ids = [rep[k][2] for k in order]
    return units, ids


def _min_combination_norm(units: np.ndarray) -> float:
    """min over convex combinations w of the L-inf norm of units.T @ w."""
    m, d = units.shape
    # variables: w (m, nonnegative) then z; minimize z
    objective = np.zeros(m + 1)
    objective[m] = -1.0
    rows = [(np.concatenate([np.ones(m), [0.0]]), "=", 1.0)]
    for j in range(d):
        col = units[:, j]
        rows.append((np.concatenate([col, [-1.0]]), "<=", 0.0))
        rows.append((np.concatenate([-col, [-1.0]]), "<=", 0.0))
    out = lp.solve(lp.LinearProgram(objective, rows, num_vars=m + 1))
    if out.status != lp.OPTIMAL:
        raise RuntimeError("pointedness LP must be solvable")
    return -out.objective_value


def conical_frame(apex: Point, others: Sequence[Point]) -> ConeFrame:
    """Minimal subset of difference vectors with the same cone as all of them.

    Incremental scheme: keep a certified frame, test each vector against it
    first (cheap), and only fall back to the full membership test when the
    partial cone does not already cover the vector.
    """
    if not len(others):
        raise ValueError("need at least one point besides the apex")
    units, ids = _unit_differences(apex, others)
    m = units.shape[0]
    if m == 1:
        return ConeFrame(apex=apex.id, frame_members=(ids[0],), checked_against=1)

    closest = _min_combination_norm(units)
    if closest <= TAU_POINTED:
        # gray zone gets one look at the tighter threshold before giving up
        if closest <= TAU_POINTED_RETRY:
            raise DegenerateApexError(
                f"apex {apex.id}: origin within {closest:.2e} of the difference cone"
            )

    cols = units.T  # d rows, m columns
    frame_cols: list = []
    frame_pos: list = []
    for i in range(m):
        v = units[i]
        if frame_cols and _cone_witness(np.array(frame_cols).T, v):
            continue  # covered by certified members
        rest = np.delete(cols, i, axis=1)
        if _cone_witness(rest, v):
            continue  # covered by the full set: permanently redundant
        if _lp_in_cone(rest, v):
            continue  # witness search failed but the LP settles it
        frame_cols.append(v)
        frame_pos.append(i)
    members = tuple(ids[i] for i in frame_pos)
    return ConeFrame(apex=apex.id, frame_members=members, checked_against=m)


def neighbors(apex: Point, candidates: Sequence[Point]) -> list:
    """Candidate points adjacent to the apex on the convex hull.

    If the apex is not the best candidate under the user's utility vector,
    at least one returned point scores strictly higher, which is what makes
    the apex walk ascend.
    """
    others = [q for q in candidates if q.id != apex.id]
    if not others:
        return []
    frame = conical_frame(apex, others)
    member_ids = set(frame.frame_members)
    return [q for q in others if q.id in member_ids]
