"""Interactive session state machine: display, feedback, shrink, prune, stop.

A Session owns the candidate set and the utility polytope and advances one
feedback submission at a time. Display selection, polytope shrinking, and
candidate pruning are delegated to the pure geometry/hull modules; this
module sequences them and enforces the stop conditions.

Randomness is drawn from per-round streams seeded as (session_seed, round,
channel), so replaying a recorded feedback sequence reproduces the session
exactly regardless of how many times displays were inspected along the way.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import hull
from .data_io import Dataset
from .geometry import (
    Point,
    UtilityPolytope,
    centroid_utility,
    coordinate_maximizers,
    drop_redundant,
    is_empty,
    l1_width,
    shrink_with_choice,
    shrink_with_sort,
    utility,
)
from .skyline import CandidateSet, compute_skyline

SCHEMA_VERSION = 1

SIMPLEX_NEIGHBORS = "simplex_neighbors"
RANDOM_DISPLAY = "random"
FULL_SORT = "full_sort"
FAVORITE_ONLY = "favorite_only"

AWAITING_FEEDBACK = "awaiting_feedback"
CONVERGED = "converged"
STOPPED = "stopped"

STOP_SINGLE = "single_candidate"
STOP_WIDTH = "width"
STOP_STAGNATION = "stagnation"
STOP_INFEASIBLE = "infeasible_feedback"

# Candidate-count threshold above which pairwise pruning is sampled.
PRUNE_CAP = 500
PRUNE_SAMPLE_PAIRS = 200
# LP confirmations attempted per candidate before giving up on pruning it.
PRUNE_TRIES = 3
# Rounds with an unchanged (candidates, apex, polytope) fingerprint before
# the session is declared out of obtainable information.
STAGNANT_LIMIT = 3
# Completed-round interval for dropping redundant polytope halfspaces.
REDUNDANCY_INTERVAL = 5

_PRUNE_TOL = 1e-10


class StaleRoundError(RuntimeError):
    """Feedback referenced a display that is no longer pending."""


class FeedbackError(ValueError):
    """Feedback content does not match the pending display."""


@dataclass(frozen=True)
class Strategy:
    display: str
    feedback: str

    def __post_init__(self):
        if self.display not in (SIMPLEX_NEIGHBORS, RANDOM_DISPLAY):
            raise ValueError(f"unknown display mode {self.display!r}")
        if self.feedback not in (FULL_SORT, FAVORITE_ONLY):
            raise ValueError(f"unknown feedback mode {self.feedback!r}")


ALGORITHMS: Dict[str, Strategy] = {
    "sorting-simplex": Strategy(SIMPLEX_NEIGHBORS, FULL_SORT),
    "sorting-random": Strategy(RANDOM_DISPLAY, FULL_SORT),
    "uh-simplex": Strategy(SIMPLEX_NEIGHBORS, FAVORITE_ONLY),
    "uh-random": Strategy(RANDOM_DISPLAY, FAVORITE_ONLY),
}


def algorithm_name(strategy: Strategy) -> str:
    for name, st in ALGORITHMS.items():
        if st == strategy:
            return name
    raise ValueError("strategy matches no named algorithm")


@dataclass
class DisplayRecord:
    round: int
    shown: List[int]
    response: dict
    candidates_before: int
    candidates_after: int
    width_before: float
    width_after: float


@dataclass
class Session:
    dataset: Dataset
    candidates: CandidateSet
    polytope: UtilityPolytope
    strategy: Strategy
    s: int
    epsilon: float
    rng_seed: int
    current_apex: int
    initial_apex: int
    round: int = 0
    history: List[DisplayRecord] = field(default_factory=list)
    status: str = AWAITING_FEEDBACK
    stop_reason: Optional[str] = None
    pending_display: Optional[List[int]] = None
    _stagnant: int = 0
    _fingerprint: Optional[tuple] = None

    def point(self, point_id: int) -> Point:
        return self.dataset.points[point_id]

    def candidate_points(self) -> List[Point]:
        return [self.point(i) for i in self.candidates]


def start_session(
    dataset: Dataset,
    strategy: Strategy,
    s: int,
    epsilon: float,
    seed: int = 0,
) -> Session:
    """Skyline candidates, full-simplex polytope, hull-vertex apex."""
    if dataset.n < 2:
        raise ValueError("dataset too small: need at least 2 points")
    if not 2 <= s <= 10:
        raise ValueError("s must be between 2 and 10")
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must be in [0, 1]")
    candidates = compute_skyline(dataset.points)
    if s > len(candidates):
        raise ValueError(
            f"s={s} exceeds the skyline size {len(candidates)}"
        )
    apex = hull.initial_vertex([dataset.points[i] for i in candidates])
    session = Session(
        dataset=dataset,
        candidates=candidates,
        polytope=UtilityPolytope(dataset.d),
        strategy=strategy,
        s=s,
        epsilon=epsilon,
        rng_seed=seed,
        current_apex=apex.id,
        initial_apex=apex.id,
    )
    _prepare_display(session)
    return session


def _rng(session: Session, round_index: int, channel: int) -> np.random.Generator:
    return np.random.default_rng([session.rng_seed, round_index, channel])


def _prepare_display(session: Session) -> None:
    """Choose and store the point set for the pending round."""
    cand_ids = list(session.candidates)
    if len(cand_ids) == 1:
        session.pending_display = cand_ids
        session.status = CONVERGED
        session.stop_reason = STOP_SINGLE
        return
    rng = _rng(session, session.round, 0)
    shown: Optional[List[int]] = None
    if session.strategy.display == SIMPLEX_NEIGHBORS:
        shown = _simplex_display(session, rng)
        if shown is not None and session.history:
            # An identical repeat of the last display cannot add information;
            # fall through to a random draw for this round instead.
            if set(shown) == set(session.history[-1].shown):
                shown = None
    if shown is None:
        size = min(session.s, len(cand_ids))
        picks = rng.choice(len(cand_ids), size=size, replace=False)
        shown = [cand_ids[i] for i in picks]
    session.pending_display = shown


def _simplex_display(session: Session, rng: np.random.Generator) -> Optional[List[int]]:
    """Apex plus up to s-1 hull neighbors, or None when the frame fails."""
    apex = session.point(session.current_apex)
    others = [p for p in session.candidate_points() if p.id != apex.id]
    try:
        neigh = hull.neighbors(apex, others)
    except hull.DegenerateApexError:
        return None
    if not neigh:
        return None
    if len(neigh) > session.s - 1:
        picks = rng.choice(len(neigh), size=session.s - 1, replace=False)
        neigh = [neigh[i] for i in sorted(picks)]
    return [apex.id] + [p.id for p in neigh]


def next_display(session: Session) -> List[Point]:
    """The pending round's points; stable until feedback arrives."""
    if session.pending_display is None:
        raise RuntimeError("session has no pending display")
    return [session.point(i) for i in session.pending_display]


def prune_candidates(
    candidates: CandidateSet,
    polytope: UtilityPolytope,
    points: Sequence[Point],
    displayed: Optional[Sequence[int]] = None,
    rng: Optional[np.random.Generator] = None,
) -> CandidateSet:
    """Drop candidates that lose to some other candidate everywhere on F.

    A candidate i is removable when max f.(p_i - p_j) < 0 over the polytope
    for some j. Feasible witness vectors (centroid plus the per-coordinate
    maximizers) filter the pairs first: only a j that beats i under every
    witness can possibly certify a removal, so LPs run on a short list.
    Removals are collected against the full incoming set and applied at the
    end, which makes the result independent of scan order.
    """
    ids = list(candidates)
    m = len(ids)
    if m <= 1:
        return candidates
    coords = np.array([points[i].coords for i in ids])
    witnesses = [centroid_utility(polytope).weights]
    witnesses.extend(coordinate_maximizers(polytope))
    U = np.array(witnesses) @ coords.T  # (num_witnesses, m)

    allowed: Optional[np.ndarray] = None  # (m, m) pair mask, j prunes i
    if m > PRUNE_CAP:
        allowed = np.zeros((m, m), dtype=bool)
        pos = {pid: k for k, pid in enumerate(ids)}
        for pid in displayed or ():
            if pid in pos:
                allowed[:, pos[pid]] = True
        if rng is not None:
            ii = rng.integers(0, m, size=PRUNE_SAMPLE_PAIRS)
            jj = rng.integers(0, m, size=PRUNE_SAMPLE_PAIRS)
            allowed[ii, jj] = True

    removals = []
    for k in range(m):
        beats = np.all(U > U[:, k : k + 1], axis=0)
        if allowed is not None:
            beats &= allowed[k]
        if not beats.any():
            continue
        margins = np.min(U - U[:, k : k + 1], axis=0)
        margins[~beats] = -np.inf
        order = np.argsort(margins)[::-1]
        for j in order[:PRUNE_TRIES]:
            if margins[j] == -np.inf:
                break
            outcome = polytope.maximize(coords[k] - coords[j])
            if outcome.objective_value < -_PRUNE_TOL:
                removals.append(ids[k])
                break
    if not removals:
        return candidates
    return candidates.remove(removals, generation=candidates.generation + 1)


def _validate_submission(session: Session, round_index: Optional[int]) -> None:
    if session.status != AWAITING_FEEDBACK:
        raise RuntimeError(f"session is not awaiting feedback (status {session.status})")
    if round_index is not None and round_index != session.round:
        raise StaleRoundError(
            f"feedback targets round {round_index} but round {session.round} is pending"
        )


def _finish_round(
    session: Session,
    shrunk: UtilityPolytope,
    response: dict,
    width_before: float,
) -> Session:
    shown = list(session.pending_display)
    cand_before = len(session.candidates)

    if is_empty(shrunk):
        # Contradictory feedback: keep the last consistent polytope so the
        # session can still report a recommendation, and stop.
        session.status = STOPPED
        session.stop_reason = STOP_INFEASIBLE
        session.history.append(
            DisplayRecord(
                round=session.round,
                shown=shown,
                response=response,
                candidates_before=cand_before,
                candidates_after=cand_before,
                width_before=width_before,
                width_after=width_before,
            )
        )
        session.round += 1
        session.pending_display = None
        return session

    session.polytope = shrunk
    winner = response["order"][0] if "order" in response else response["favorite"]
    if winner != session.current_apex:
        session.current_apex = winner

    session.candidates = prune_candidates(
        session.candidates,
        session.polytope,
        session.dataset.points,
        displayed=shown,
        rng=_rng(session, session.round, 1),
    )
    if (session.round + 1) % REDUNDANCY_INTERVAL == 0:
        try:
            session.polytope = drop_redundant(session.polytope)
        except RuntimeError:
            pass  # redundancy removal is an optimization; degenerate LPs skip it

    width_after = l1_width(session.polytope)
    session.history.append(
        DisplayRecord(
            round=session.round,
            shown=shown,
            response=response,
            candidates_before=cand_before,
            candidates_after=len(session.candidates),
            width_before=width_before,
            width_after=width_after,
        )
    )
    session.round += 1
    session.pending_display = None

    mins, maxs, _ = session.polytope._coordinate_extremes()
    fingerprint = (
        session.candidates.points,
        session.current_apex,
        tuple(np.round(mins, 12)),
        tuple(np.round(maxs, 12)),
    )
    if fingerprint == session._fingerprint:
        session._stagnant += 1
    else:
        session._stagnant = 0
        session._fingerprint = fingerprint

    d = session.dataset.d
    if len(session.candidates) == 1:
        session.status = CONVERGED
        session.stop_reason = STOP_SINGLE
        session.pending_display = list(session.candidates)
    elif width_after <= session.epsilon / (2 * d):
        session.status = CONVERGED
        session.stop_reason = STOP_WIDTH
    elif session._stagnant >= STAGNANT_LIMIT:
        # Repeated rounds changed nothing the engine can observe; no further
        # feedback can separate the survivors.
        session.status = CONVERGED
        session.stop_reason = STOP_STAGNATION
    else:
        _prepare_display(session)
    return session


def submit_sort(
    session: Session,
    order: Sequence[int],
    ranks: Optional[Sequence[int]] = None,
    round_index: Optional[int] = None,
) -> Session:
    """Consume a full sort: C(s,2) cuts, apex update, prune, stop test."""
    _validate_submission(session, round_index)
    if session.strategy.feedback != FULL_SORT:
        raise FeedbackError("session expects favorite-only feedback")
    order = [int(i) for i in order]
    if sorted(order) != sorted(session.pending_display):
        raise FeedbackError("not a permutation of displayed points")
    width_before = l1_width(session.polytope)
    sorted_points = [session.point(i) for i in order]
    if len(sorted_points) == 1:
        shrunk = session.polytope
    else:
        shrunk = shrink_with_sort(session.polytope, sorted_points, ranks=ranks)
    response = {"kind": "sort", "order": order}
    if ranks is not None:
        response["ranks"] = [int(r) for r in ranks]
    return _finish_round(session, shrunk, response, width_before)


def submit_favorite(
    session: Session,
    favorite: int,
    round_index: Optional[int] = None,
) -> Session:
    """Consume a favorite choice: s-1 cuts, apex update, prune, stop test."""
    _validate_submission(session, round_index)
    if session.strategy.feedback != FAVORITE_ONLY:
        raise FeedbackError("session expects full-sort feedback")
    favorite = int(favorite)
    if favorite not in session.pending_display:
        raise FeedbackError("favorite not among displayed points")
    width_before = l1_width(session.polytope)
    others = [session.point(i) for i in session.pending_display if i != favorite]
    if not others:
        shrunk = session.polytope
    else:
        shrunk = shrink_with_choice(session.polytope, session.point(favorite), others)
    response = {"kind": "favorite", "favorite": favorite}
    return _finish_round(session, shrunk, response, width_before)


def recommend(session: Session) -> Tuple[Point, float]:
    """Best candidate under a representative utility, with a regret bound."""
    if not session.history:
        return session.point(session.initial_apex), 1.0
    f = centroid_utility(session.polytope)
    best = max(
        session.candidate_points(), key=lambda p: (utility(f, p), -p.id)
    )
    if session.stop_reason == STOP_SINGLE or len(session.candidates) == 1:
        bound = 0.0
    elif session.stop_reason == STOP_WIDTH:
        bound = session.epsilon
    else:
        # Early or stagnation stop: invert the width stop test for an
        # honest bound at the current width.
        bound = min(1.0, 2 * session.dataset.d * l1_width(session.polytope))
    return best, bound


def session_to_doc(session: Session) -> dict:
    """Self-contained JSON-shaped state for persistence and replay."""
    rec: Optional[dict] = None
    if session.history:
        point, bound = recommend(session)
        rec = {"id": point.id, "bound": bound}
    return {
        "schema_version": SCHEMA_VERSION,
        "dataset": session.dataset.name,
        "strategy": {
            "display": session.strategy.display,
            "feedback": session.strategy.feedback,
        },
        "algorithm": algorithm_name(session.strategy),
        "s": session.s,
        "epsilon": session.epsilon,
        "seed": session.rng_seed,
        "rounds": [
            {
                "round": r.round,
                "shown": list(r.shown),
                "response": dict(r.response),
                "candidates_before": r.candidates_before,
                "candidates_after": r.candidates_after,
                "width_before": r.width_before,
                "width_after": r.width_after,
            }
            for r in session.history
        ],
        "status": session.status,
        "stop_reason": session.stop_reason,
        "recommendation": rec,
    }
