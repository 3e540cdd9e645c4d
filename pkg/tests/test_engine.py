"""Session lifecycle, feedback validation, pruning, stop conditions, replay."""
import json

import numpy as np
import pytest

from sortpick.data_io import make_dataset
from sortpick.engine import (
    ALGORITHMS,
    AWAITING_FEEDBACK,
    CONVERGED,
    STOPPED,
    STOP_INFEASIBLE,
    STOP_SINGLE,
    STOP_STAGNATION,
    STOP_WIDTH,
    FeedbackError,
    StaleRoundError,
    Strategy,
    next_display,
    prune_candidates,
    recommend,
    session_to_doc,
    start_session,
    submit_favorite,
    submit_sort,
)
from sortpick.geometry import (
    Point,
    UtilityPolytope,
    Halfspace,
    contains_vector,
    utility,
)
from sortpick.simuser import HiddenUser, favorite, sort_with_ranks, true_regret
from sortpick.skyline import CandidateSet

CARS_RAW = [
    Point([0.4, 0.8], id=0),
    Point([0.6, 0.5], id=1),
    Point([0.3, 0.6], id=2),
    Point([0.7, 0.4], id=3),
    Point([0.9, 0.2], id=4),
]


def cars_dataset():
    return make_dataset("cars", CARS_RAW)


def drive(session, user, max_rounds=80):
    """Feed truthful responses until the session stops."""
    while session.status == AWAITING_FEEDBACK and session.round < max_rounds:
        shown = next_display(session)
        if session.strategy.feedback == "full_sort":
            ids, ranks = sort_with_ranks(user, shown)
            submit_sort(session, ids, ranks=ranks)
        else:
            submit_favorite(session, favorite(user, shown))
    return session


def test_start_session_cars_candidates_and_width():
    for strategy in ALGORITHMS.values():
        session = start_session(cars_dataset(), strategy, s=3, epsilon=0.05, seed=1)
        assert set(session.candidates) == {0, 1, 3, 4}
        assert session.status == AWAITING_FEEDBACK
        from sortpick.geometry import l1_width

        assert l1_width(session.polytope) == pytest.approx(1.0)
        shown = next_display(session)
        assert len(shown) == 3
        assert len({p.id for p in shown}) == 3
        assert all(p.id in session.candidates for p in shown)


def test_start_session_errors():
    ds = cars_dataset()
    with pytest.raises(ValueError, match="skyline"):
        start_session(ds, ALGORITHMS["sorting-simplex"], s=5, epsilon=0.1)
    with pytest.raises(ValueError, match="between 2 and 10"):
        start_session(ds, ALGORITHMS["sorting-simplex"], s=1, epsilon=0.1)
    with pytest.raises(ValueError, match="epsilon"):
        start_session(ds, ALGORITHMS["sorting-simplex"], s=3, epsilon=1.5)
    tiny = make_dataset("one", [Point([1.0, 1.0], id=0), Point([1.0, 1.0], id=1)])
    # Duplicate rows collapse to a single skyline entry.
    with pytest.raises(ValueError, match="skyline"):
        start_session(tiny, ALGORITHMS["sorting-simplex"], s=2, epsilon=0.1)


def test_two_incomparable_points_first_display_shows_both():
    ds = make_dataset("pair", [Point([1.0, 0.0], id=0), Point([0.0, 1.0], id=1)])
    for strategy in ALGORITHMS.values():
        session = start_session(ds, strategy, s=2, epsilon=0.1, seed=3)
        assert {p.id for p in next_display(session)} == {0, 1}


def test_display_stable_until_feedback():
    session = start_session(
        cars_dataset(), ALGORITHMS["sorting-random"], s=3, epsilon=0.05, seed=9
    )
    first = [p.id for p in next_display(session)]
    again = [p.id for p in next_display(session)]
    assert first == again


def test_submission_validation():
    session = start_session(
        cars_dataset(), ALGORITHMS["sorting-simplex"], s=3, epsilon=0.05, seed=2
    )
    shown = [p.id for p in next_display(session)]
    with pytest.raises(FeedbackError, match="not a permutation"):
        submit_sort(session, shown[:-1])
    with pytest.raises(FeedbackError, match="not a permutation"):
        submit_sort(session, [shown[0]] * len(shown))
    with pytest.raises(FeedbackError, match="not a permutation"):
        submit_sort(session, [99, *shown[1:]])
    with pytest.raises(FeedbackError, match="expects full-sort"):
        submit_favorite(session, shown[0])
    with pytest.raises(StaleRoundError):
        submit_sort(session, shown, round_index=5)
    submit_sort(session, shown, round_index=0)
    if session.status == AWAITING_FEEDBACK:
        with pytest.raises(StaleRoundError):
            submit_sort(session, shown, round_index=0)


def test_favorite_mode_rejects_sort_and_nonmember():
    session = start_session(
        cars_dataset(), ALGORITHMS["uh-random"], s=3, epsilon=0.05, seed=2
    )
    shown = [p.id for p in next_display(session)]
    with pytest.raises(FeedbackError, match="full-sort|favorite-only|expects"):
        submit_sort(session, shown)
    with pytest.raises(FeedbackError, match="not among"):
        submit_favorite(session, 99)


def test_truthful_session_finds_best_car():
    # f = (0.7, 0.3) on normalized coords: p5 (id 4) has utility 0.7, the max.
    user = HiddenUser(f_star=np.array([0.7, 0.3]))
    for name in ALGORITHMS:
        session = start_session(
            cars_dataset(), ALGORITHMS[name], s=3, epsilon=0.0, seed=11
        )
        drive(session, user)
        assert session.status == CONVERGED
        point, bound = recommend(session)
        assert point.id == 4
        assert true_regret(user, session.dataset.points, point) == 0.0


def test_apex_updates_to_sort_winner():
    session = start_session(
        cars_dataset(), ALGORITHMS["sorting-simplex"], s=3, epsilon=0.05, seed=4
    )
    apex_before = session.current_apex
    shown = next_display(session)
    # A weight vector favoring the first coordinate ranks the apex (the
    # uniform-utility maximizer, id 0) below steeper cars, so the truthful
    # winner differs from the apex and the apex must move to it.
    user = HiddenUser(f_star=np.array([0.9, 0.1]))
    ids, ranks = sort_with_ranks(user, shown)
    assert ids[0] != apex_before
    submit_sort(session, ids, ranks=ranks)
    assert session.current_apex == ids[0]


def test_prune_point_polytope_keeps_only_top_car():
    # Polytope pinned to f=(0.7,0.3): utilities 0.52/0.57/0.61/0.69 leave p5.
    poly = UtilityPolytope(2).shrink(
        [
            Halfspace(np.array([0.3, -0.7]), anchor_pair=(-1, -1), strict=False),
            Halfspace(np.array([-0.3, 0.7]), anchor_pair=(-1, -1), strict=False),
        ]
    )
    candidates = CandidateSet(points=(0, 1, 3, 4))
    out = prune_candidates(candidates, poly, CARS_RAW)
    assert list(out) == [4]


def test_prune_full_simplex_keeps_every_grid_argmax():
    rng = np.random.default_rng(21)
    for _ in range(12):
        n = int(rng.integers(4, 16))
        pts = [Point(row, id=i) for i, row in enumerate(rng.random((n, 2)))]
        from sortpick.skyline import compute_skyline

        sky = compute_skyline(pts)
        poly = UtilityPolytope(2)
        kept = set(prune_candidates(sky, poly, pts))
        sky_ids = list(sky)
        for w in np.linspace(0.0, 1.0, 201):
            f = np.array([w, 1.0 - w])
            best = max(sky_ids, key=lambda i: float(f @ pts[i].coords))
            best_val = float(f @ pts[best].coords)
            for i in sky_ids:
                if float(f @ pts[i].coords) == best_val:
                    assert i in kept


def test_prune_cap_limits_pairs_to_displayed_and_sample():
    # 501 skyline points on a descending staircase; a polytope pinned near
    # f=(1,0) ranks them by first coordinate alone.
    n = 501
    xs = np.linspace(1.0, 0.0, n)
    pts = [Point([xs[i], 1.0 - xs[i]], id=i) for i in range(n)]
    poly = UtilityPolytope(2).shrink(
        [Halfspace(np.array([1.0, -9.0]), anchor_pair=(-1, -1), strict=False)]
    )
    candidates = CandidateSet(points=tuple(range(n)))
    out = prune_candidates(candidates, poly, pts, displayed=[0], rng=None)
    # Every point loses to displayed id 0 everywhere on the pinned polytope.
    assert list(out) == [0]
    untouched = prune_candidates(candidates, poly, pts, displayed=None, rng=None)
    assert len(untouched) == n


def test_truthful_soundness_and_no_loss_pruning():
    rng = np.random.default_rng(33)
    names = list(ALGORITHMS)
    for trial in range(40):
        d = int(rng.integers(2, 5))
        n = int(rng.integers(8, 60))
        rows = rng.random((n, d))
        ds = make_dataset(f"t{trial}", [Point(r, id=i) for i, r in enumerate(rows)])
        f_star = rng.dirichlet(np.ones(d))
        user = HiddenUser(f_star=f_star)
        best = max(ds.points, key=lambda p: utility(f_star, p))
        best_val = utility(f_star, best)
        argmax_ids = {
            p.id for p in ds.points if utility(f_star, p) == best_val
        }
        strategy = ALGORITHMS[names[trial % 4]]
        s = int(rng.integers(2, 5))
        try:
            session = start_session(ds, strategy, s=s, epsilon=0.01, seed=trial)
        except ValueError:
            continue  # skyline smaller than s
        guard = 0
        while session.status == AWAITING_FEEDBACK and guard < 60:
            guard += 1
            shown = next_display(session)
            assert all(p.id in session.candidates for p in shown)
            if strategy.feedback == "full_sort":
                ids, ranks = sort_with_ranks(user, shown)
                submit_sort(session, ids, ranks=ranks)
            else:
                submit_favorite(session, favorite(user, shown))
            if session.status != STOPPED:
                assert contains_vector(session.polytope, f_star)
                assert argmax_ids & set(session.candidates)
        assert session.status == CONVERGED


def test_epsilon_zero_terminates_with_zero_regret():
    rng = np.random.default_rng(77)
    for trial in range(12):
        d = int(rng.integers(2, 4))
        n = int(rng.integers(6, 40))
        rows = rng.random((n, d))
        ds = make_dataset(f"z{trial}", [Point(r, id=i) for i, r in enumerate(rows)])
        user = HiddenUser(f_star=rng.dirichlet(np.ones(d)))
        name = list(ALGORITHMS)[trial % 4]
        try:
            session = start_session(ds, ALGORITHMS[name], s=3, epsilon=0.0, seed=trial)
        except ValueError:
            continue
        drive(session, user)
        assert session.status == CONVERGED
        point, bound = recommend(session)
        assert true_regret(user, ds.points, point) == 0.0
        if session.stop_reason == STOP_SINGLE:
            assert bound == 0.0


def test_width_stop_reports_epsilon_bound():
    rng = np.random.default_rng(5)
    rows = rng.random((80, 3))
    ds = make_dataset("w", [Point(r, id=i) for i, r in enumerate(rows)])
    user = HiddenUser(f_star=rng.dirichlet(np.ones(3)))
    session = start_session(ds, ALGORITHMS["sorting-random"], s=4, epsilon=0.4, seed=6)
    drive(session, user)
    point, bound = recommend(session)
    if session.stop_reason == STOP_WIDTH:
        assert bound == 0.4
    elif session.stop_reason == STOP_SINGLE:
        assert bound == 0.0
    assert true_regret(user, ds.points, point) <= 0.4 + 1e-9


def test_contradictory_feedback_stops_session():
    pts = [Point([1.0, 0.0], id=0), Point([0.0, 1.0], id=1), Point([0.4, 0.4], id=2)]
    ds = make_dataset("tri", pts)
    session = start_session(ds, ALGORITHMS["sorting-random"], s=3, epsilon=0.1, seed=0)
    shown = [p.id for p in next_display(session)]
    assert set(shown) == {0, 1, 2}
    # Tie 0 and 1, put 2 strictly last: 2 is pruned, 0 and 1 both survive.
    submit_sort(session, [0, 1, 2], ranks=[0, 0, 2])
    assert session.status == AWAITING_FEEDBACK
    assert set(session.candidates) == {0, 1}
    # Now claim a strict reversal of the recorded closed preference.
    submit_sort(session, [1, 0])
    assert session.status == STOPPED
    assert session.stop_reason == STOP_INFEASIBLE
    point, bound = recommend(session)  # still answers from the last good state
    assert point.id in {0, 1}


def test_tie_stagnation_converges_with_zero_regret():
    pts = [Point([1.0, 0.0], id=0), Point([0.0, 1.0], id=1), Point([0.4, 0.4], id=2)]
    ds = make_dataset("tie", pts)
    session = start_session(ds, ALGORITHMS["sorting-random"], s=3, epsilon=0.0, seed=1)
    submit_sort(session, [0, 1, 2], ranks=[0, 0, 2])
    rounds = 1
    while session.status == AWAITING_FEEDBACK and rounds < 10:
        submit_sort(session, [0, 1], ranks=[0, 0])
        rounds += 1
    assert session.status == CONVERGED
    assert session.stop_reason == STOP_STAGNATION
    point, _ = recommend(session)
    user = HiddenUser(f_star=np.array([0.5, 0.5]))
    assert true_regret(user, ds.points, point) == 0.0


def test_degenerate_apex_falls_back_to_random_display():
    pts = [Point([0.5, 0.5], id=0), Point([1.0, 0.0], id=1), Point([0.0, 1.0], id=2)]
    ds = make_dataset("deg", pts)
    session = start_session(ds, ALGORITHMS["sorting-simplex"], s=2, epsilon=0.1, seed=2)
    shown = next_display(session)
    assert len(shown) == 2
    assert all(p.id in session.candidates for p in shown)


def test_recommend_before_feedback_returns_initial_apex():
    session = start_session(
        cars_dataset(), ALGORITHMS["sorting-simplex"], s=3, epsilon=0.05, seed=1
    )
    point, bound = recommend(session)
    assert point.id == session.initial_apex
    assert bound == 1.0


def test_round_dominance_small_scale():
    rng = np.random.default_rng(13)
    wins = 0
    pairs = 0
    for trial in range(15):
        d = 3
        rows = rng.random((120, d))
        ds = make_dataset(f"rd{trial}", [Point(r, id=i) for i, r in enumerate(rows)])
        user = HiddenUser(f_star=rng.dirichlet(np.ones(d)))
        rounds = {}
        for name in ("sorting-simplex", "uh-simplex"):
            session = start_session(ds, ALGORITHMS[name], s=4, epsilon=0.02, seed=trial)
            drive(session, user)
            assert session.status == CONVERGED
            rounds[name] = session.round
        pairs += 1
        if rounds["sorting-simplex"] <= rounds["uh-simplex"]:
            wins += 1
    assert wins / pairs >= 0.8


def test_replay_determinism_byte_for_byte():
    rng = np.random.default_rng(99)
    rows = rng.random((50, 3))
    ds = make_dataset("rep", [Point(r, id=i) for i, r in enumerate(rows)])
    user = HiddenUser(f_star=rng.dirichlet(np.ones(3)))

    def run(extra_peeks: bool) -> str:
        session = start_session(
            ds, ALGORITHMS["sorting-random"], s=3, epsilon=0.05, seed=42
        )
        while session.status == AWAITING_FEEDBACK and session.round < 60:
            if extra_peeks:
                next_display(session)
                next_display(session)
            shown = next_display(session)
            ids, ranks = sort_with_ranks(user, shown)
            submit_sort(session, ids, ranks=ranks)
        return json.dumps(session_to_doc(session), sort_keys=True)

    assert run(False) == run(True)


def test_session_doc_shape():
    session = start_session(
        cars_dataset(), ALGORITHMS["uh-simplex"], s=3, epsilon=0.05, seed=8
    )
    shown = [p.id for p in next_display(session)]
    submit_favorite(session, shown[0])
    doc = session_to_doc(session)
    assert doc["schema_version"] == 1
    assert doc["dataset"] == "cars"
    assert doc["algorithm"] == "uh-simplex"
    assert doc["s"] == 3 and doc["epsilon"] == 0.05 and doc["seed"] == 8
    r = doc["rounds"][0]
    assert r["shown"] == shown
    assert r["response"] == {"kind": "favorite", "favorite": shown[0]}
    assert "width_after" in r and "candidates_after" in r
    assert doc["status"] in (AWAITING_FEEDBACK, CONVERGED, STOPPED)
    assert doc["recommendation"] is not None
