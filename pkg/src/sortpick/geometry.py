"""Utility-space geometry for preference feedback.

Points live in R^d with nonnegative coordinates. Utility vectors live on the
standard simplex. A strict preference "p over q" cuts the simplex with the
halfspace through the origin whose normal is p - q (ties use the closed form
of the same cut). UtilityPolytope accumulates those cuts and answers
feasibility, width, and representative-point queries; the phase-one simplex
work is cached per instance and reused across objectives.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import lp

# strict preferences are enforced as normal.f >= TAU_STRICT in LPs; ties and
# membership tests use the closed halfspace normal.f >= 0
TAU_STRICT = 1e-9


def _as_readonly(vec, name: str) -> np.ndarray:
    arr = np.asarray(vec, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a flat vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Point:
    """A dataset row: nonnegative coordinates plus a stable id."""

    coords: np.ndarray
    id: int = -1
    label: Optional[str] = None

    def __post_init__(self):
        arr = _as_readonly(self.coords, "coords")
        if arr.size < 2:
            raise ValueError("points need at least 2 dimensions")
        if np.any(arr < 0):
            raise ValueError("coordinates must be nonnegative")
        object.__setattr__(self, "coords", arr)

    @property
    def dim(self) -> int:
        return self.coords.size

    def __repr__(self):
        tag = self.label if self.label is not None else self.id
        return f"Point({tag}, {np.round(self.coords, 4).tolist()})"


@dataclass(frozen=True, eq=False)
class UtilityVector:
    """Nonnegative linear-utility weights; on the simplex when inside F."""

    weights: np.ndarray

    def __post_init__(self):
        arr = _as_readonly(self.weights, "weights")
        if np.any(arr < 0):
            raise ValueError("weights must be nonnegative")
        object.__setattr__(self, "weights", arr)

    @property
    def dim(self) -> int:
        return self.weights.size

    def __repr__(self):
        return f"UtilityVector({np.round(self.weights, 4).tolist()})"


def _weights_of(f) -> np.ndarray:
    return np.asarray(getattr(f, "weights", f), dtype=float)


@dataclass(frozen=True, eq=False)
class Halfspace:
    """Origin-through halfspace {f : normal.f >= 0}; strict marks a cut that
    came from a strict preference (shifted by TAU_STRICT inside LPs)."""

    normal: np.ndarray
    anchor_pair: Optional[tuple] = None  # (preferred id, rejected id)
    strict: bool = True

    def __post_init__(self):
        arr = _as_readonly(self.normal, "normal")
        if not np.any(arr != 0.0):
            raise ValueError("halfspace normal must be nonzero")
        object.__setattr__(self, "normal", arr)

    def contains(self, f, tol: float = lp.TOL) -> bool:
        w = _weights_of(f)
        return float(self.normal @ w) >= -tol


class UtilityPolytope:
    """Intersection of the standard simplex with preference halfspaces.

    Immutable: shrinking returns a new polytope. Constraint rows and the LP
    phase-one factorization are built once per instance.
    """

    def __init__(self, dimension: int, halfspaces: Sequence[Halfspace] = ()):
        if dimension < 2:
            raise ValueError("dimension must be at least 2")
        self.dimension = int(dimension)
        self.halfspaces = tuple(halfspaces)
        for h in self.halfspaces:
            if h.normal.size != self.dimension:
                raise ValueError("halfspace dimension mismatch")
        self._prepared: Optional[lp.PreparedSystem] = None
        self._prepared_known = False
        self._extremes = None  # (mins, maxs, maximizer rows), lazy

    def constraint_rows(self) -> list:
        """LP rows: the simplex equality plus one row per halfspace.

        Halfspace normals are scaled to unit length here so the LP sees
        uniformly conditioned rows regardless of how close the generating
        point pair was; the strict shift then means a fixed margin in weight
        space rather than one inflated by 1/||p-q||.
        """
        rows = [(np.ones(self.dimension), "=", 1.0)]
        for h in self.halfspaces:
            unit = h.normal / float(np.linalg.norm(h.normal))
            rows.append((unit, ">=", TAU_STRICT if h.strict else 0.0))
        return rows

    def _prepare(self) -> Optional[lp.PreparedSystem]:
        if not self._prepared_known:
            self._prepared = lp.prepare(self.constraint_rows(), self.dimension)
            self._prepared_known = True
        return self._prepared

    def maximize(self, objective) -> lp.LpOutcome:
        """Maximize a linear objective over the polytope."""
        ps = self._prepare()
        if ps is None:
            raise ValueError("polytope is empty")
        return ps.maximize(objective)

    def shrink(self, halfspaces: Sequence[Halfspace]) -> "UtilityPolytope":
        """Add cuts, skipping any whose direction is already enforced.

        Repeated displays re-derive identical cuts round after round; keeping
        one copy per direction (the strict one when both forms appear) leaves
        the feasible set unchanged while keeping the LP free of duplicate
        degenerate rows.
        """
        kept = list(self.halfspaces)
        strict_seen = {self._direction_key(h): h.strict for h in kept}
        for h in halfspaces:
            key = self._direction_key(h)
            if key in strict_seen and (strict_seen[key] or not h.strict):
                continue
            kept.append(h)
            strict_seen[key] = strict_seen.get(key, False) or h.strict
        return UtilityPolytope(self.dimension, kept)

    @staticmethod
    def _direction_key(h: Halfspace) -> tuple:
        unit = h.normal / float(np.linalg.norm(h.normal))
        return tuple(np.round(unit, 12))

    def _coordinate_extremes(self):
        if self._extremes is None:
            d = self.dimension
            mins = np.empty(d)
            maxs = np.empty(d)
            argmax_rows = np.empty((d, d))
            for i in range(d):
                e = np.zeros(d)
                e[i] = 1.0
                hi = self.maximize(e)
                lo = self.maximize(-e)
                maxs[i] = hi.objective_value
                mins[i] = -lo.objective_value
                argmax_rows[i] = hi.solution
            self._extremes = (mins, maxs, argmax_rows)
        return self._extremes

    def __repr__(self):
        return f"UtilityPolytope(d={self.dimension}, cuts={len(self.halfspaces)})"


def utility(f, p: Point) -> float:
    """Linear utility f.p."""
    w = _weights_of(f)
    if w.size != p.coords.size:
        raise ValueError(f"dimension mismatch: {w.size} weights vs {p.coords.size} coords")
    return float(w @ p.coords)


def regret_ratio(dataset: Sequence[Point], subset: Sequence[Point], f) -> float:
    """1 - (best utility in subset) / (best utility in dataset), in [0, 1]."""
    if not len(dataset) or not len(subset):
        raise ValueError("dataset and subset must be nonempty")
    w = _weights_of(f)
    best_d = max(utility(w, p) for p in dataset)
    if best_d <= 0.0:
        raise ValueError("max utility over the dataset must be positive")
    best_s = max(utility(w, p) for p in subset)
    return min(1.0, max(0.0, 1.0 - best_s / best_d))


def preference_halfspace(preferred: Point, rejected: Point, strict: bool = True) -> Halfspace:
    """Cut implied by preferring one point over another."""
    normal = preferred.coords - rejected.coords
    if not np.any(normal != 0.0):
        raise ValueError("points are identical: no preference direction")
    return Halfspace(normal=normal, anchor_pair=(preferred.id, rejected.id), strict=strict)


def _check_distinct(points: Sequence[Point]):
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            if np.array_equal(points[i].coords, points[j].coords):
                raise ValueError("duplicate points in display list")


def shrink_with_sort(
    polytope: UtilityPolytope,
    sorted_points: Sequence[Point],
    ranks: Optional[Sequence[int]] = None,
) -> UtilityPolytope:
    """Intersect with one halfspace per ordered pair of a full sort.

    sorted_points is in descending preference. ranks, when given, runs
    parallel to it with equal entries marking ties; tied pairs contribute the
    closed halfspace (no strict shift) so a truthful tie stays feasible.
    """
    s = len(sorted_points)
    if s < 2:
        raise ValueError("need at least 2 sorted points")
    _check_distinct(sorted_points)
    if ranks is None:
        ranks = list(range(s))
    elif len(ranks) != s:
        raise ValueError("ranks length mismatch")
    cuts = []
    for i in range(s):
        for j in range(i + 1, s):
            strict = ranks[i] != ranks[j]
            cuts.append(preference_halfspace(sorted_points[i], sorted_points[j], strict=strict))
    return polytope.shrink(cuts)


def shrink_with_choice(
    polytope: UtilityPolytope,
    favorite: Point,
    others: Sequence[Point],
    tied: Optional[Sequence[bool]] = None,
) -> UtilityPolytope:
    """Intersect with favorite-beats-each-other halfspaces only.

    tied, when given, runs parallel to others and marks utility ties with the
    favorite; those pairs contribute the closed halfspace.
    """
    if not len(others):
        raise ValueError("need at least one non-favorite point")
    _check_distinct([favorite, *others])
    if tied is None:
        tied = [False] * len(others)
    elif len(tied) != len(others):
        raise ValueError("tied length mismatch")
    cuts = [
        preference_halfspace(favorite, q, strict=not t)
        for q, t in zip(others, tied)
    ]
    return polytope.shrink(cuts)


def is_empty(polytope: UtilityPolytope) -> bool:
    """True iff no simplex vector satisfies every halfspace."""
    return polytope._prepare() is None


def contains_vector(polytope: UtilityPolytope, f, tol: float = 1e-9) -> bool:
    """Closed-form membership test for an explicit utility vector."""
    w = _weights_of(f)
    if w.size != polytope.dimension:
        raise ValueError("dimension mismatch")
    if np.any(w < -tol) or abs(float(w.sum()) - 1.0) > tol:
        return False
    return all(h.contains(w, tol) for h in polytope.halfspaces)


def l1_width(polytope: UtilityPolytope) -> float:
    """Largest per-coordinate LP range: the stop-test width surrogate."""
    mins, maxs, _ = polytope._coordinate_extremes()
    return float(np.max(maxs - mins))


def centroid_utility(polytope: UtilityPolytope) -> UtilityVector:
    """A representative member: mean of the d per-coordinate maximizers."""
    _, _, rows = polytope._coordinate_extremes()
    mean = rows.mean(axis=0)
    mean = np.clip(mean, 0.0, None)
    total = float(mean.sum())
    if total <= 0.0:
        raise ValueError("degenerate polytope representative")
    return UtilityVector(mean / total)


def coordinate_maximizers(polytope: UtilityPolytope) -> np.ndarray:
    """The d per-coordinate LP maximizers, one per row; all lie inside F."""
    _, _, rows = polytope._coordinate_extremes()
    return rows.copy()


def max_regret_ratio(
    dataset: Sequence[Point],
    subset: Sequence[Point],
    polytope: UtilityPolytope,
    n_samples: int = 0,
) -> float:
    """Worst regret ratio of the subset over all utility vectors in F.

    Exact by default: one LP per dataset point, maximizing x subject to
    f.p = 1 and f.(p - q) >= x for every q in the subset, with f confined to
    the closed cone over F (the cuts are scale-invariant, so the simplex
    equality is dropped). n_samples > 0 switches to a sampling approximation.
    """
    if not len(dataset) or not len(subset):
        raise ValueError("dataset and subset must be nonempty")
    if is_empty(polytope):
        raise ValueError("polytope is empty")
    if n_samples > 0:
        return _sampled_max_regret(dataset, subset, polytope, n_samples)

    d = polytope.dimension
    # variables: f (nonnegative) then x (free)
    objective = np.zeros(d + 1)
    objective[d] = 1.0
    lower = [0.0] * d + [None]
    cone_rows = [
        (np.concatenate([h.normal, [0.0]]), ">=", 0.0) for h in polytope.halfspaces
    ]
    sub_coords = np.array([q.coords for q in subset])
    best = 0.0
    for p in dataset:
        rows = list(cone_rows)
        rows.append((np.concatenate([p.coords, [0.0]]), "=", 1.0))
        for q_coords in sub_coords:
            rows.append((np.concatenate([p.coords - q_coords, [-1.0]]), ">=", 0.0))
        out = lp.solve(
            lp.LinearProgram(objective, rows, num_vars=d + 1, var_lower_bounds=lower)
        )
        if out.status == lp.INFEASIBLE:
            continue  # f.p = 1 unreachable: p scores 0 on all of F
        if out.status != lp.OPTIMAL:
            raise RuntimeError("regret LP cannot be unbounded for nonnegative data")
        best = max(best, out.objective_value)
    return min(1.0, best)


def _sampled_max_regret(dataset, subset, polytope, n_samples: int) -> float:
    rng = np.random.default_rng(0)
    d = polytope.dimension
    candidates = [centroid_utility(polytope).weights]
    candidates.extend(coordinate_maximizers(polytope))
    draws = rng.dirichlet(np.ones(d), size=n_samples)
    for w in draws:
        if contains_vector(polytope, w):
            candidates.append(w)
    best = 0.0
    for w in candidates:
        try:
            best = max(best, regret_ratio(dataset, subset, w))
        except ValueError:
            continue  # zero max utility under this vector
    return best


def drop_redundant(polytope: UtilityPolytope) -> UtilityPolytope:
    """Drop halfspaces implied by the rest; the represented set is unchanged.

    Dropping can only enlarge F, so a hidden truthful vector stays feasible
    regardless of tolerance choices here.
    """
    kept = list(polytope.halfspaces)
    i = 0
    while i < len(kept):
        h = kept[i]
        others = kept[:i] + kept[i + 1 :]
        rows = [(np.ones(polytope.dimension), "=", 1.0)]
        rows += [
            (o.normal, ">=", TAU_STRICT if o.strict else 0.0) for o in others
        ]
        ps = lp.prepare(rows, polytope.dimension)
        if ps is None:
            # empty without h, so certainly empty with it: h adds nothing
            kept.pop(i)
            continue
        floor = -ps.maximize(-h.normal).objective_value
        rhs = TAU_STRICT if h.strict else 0.0
        if floor >= rhs - 1e-12:
            kept.pop(i)
        else:
            i += 1
    if len(kept) == len(polytope.halfspaces):
        return polytope
    return UtilityPolytope(polytope.dimension, kept)
