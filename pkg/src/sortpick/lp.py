"""Dense two-phase simplex solver.

Small LPs only: a handful of variables (the data dimension) and up to a few
thousand constraints. The ratio test breaks ties lexicographically against
the entry basis, which keeps heavily degenerate tableaus from cycling even
when every rhs sits at noise scale. All variables have a lower bound (0 by
default); a bound of None makes the variable free (split internally into a
difference of two nonnegative variables).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

TOL = 1e-9

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_RELATIONS = ("<=", "=", ">=")

_MAX_PIVOTS = 50_000


class LpFormatError(ValueError):
    """Raised when a program's pieces do not fit together."""


@dataclass
class LinearProgram:
    """maximize objective . x subject to row constraints and lower bounds."""

    objective: np.ndarray
    constraints: list  # (coeffs, relation, rhs) triples
    num_vars: int
    var_lower_bounds: Optional[list] = None  # entry None => free variable

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        if self.objective.shape != (self.num_vars,):
            raise LpFormatError(
                f"objective has {self.objective.size} coefficients, expected {self.num_vars}"
            )
        rows = []
        for coeffs, rel, rhs in self.constraints:
            coeffs = np.asarray(coeffs, dtype=float)
            if coeffs.shape != (self.num_vars,):
                raise LpFormatError(
                    f"constraint has {coeffs.size} coefficients, expected {self.num_vars}"
                )
            if rel not in _RELATIONS:
                raise LpFormatError(f"unknown relation {rel!r}")
            rows.append((coeffs, rel, float(rhs)))
        self.constraints = rows
        if self.var_lower_bounds is None:
            self.var_lower_bounds = [0.0] * self.num_vars
        elif len(self.var_lower_bounds) != self.num_vars:
            raise LpFormatError("var_lower_bounds length mismatch")


@dataclass
class LpOutcome:
    status: str
    solution: Optional[np.ndarray] = None
    objective_value: Optional[float] = None


def solve(lp: LinearProgram) -> LpOutcome:
    """Solve a LinearProgram; see LpOutcome.status for the verdict."""
    ps = prepare(lp.constraints, lp.num_vars, lp.var_lower_bounds)
    if ps is None:
        return LpOutcome(INFEASIBLE)
    return ps.maximize(lp.objective)


def feasible(constraints, num_vars: int, var_lower_bounds=None) -> bool:
    """True iff the constraint system admits a point (phase one only)."""
    return prepare(constraints, num_vars, var_lower_bounds) is not None


class PreparedSystem:
    """Phase-one work cached for one constraint set, reused across objectives."""

    def __init__(self, T, basis, cmap, shift):
        self._T = T
        self._basis = basis
        self._cmap = cmap
        self._shift = shift

    def maximize(self, objective) -> LpOutcome:
        objective = np.asarray(objective, dtype=float)
        T = self._T.copy()
        basis = self._basis.copy()
        c = objective @ self._cmap
        status = _phase_two(T, basis, c, c.shape[0])
        if status == UNBOUNDED:
            return LpOutcome(UNBOUNDED)
        y = np.zeros(T.shape[1] - 1)
        y[basis] = T[:-1, -1]
        x = self._cmap @ y[: self._cmap.shape[1]] + self._shift
        return LpOutcome(OPTIMAL, solution=x, objective_value=float(objective @ x))


def prepare(constraints, num_vars: int, var_lower_bounds=None) -> Optional[PreparedSystem]:
    """Run phase one for a constraint set; None when it is infeasible."""
    lp = LinearProgram(
        objective=np.zeros(num_vars),
        constraints=list(constraints),
        num_vars=num_vars,
        var_lower_bounds=var_lower_bounds,
    )
    _, A, b, rels, _, cmap, shift = _standardize(lp)
    T, basis, _ = _phase_one(A, b, rels)
    if T is None:
        return None
    return PreparedSystem(T, basis, cmap, shift)


def violation(lp: LinearProgram, x: np.ndarray) -> float:
    """Largest constraint violation of x (0 when feasible). Test helper."""
    worst = 0.0
    for coeffs, rel, rhs in lp.constraints:
        v = float(coeffs @ x)
        if rel == "<=":
            worst = max(worst, v - rhs)
        elif rel == ">=":
            worst = max(worst, rhs - v)
        else:
            worst = max(worst, abs(v - rhs))
    for i, lb in enumerate(lp.var_lower_bounds):
        if lb is not None:
            worst = max(worst, lb - x[i])
    return worst


def _standardize(lp: LinearProgram):
    """Rewrite in terms of nonnegative variables y; return recover(y) -> x."""
    n = lp.num_vars
    shift = np.zeros(n)
    free = [i for i, lb in enumerate(lp.var_lower_bounds) if lb is None]
    for i, lb in enumerate(lp.var_lower_bounds):
        if lb is not None:
            shift[i] = lb
    # columns: one per variable, plus a negated column per free variable
    n_cols = n + len(free)
    cmap = np.zeros((n, n_cols))
    cmap[np.arange(n), np.arange(n)] = 1.0
    for k, i in enumerate(free):
        cmap[i, n + k] = -1.0

    rows, rhs, rels = [], [], []
    for coeffs, rel, b in lp.constraints:
        rows.append(coeffs @ cmap)
        rhs.append(b - coeffs @ shift)
        rels.append(rel)
    A = np.array(rows, dtype=float) if rows else np.zeros((0, n_cols))
    b_arr = np.array(rhs, dtype=float)
    c = lp.objective @ cmap

    def recover(y):
        return cmap @ y + shift

    return c, A, b_arr, rels, recover, cmap, shift


def _phase_one(A, b, rels):
    """Build a feasible tableau, or None if the system is infeasible.

    Returns (tableau, basis, n_structural). Tableau columns are the
    structural variables followed by slack/surplus columns; the rightmost
    column is the rhs. Artificial columns are dropped before returning.
    """
    m, n = A.shape
    A = A.copy()
    b = b.copy()
    rels = list(rels)
    for i in range(m):
        if b[i] < 0:
            A[i] *= -1.0
            b[i] *= -1.0
            rels[i] = {"<=": ">=", ">=": "<=", "=": "="}[rels[i]]

    n_slack = sum(1 for r in rels if r != "=")
    art_rows = [i for i, r in enumerate(rels) if r != "<="]
    n_art = len(art_rows)
    width = n + n_slack + n_art + 1

    T = np.zeros((m + 1, width))
    T[:m, :n] = A
    T[:m, -1] = b
    basis = np.empty(m, dtype=int)
    s = n
    a = n + n_slack
    for i, r in enumerate(rels):
        if r == "<=":
            T[i, s] = 1.0
            basis[i] = s
            s += 1
        elif r == ">=":
            T[i, s] = -1.0
            s += 1
            T[i, a] = 1.0
            basis[i] = a
            a += 1
        else:
            T[i, a] = 1.0
            basis[i] = a
            a += 1

    if n_art:
        # phase-one objective: maximize -(sum of artificials)
        cost = np.zeros(width - 1)
        cost[n + n_slack:] = -1.0
        _set_bottom(T, basis, cost)
        status = _pivot_until_done(T, basis)
        if status != OPTIMAL:
            raise RuntimeError("phase one cannot be unbounded")
        if T[-1, -1] > TOL:  # bottom rhs holds the minimal artificial sum
            return None, None, None
        T, basis = _drive_out_artificials(T, basis, n + n_slack)
    # drop artificial columns
    T = np.delete(T, np.s_[n + n_slack:T.shape[1] - 1], axis=1)
    return T, basis, n


def _phase_two(T, basis, c, n_struct):
    cost = np.zeros(T.shape[1] - 1)
    cost[:n_struct] = c
    _set_bottom(T, basis, cost)
    return _pivot_until_done(T, basis)


def _set_bottom(T, basis, cost):
    T[-1, :-1] = cost
    T[-1, -1] = 0.0
    for i, j in enumerate(basis):
        cj = T[-1, j]
        if cj != 0.0:
            T[-1, :] -= cj * T[i, :]
    # bottom row now holds reduced costs; T[-1, -1] == -objective


def _pivot_until_done(T, basis):
    """Lowest-index entering with a lexicographic ratio test.

    Returns OPTIMAL or UNBOUNDED. The columns that are basic on entry form an
    identity block, so dividing them by the pivot column tracks the running
    basis inverse; breaking ratio ties lexicographically against that block
    strictly orders the bases visited, which rules out cycling. Those entries
    stay O(1), so the tie-break is decided well above rounding noise even
    when every rhs is degenerate.
    """
    m = T.shape[0] - 1
    lex_cols = basis.copy()
    for _ in range(_MAX_PIVOTS):
        reduced = T[-1, :-1]
        enter_candidates = np.nonzero(reduced > TOL)[0]
        if enter_candidates.size == 0:
            return OPTIMAL
        j = int(enter_candidates[0])
        col = T[:m, j]
        rows = np.nonzero(col > TOL)[0]
        if rows.size == 0:
            return UNBOUNDED
        # Rhs entries a hair below zero are rounding debris; clamping keeps
        # the step nonnegative so the tableau cannot drift further infeasible.
        ratios = np.maximum(T[rows, -1], 0.0) / col[rows]
        # Exact ties only. A tolerance band here would let the tie-break
        # prefer a row whose true ratio is above the minimum, and that pivot
        # pushes the honest minimum row's rhs negative by the band width,
        # which is exactly the degeneracy spiral the lex rule must prevent.
        tied = rows[ratios == ratios.min()]
        if tied.size > 1:
            tied = _lex_filter(T, tied, col, lex_cols)
        i = int(tied[np.argmin(basis[tied])])
        _pivot(T, i, j)
        basis[i] = j
    raise RuntimeError("simplex pivot limit exceeded")


def _lex_filter(T, tied, col, lex_cols):
    """Narrow ratio-test ties to the lexicographically minimal rows."""
    for c in lex_cols:
        vals = T[tied, c] / col[tied]
        tied = tied[vals == vals.min()]
        if tied.size == 1:
            break
    return tied


def _pivot(T, i, j):
    T[i, :] /= T[i, j]
    col = T[:, j].copy()
    col[i] = 0.0
    T -= np.outer(col, T[i, :])
    T[:, j] = 0.0
    T[i, j] = 1.0


def _drive_out_artificials(T, basis, first_art):
    """Pivot basic artificials onto real columns; drop redundant rows."""
    m = T.shape[0] - 1
    drop = []
    for i in range(m):
        if basis[i] >= first_art:
            row = T[i, :first_art]
            pivots = np.nonzero(np.abs(row) > TOL)[0]
            if pivots.size:
                # Largest magnitude for stability: these rows are degenerate,
                # and a tiny or negative pivot would flip the rhs sign.
                j = int(pivots[np.argmax(np.abs(row[pivots]))])
                _pivot(T, i, j)
                basis[i] = j
            else:
                drop.append(i)  # row is redundant given the others
    if drop:
        T = np.delete(T, drop, axis=0)
        basis = np.delete(basis, drop)
    return T, basis
