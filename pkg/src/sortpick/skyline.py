"""Dominance skyline: the starting candidate set for a session.

Larger is better on every coordinate. A point is kept iff no other point is
at least as good everywhere and strictly better somewhere; exact duplicates
keep only their first occurrence.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np

from .geometry import Point


@dataclass(frozen=True)
class CandidateSet:
    """Ordered ids of the points still able to be the user's favorite."""

    points: Tuple[int, ...]
    generation: int = 0

    def __len__(self) -> int:
        return len(self.points)

    def __contains__(self, point_id: int) -> bool:
        return point_id in set(self.points)

    def __iter__(self):
        return iter(self.points)

    def remove(self, ids, generation: int) -> "CandidateSet":
        """Drop the given ids; keeps order of the survivors."""
        drop = set(ids)
        kept = tuple(pid for pid in self.points if pid not in drop)
        return CandidateSet(points=kept, generation=generation)


def dominates(p: Point, q: Point) -> bool:
    """True iff p is at least as good everywhere and better somewhere."""
    if p.coords.size != q.coords.size:
        raise ValueError("dimension mismatch")
    return bool(np.all(p.coords >= q.coords) and np.any(p.coords > q.coords))


def compute_skyline(dataset: Sequence[Point]) -> CandidateSet:
    """All points not dominated by another, in dataset order.

    Sort-by-sum prefilter: a dominator always has a strictly larger
    coordinate sum, so scanning in descending-sum order means each point only
    needs testing against already-kept rows, which are final.
    """
    if not len(dataset):
        raise ValueError("dataset must be nonempty")
    coords = np.array([p.coords for p in dataset])
    n, d = coords.shape
    sums = coords.sum(axis=1)
    # descending sum; ties by dataset position so first duplicates win
    order = np.lexsort((np.arange(n), -sums))
    kept_rows = np.empty((n, d))
    kept_idx: list = []
    k = 0
    for i in order:
        row = coords[i]
        if k:
            window = kept_rows[:k]
            ge = np.all(window >= row, axis=1)
            if np.any(ge):
                if np.any(ge & np.any(window > row, axis=1)):
                    continue  # dominated
                if np.any(ge & np.all(window == row, axis=1)):
                    continue  # exact duplicate of an earlier point
        kept_rows[k] = row
        kept_idx.append(i)
        k += 1
    kept_idx.sort()
    return CandidateSet(points=tuple(dataset[i].id for i in kept_idx), generation=0)
