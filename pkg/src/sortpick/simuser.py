"""Simulated user with a hidden utility vector.

The engine never sees f_star: this module answers sort and favorite queries
and measures ground-truth regret for experiments. Exact utility ties are
reported through ranks so the caller can encode them as closed cuts.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .geometry import Point, UtilityVector, regret_ratio, utility

BY_INDEX = "by_index"
RANDOM = "random"


@dataclass(frozen=True)
class HiddenUser:
    """Truthful responder ranking points by a hidden linear utility."""

    f_star: UtilityVector
    tie_rule: str = BY_INDEX
    tie_seed: int = 0

    def __post_init__(self):
        if self.tie_rule not in (BY_INDEX, RANDOM):
            raise ValueError(f"unknown tie rule {self.tie_rule!r}")


def sort_with_ranks(user: HiddenUser, shown: Sequence[Point]) -> Tuple[List[int], List[int]]:
    """Ids in descending utility plus tie ranks (equal rank = equal utility)."""
    if not len(shown):
        raise ValueError("nothing to sort")
    scores = np.array([utility(user.f_star, p) for p in shown])
    if user.tie_rule == RANDOM:
        rng = np.random.default_rng(user.tie_seed)
        jitter = rng.permutation(len(shown))
    else:
        jitter = np.arange(len(shown))
    order = sorted(range(len(shown)), key=lambda i: (-scores[i], jitter[i]))
    ids = [shown[i].id for i in order]
    ranks: List[int] = []
    for k, i in enumerate(order):
        if k and scores[i] == scores[order[k - 1]]:
            ranks.append(ranks[-1])
        else:
            ranks.append(k)
    return ids, ranks


def sort_points(user: HiddenUser, shown: Sequence[Point]) -> List[int]:
    """Ids of the shown points in descending hidden utility."""
    ids, _ = sort_with_ranks(user, shown)
    return ids


def favorite(user: HiddenUser, shown: Sequence[Point]) -> int:
    """Id of the best shown point under the hidden utility."""
    return sort_points(user, shown)[0]


def true_regret(user: HiddenUser, dataset: Sequence[Point], point: Point) -> float:
    """Ground-truth regret ratio of recommending this single point."""
    return regret_ratio(dataset, [point], user.f_star)


def sample_user(d: int, seed: int, tie_rule: str = BY_INDEX) -> HiddenUser:
    """Uniform Dirichlet draw on the simplex, seeded."""
    rng = np.random.default_rng(seed)
    return HiddenUser(
        f_star=UtilityVector(rng.dirichlet(np.ones(d))),
        tie_rule=tie_rule,
        tie_seed=seed,
    )
