"""Experiment runner and session replay.

Trials are keyed by (algorithm, s, epsilon, seed): the seed fixes both the
hidden user and the session's display randomness, so two algorithms run under
the same seed face the same user and are directly comparable. Records are
emitted in sorted key order, making batch output deterministic even if trials
are later farmed out to workers.
"""
from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

from . import engine
from .data_io import Dataset
from .simuser import HiddenUser, favorite, sample_user, sort_with_ranks, true_regret

MAX_ROUNDS = 200


@dataclass(frozen=True)
class ExperimentConfig:
    algorithms: Tuple[str, ...]
    s_values: Tuple[int, ...]
    epsilons: Tuple[float, ...]
    trials: int = 1
    seeds: Tuple[int, ...] = ()
    out: Optional[str] = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        for name in self.algorithms:
            if name not in engine.ALGORITHMS:
                raise ValueError(f"unknown algorithm {name!r}")
        for s in self.s_values:
            if not 2 <= s <= 10:
                raise ValueError("s must be between 2 and 10")
        for eps in self.epsilons:
            if not 0.0 <= eps <= 1.0:
                raise ValueError("epsilon must be in [0, 1]")

    def seed_list(self) -> List[int]:
        return list(self.seeds) if self.seeds else list(range(self.trials))


@dataclass
class TrialRecord:
    algorithm: str
    s: int
    epsilon: float
    seed: int
    rounds: int = 0
    total_displayed: int = 0
    final_regret: float = 0.0
    recommended_id: Optional[int] = None
    candidate_sizes: List[int] = field(default_factory=list)
    wall_time_ms: List[float] = field(default_factory=list)
    error: Optional[str] = None


def run_trial(
    dataset: Dataset,
    algorithm: str,
    s: int,
    epsilon: float,
    seed: int,
    user: Optional[HiddenUser] = None,
) -> TrialRecord:
    """One full truthful session; timing covers feedback-to-next-display."""
    record = TrialRecord(algorithm=algorithm, s=s, epsilon=epsilon, seed=seed)
    if user is None:
        user = sample_user(dataset.d, seed)
    try:
        session = engine.start_session(
            dataset, engine.ALGORITHMS[algorithm], s=s, epsilon=epsilon, seed=seed
        )
        while session.status == engine.AWAITING_FEEDBACK:
            if session.round >= MAX_ROUNDS:
                raise RuntimeError(f"no convergence within {MAX_ROUNDS} rounds")
            shown = engine.next_display(session)
            record.total_displayed += len(shown)
            started = time.perf_counter()
            if session.strategy.feedback == engine.FULL_SORT:
                ids, ranks = sort_with_ranks(user, shown)
                engine.submit_sort(session, ids, ranks=ranks)
            else:
                engine.submit_favorite(session, favorite(user, shown))
            record.wall_time_ms.append((time.perf_counter() - started) * 1000.0)
            record.candidate_sizes.append(len(session.candidates))
        record.rounds = session.round
        point, _ = engine.recommend(session)
        record.recommended_id = point.id
        record.final_regret = true_regret(user, dataset.points, point)
    except Exception as exc:  # per-trial isolation: the batch keeps going
        record.error = f"{type(exc).__name__}: {exc}"
    return record


def run_experiment(dataset: Dataset, config: ExperimentConfig) -> List[TrialRecord]:
    keys = sorted(
        (algo, s, eps, seed)
        for algo in config.algorithms
        for s in config.s_values
        for eps in config.epsilons
        for seed in config.seed_list()
    )
    records = []
    for algo, s, eps, seed in keys:
        user = sample_user(dataset.d, seed)
        records.append(run_trial(dataset, algo, s, eps, seed, user=user))
    if config.out:
        write_records(records, config.out)
    return records


def write_records(records: Sequence[TrialRecord], out_prefix: str) -> Tuple[str, str]:
    """CSV (one row per trial) plus a full-fidelity JSON twin."""
    csv_path = f"{out_prefix}.csv"
    json_path = f"{out_prefix}.json"
    fields = [
        "algorithm",
        "s",
        "epsilon",
        "seed",
        "rounds",
        "total_displayed",
        "final_regret",
        "recommended_id",
        "candidate_sizes",
        "wall_time_ms",
        "error",
    ]
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fields)
        for r in records:
            writer.writerow(
                [
                    r.algorithm,
                    r.s,
                    r.epsilon,
                    r.seed,
                    r.rounds,
                    r.total_displayed,
                    f"{r.final_regret:.10f}",
                    "" if r.recommended_id is None else r.recommended_id,
                    ";".join(str(c) for c in r.candidate_sizes),
                    ";".join(f"{t:.3f}" for t in r.wall_time_ms),
                    r.error or "",
                ]
            )
    with open(json_path, "w") as fh:
        json.dump([r.__dict__ for r in records], fh, indent=2)
    return csv_path, json_path


class ReplayError(ValueError):
    """The recorded session cannot be reproduced from this document."""


def replay(doc: Union[str, Path, dict], dataset: Dataset) -> engine.Session:
    """Re-run a recorded session and verify it matches round for round."""
    if isinstance(doc, (str, Path)):
        text = Path(doc).read_text(encoding="utf-8")
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ReplayError(f"corrupted session file: {exc}") from exc
    version = doc.get("schema_version")
    if version != engine.SCHEMA_VERSION:
        raise ReplayError(
            f"schema version mismatch: file has {version!r}, "
            f"engine speaks {engine.SCHEMA_VERSION}"
        )
    if doc.get("dataset") != dataset.name:
        raise ReplayError(
            f"session was recorded on dataset {doc.get('dataset')!r}, "
            f"got {dataset.name!r}"
        )
    strategy = engine.Strategy(**doc["strategy"])
    session = engine.start_session(
        dataset, strategy, s=doc["s"], epsilon=doc["epsilon"], seed=doc["seed"]
    )
    for k, rnd in enumerate(doc.get("rounds", [])):
        if session.status != engine.AWAITING_FEEDBACK:
            raise ReplayError(
                f"corrupted record: round {k} recorded after the session "
                f"already reached status {session.status}"
            )
        shown = [p.id for p in engine.next_display(session)]
        if shown != list(rnd.get("shown", [])):
            raise ReplayError(
                f"replay diverged at round {k}: display {shown} does not "
                f"match recorded {rnd.get('shown')}"
            )
        response = rnd.get("response") or {}
        try:
            if response.get("kind") == "sort":
                engine.submit_sort(
                    session, response["order"], ranks=response.get("ranks")
                )
            elif response.get("kind") == "favorite":
                engine.submit_favorite(session, response["favorite"])
            else:
                raise ReplayError(f"corrupted record: round {k} has no response")
        except (engine.FeedbackError, KeyError) as exc:
            raise ReplayError(f"corrupted record at round {k}: {exc}") from exc
        result = session.history[-1]
        if result.width_after != rnd.get("width_after") or result.candidates_after != rnd.get("candidates_after"):
            raise ReplayError(
                f"replay diverged at round {k}: got width {result.width_after} "
                f"and {result.candidates_after} candidates, recorded "
                f"{rnd.get('width_after')} and {rnd.get('candidates_after')}"
            )
    if session.status != doc.get("status"):
        raise ReplayError(
            f"replay ended with status {session.status}, recorded "
            f"{doc.get('status')} (truncated rounds list?)"
        )
    recorded = doc.get("recommendation")
    if session.history and recorded is not None:
        point, bound = engine.recommend(session)
        if point.id != recorded.get("id") or bound != recorded.get("bound"):
            raise ReplayError(
                f"replay recommendation ({point.id}, {bound}) does not match "
                f"recorded ({recorded.get('id')}, {recorded.get('bound')})"
            )
    return session
