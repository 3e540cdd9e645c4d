"""Command line front door.

Subcommands: generate synthetic data, inspect a skyline, run simulated
experiments, serve the HTTP API, and replay a recorded session. Everything
here is a thin layer over the package modules; no logic of its own.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import harness
from .data_io import (
    ANTI,
    CORRELATED,
    FILE,
    INDEPENDENT,
    Dataset,
    DatasetSpec,
    dataset_from_json,
    dataset_from_spec,
    dataset_to_json,
    make_dataset,
)
from .engine import ALGORITHMS, recommend
from .geometry import Point
from .skyline import compute_skyline

_SYNTHETIC = (ANTI, CORRELATED, INDEPENDENT)


def _parse_columns(text: Optional[str]) -> Optional[List]:
    if not text:
        return None
    out: List = []
    for token in text.split(","):
        token = token.strip()
        out.append(int(token) if token.lstrip("-").isdigit() else token)
    return out


def _parse_column(token: Optional[str]):
    if token is None:
        return None
    return int(token) if token.lstrip("-").isdigit() else token


def resolve_dataset(args: argparse.Namespace, seed_attr: str = "data_seed") -> Dataset:
    """Turn --dataset into a Dataset: synthetic kind, dataset .json, or delimited file."""
    value = args.dataset
    if value in _SYNTHETIC:
        spec = DatasetSpec(kind=value, n=args.n, d=args.d, seed=getattr(args, seed_attr))
        return dataset_from_spec(spec)
    path = Path(value)
    if not path.exists():
        raise ValueError(f"dataset file not found: {value}")
    if path.suffix == ".json":
        return dataset_from_json(path.read_text(encoding="utf-8"))
    spec = DatasetSpec(
        kind=FILE,
        path=str(path),
        columns=_parse_columns(getattr(args, "columns", None)),
        label_column=_parse_column(getattr(args, "label_column", None)),
    )
    return dataset_from_spec(spec)


def _add_dataset_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--dataset", required=True,
                    help="anti|corr|indep, a dataset .json, or a delimited file")
    sp.add_argument("--n", type=int, default=1000, help="rows for synthetic kinds")
    sp.add_argument("--d", type=int, default=2, help="dimensions for synthetic kinds")
    sp.add_argument("--data-seed", type=int, default=0,
                    help="generator seed for synthetic kinds")
    sp.add_argument("--columns", help="comma separated names or indices (delimited files)")
    sp.add_argument("--label-column", help="label column name or index (delimited files)")


def cmd_generate(args: argparse.Namespace) -> int:
    if args.dataset not in _SYNTHETIC:
        raise ValueError(f"generate needs a synthetic kind, one of: {', '.join(_SYNTHETIC)}")
    spec = DatasetSpec(kind=args.dataset, n=args.n, d=args.d, seed=args.seed)
    ds = dataset_from_spec(spec)
    text = dataset_to_json(ds)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}: {ds.n} rows, d={ds.d}")
    else:
        print(text)
    return 0


def cmd_skyline(args: argparse.Namespace) -> int:
    ds = resolve_dataset(args)
    kept = list(compute_skyline(ds.points).points)
    print(f"skyline of {ds.name}: {len(kept)} of {ds.n} points")
    for pid in kept[:20]:
        label = ds.labels[pid] or f"row {pid}"
        values = ", ".join(f"{v:g}" for v in ds.raw_rows[pid])
        print(f"  [{pid}] {label}: {values}")
    if len(kept) > 20:
        print(f"  ... and {len(kept) - 20} more")
    if args.out:
        subset = make_dataset(
            f"{ds.name}-skyline",
            [Point(ds.raw_rows[pid], id=i, label=ds.labels[pid]) for i, pid in enumerate(kept)],
            columns=ds.columns,
        )
        Path(args.out).write_text(dataset_to_json(subset), encoding="utf-8")
        print(f"wrote {args.out}")
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    ds = resolve_dataset(args)
    algorithms = tuple(a.strip() for a in args.algo.split(",") if a.strip())
    config = harness.ExperimentConfig(
        algorithms=algorithms,
        s_values=(args.s,),
        epsilons=(args.epsilon,),
        trials=args.trials,
        seeds=tuple(range(args.seed, args.seed + args.trials)),
        out=args.out,
    )
    records = harness.run_experiment(ds, config)
    header = f"{'algorithm':<18}{'trials':>7}{'rounds':>9}{'displayed':>11}{'regret':>10}{'errors':>8}"
    print(f"dataset {ds.name}: n={ds.n}, d={ds.d}, s={args.s}, epsilon={args.epsilon}")
    print(header)
    for name in algorithms:
        mine = [r for r in records if r.algorithm == name]
        ok = [r for r in mine if r.error is None]
        failed = len(mine) - len(ok)
        if ok:
            rounds = np.mean([r.rounds for r in ok])
            shown = np.mean([r.total_displayed for r in ok])
            regret = np.mean([r.final_regret for r in ok])
            print(f"{name:<18}{len(mine):>7}{rounds:>9.2f}{shown:>11.2f}{regret:>10.4f}{failed:>8}")
        else:
            print(f"{name:<18}{len(mine):>7}{'-':>9}{'-':>11}{'-':>10}{failed:>8}")
    if args.out:
        print(f"wrote {args.out}.csv and {args.out}.json")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    host, sep, port = args.bind.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"--bind must look like host:port, got {args.bind!r}")
    registry = {}
    demo = make_dataset(
        "cars",
        [Point(row, id=i) for i, row in enumerate(
            [[0.4, 0.8], [0.6, 0.5], [0.3, 0.6], [0.7, 0.4], [0.9, 0.2]])],
        columns=["speed", "comfort"],
    )
    registry[demo.name] = demo
    for value in args.dataset or []:
        ns = argparse.Namespace(
            dataset=value, n=args.n, d=args.d, data_seed=args.data_seed,
            columns=args.columns, label_column=args.label_column,
        )
        ds = resolve_dataset(ns)
        registry[ds.name] = ds

    from .service import create_app

    app = create_app(registry, store_dir=args.store)
    import uvicorn

    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="warning")
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    ds = resolve_dataset(args)
    session = harness.replay(args.session, ds)
    point, bound = recommend(session)
    print(
        f"replay ok: {session.round} rounds, status {session.status}, "
        f"recommendation [{point.id}] with bound {bound:g}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sortpick",
        description="Interactive preference elicitation over skyline candidates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic dataset as JSON")
    gen.add_argument("--dataset", required=True, help=f"one of: {', '.join(_SYNTHETIC)}")
    gen.add_argument("--n", type=int, default=1000)
    gen.add_argument("--d", type=int, default=2)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", help="output path (stdout when omitted)")
    gen.set_defaults(handler=cmd_generate)

    sky = sub.add_parser("skyline", help="list the non-dominated points of a dataset")
    _add_dataset_flags(sky)
    sky.add_argument("--out", help="write the skyline subset as a dataset JSON")
    sky.set_defaults(handler=cmd_skyline)

    run = sub.add_parser("run", help="run simulated sessions and summarize")
    _add_dataset_flags(run)
    run.add_argument("--algo", default=",".join(sorted(ALGORITHMS)),
                     help="comma separated algorithm names")
    run.add_argument("--s", type=int, default=3, help="points shown per round")
    run.add_argument("--epsilon", type=float, default=0.05, help="regret tolerance")
    run.add_argument("--trials", type=int, default=1)
    run.add_argument("--seed", type=int, default=0, help="base seed; trial k uses seed+k")
    run.add_argument("--out", help="prefix for .csv and .json result files")
    run.set_defaults(handler=cmd_run)

    srv = sub.add_parser("serve", help="serve the HTTP API")
    srv.add_argument("--bind", default="127.0.0.1:8000", help="host:port")
    srv.add_argument("--dataset", action="append",
                     help="dataset to preload (repeatable); a demo is always included")
    srv.add_argument("--n", type=int, default=1000)
    srv.add_argument("--d", type=int, default=2)
    srv.add_argument("--data-seed", type=int, default=0)
    srv.add_argument("--columns")
    srv.add_argument("--label-column")
    srv.add_argument("--store", help="directory for session persistence")
    srv.set_defaults(handler=cmd_serve)

    rep = sub.add_parser("replay", help="verify a recorded session against a dataset")
    rep.add_argument("session", help="session JSON file")
    _add_dataset_flags(rep)
    rep.set_defaults(handler=cmd_replay)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
