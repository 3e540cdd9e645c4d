"""CLI behavior through main(argv): exit codes, files written, printed text."""
import json

import numpy as np
import pytest

from sortpick import engine, harness
from sortpick.cli import main
from sortpick.data_io import dataset_from_json
from sortpick.simuser import sample_user, sort_with_ranks


def test_generate_writes_dataset_json(tmp_path):
    out = tmp_path / "anti.json"
    rc = main(["generate", "--dataset", "anti", "--n", "50", "--d", "3",
               "--seed", "1", "--out", str(out)])
    assert rc == 0
    doc = json.loads(out.read_text())
    assert doc["n"] == 50 and doc["d"] == 3
    assert len(doc["rows"]) == 50 and len(doc["rows"][0]) == 3
    ds = dataset_from_json(out.read_text())
    assert ds.n == 50


def test_generate_to_stdout_and_determinism(tmp_path, capsys):
    rc = main(["generate", "--dataset", "indep", "--n", "10", "--d", "2", "--seed", "9"])
    assert rc == 0
    first = capsys.readouterr().out
    main(["generate", "--dataset", "indep", "--n", "10", "--d", "2", "--seed", "9"])
    assert capsys.readouterr().out == first
    json.loads(first)


def test_generate_rejects_nonsynthetic(capsys):
    rc = main(["generate", "--dataset", "somefile.csv"])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_skyline_on_json_file(tmp_path, capsys):
    doc = {
        "name": "toy",
        "d": 2,
        "n": 4,
        "labels": ["a", "b", "c", "d"],
        "rows": [[1.0, 9.0], [9.0, 1.0], [5.0, 5.0], [0.5, 0.5]],
    }
    src = tmp_path / "toy.json"
    src.write_text(json.dumps(doc))
    out = tmp_path / "sky.json"
    rc = main(["skyline", "--dataset", str(src), "--out", str(out)])
    assert rc == 0
    text = capsys.readouterr().out
    assert "3 of 4 points" in text
    sub = json.loads(out.read_text())
    assert sub["n"] == 3
    assert [0.5, 0.5] not in sub["rows"]


def test_run_writes_results_and_summary(tmp_path, capsys):
    prefix = str(tmp_path / "results")
    rc = main([
        "run", "--dataset", "indep", "--n", "40", "--d", "2", "--data-seed", "4",
        "--algo", "sorting-random,uh-random", "--s", "3", "--epsilon", "0.05",
        "--trials", "2", "--seed", "0", "--out", prefix,
    ])
    assert rc == 0
    text = capsys.readouterr().out
    assert "sorting-random" in text and "uh-random" in text
    csv_lines = (tmp_path / "results.csv").read_text().strip().splitlines()
    assert csv_lines[0].startswith("algorithm,s,epsilon,seed,rounds")
    assert len(csv_lines) == 1 + 4
    records = json.loads((tmp_path / "results.json").read_text())
    assert len(records) == 4
    assert all(r["error"] is None for r in records)


def test_run_rejects_unknown_algorithm(capsys):
    rc = main(["run", "--dataset", "indep", "--n", "10", "--d", "2", "--algo", "magic"])
    assert rc == 2
    assert "unknown algorithm" in capsys.readouterr().err


def test_replay_roundtrip_and_corruption(tmp_path, capsys):
    out = tmp_path / "ds.json"
    main(["generate", "--dataset", "anti", "--n", "30", "--d", "2",
          "--seed", "3", "--out", str(out)])
    capsys.readouterr()
    ds = dataset_from_json(out.read_text())

    user = sample_user(2, seed=11)
    session = engine.start_session(ds, engine.ALGORITHMS["sorting-simplex"],
                                   s=3, epsilon=0.0, seed=5)
    while session.status == engine.AWAITING_FEEDBACK:
        shown = engine.next_display(session)
        ids, ranks = sort_with_ranks(user, shown)
        engine.submit_sort(session, ids, ranks=ranks, round_index=session.round)
    doc_path = tmp_path / "session.json"
    doc_path.write_text(json.dumps(engine.session_to_doc(session)))

    rc = main(["replay", str(doc_path), "--dataset", str(out)])
    assert rc == 0
    assert "replay ok" in capsys.readouterr().out

    doc_path.write_text(doc_path.read_text()[:-30])
    rc = main(["replay", str(doc_path), "--dataset", str(out)])
    assert rc == 2
    assert "corrupted session file" in capsys.readouterr().err


def test_replay_detects_tampered_round(tmp_path, capsys):
    out = tmp_path / "ds.json"
    main(["generate", "--dataset", "indep", "--n", "25", "--d", "2",
          "--seed", "8", "--out", str(out)])
    capsys.readouterr()
    ds = dataset_from_json(out.read_text())
    user = sample_user(2, seed=1)
    session = engine.start_session(ds, engine.ALGORITHMS["sorting-random"],
                                   s=3, epsilon=0.0, seed=1)
    while session.status == engine.AWAITING_FEEDBACK:
        shown = engine.next_display(session)
        ids, ranks = sort_with_ranks(user, shown)
        engine.submit_sort(session, ids, ranks=ranks, round_index=session.round)
    doc = engine.session_to_doc(session)
    doc["rounds"][0]["candidates_after"] += 1
    doc_path = tmp_path / "bad.json"
    doc_path.write_text(json.dumps(doc))
    rc = main(["replay", str(doc_path), "--dataset", str(out)])
    assert rc == 2
    assert "round 0" in capsys.readouterr().err


def test_missing_dataset_file_is_an_error(capsys):
    rc = main(["skyline", "--dataset", "no_such_file.csv"])
    assert rc == 2
    assert "not found" in capsys.readouterr().err


def test_serve_rejects_bad_bind(capsys):
    rc = main(["serve", "--bind", "nocolon"])
    assert rc == 2
    assert "host:port" in capsys.readouterr().err


def test_skyline_on_delimited_file(tmp_path, capsys):
    csv = tmp_path / "data.csv"
    csv.write_text("name,a,b\nx,1,9\ny,9,1\nz,0.5,0.5\n")
    rc = main(["skyline", "--dataset", str(csv),
               "--columns", "a,b", "--label-column", "name"])
    assert rc == 0
    text = capsys.readouterr().out
    assert "2 of 3 points" in text
    assert "x" in text and "y" in text
