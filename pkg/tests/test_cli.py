from __future__ import annotations

import csv
import json
from pathlib import Path

import pytest

from citegraph.cli import main

SYNTH_ARGS = [
    "synth",
    "--seed", "21",
    "--background", "300",
    "--established-fraction", "0.4",
    "--self-citers", "2",
    "--cartels", "1",
    "--cartel-size", "3",
    "--hyperteams", "1",
    "--team-size", "4",
    "--joint-papers", "52",
]


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("corpus")
    assert main(SYNTH_ARGS + ["--out", str(out)]) == 0
    return out


def _run_args(corpus_dir: Path, out_dir: Path, extra=()):
    return [
        "run",
        "--papers", str(corpus_dir / "papers.csv"),
        "--authorships", str(corpus_dir / "authorships.csv"),
        "--citations", str(corpus_dir / "citations.csv"),
        "--taxonomy", str(corpus_dir / "taxonomy.csv"),
        "--out", str(out_dir),
        *extra,
    ]


@pytest.fixture(scope="module")
def run_dir(corpus_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    assert main(_run_args(corpus_dir, out)) == 0
    return out


def test_run_writes_all_report_files(run_dir):
    expected = {"metrics.csv", "cooccur.csv", "manifest.json", "timings.json"}
    for metric in ("c_over_h2", "a50pc", "a50"):
        expected |= {f"tail_{metric}.csv", f"allocation_{metric}.csv", f"hist_{metric}.csv"}
    assert expected <= {p.name for p in run_dir.iterdir()}


def test_metrics_csv_schema_and_sorting(run_dir):
    with open(run_dir / "metrics.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert rows, "cohort should not be empty"
    assert list(rows[0].keys()) == [
        "author_id", "field_id", "subfield_id", "n_full_papers",
        "citations", "h_index", "c_over_h2", "a50pc", "a50",
    ]
    ids = [r["author_id"] for r in rows]
    assert ids == sorted(ids)
    for r in rows:
        assert int(r["citations"]) >= 1000
        assert int(r["n_full_papers"]) > 5
        assert r["field_id"]
        float(r["c_over_h2"])
        assert len(r["c_over_h2"].split(".")[1]) == 2


def test_manifest_checksums_match_files(run_dir):
    manifest = json.loads((run_dir / "manifest.json").read_text())
    import hashlib

    for name, digest in manifest["outputs"].items():
        assert hashlib.sha256((run_dir / name).read_bytes()).hexdigest() == digest
    assert manifest["index"]["dropped_unknown_edges"] == 0
    assert manifest["cohort"]["n_eligible"] == len(
        (run_dir / "metrics.csv").read_text().splitlines()
    ) - 1


def test_cooccur_has_three_pairs(run_dir):
    with open(run_dir / "cooccur.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [(r["metric_a"], r["metric_b"]) for r in rows] == [
        ("c_over_h2", "a50pc"), ("c_over_h2", "a50"), ("a50pc", "a50"),
    ]
    manifest = json.loads((run_dir / "manifest.json").read_text())
    n = manifest["cohort"]["n_eligible"]
    for r in rows:
        assert int(r["a"]) + int(r["b"]) + int(r["c"]) + int(r["d"]) == n


def test_rerun_is_byte_identical_except_timings(corpus_dir, run_dir, tmp_path):
    out2 = tmp_path / "run2"
    assert main(_run_args(corpus_dir, out2, extra=("--threads", "4"))) == 0
    for path in sorted(run_dir.iterdir()):
        if path.name == "timings.json":
            continue
        assert (out2 / path.name).read_bytes() == path.read_bytes(), path.name


def test_missing_input_file_fails_with_single_line_error(corpus_dir, tmp_path, capsys):
    args = _run_args(corpus_dir, tmp_path / "x")
    idx = args.index("--citations")
    args[idx + 1] = str(corpus_dir / "nope.csv")
    assert main(args) == 2
    err = capsys.readouterr().err.strip()
    assert len(err.splitlines()) == 1
    assert err.startswith("error:")
    assert "nope.csv" in err


def test_ingest_check_reports_accounting(corpus_dir, capsys):
    rc = main(
        [
            "ingest-check",
            "--papers", str(corpus_dir / "papers.csv"),
            "--authorships", str(corpus_dir / "authorships.csv"),
            "--citations", str(corpus_dir / "citations.csv"),
            "--taxonomy", str(corpus_dir / "taxonomy.csv"),
        ]
    )
    assert rc == 0
    out = capsys.readouterr().out
    assert "papers: rows_read=" in out
    assert "index: papers=" in out


def test_evaluate_prints_motif_lines(corpus_dir, run_dir, tmp_path, capsys):
    eval_csv = tmp_path / "evaluation.csv"
    rc = main(
        [
            "evaluate",
            "--truth", str(corpus_dir / "truth.csv"),
            "--run-dir", str(run_dir),
            "--out", str(eval_csv),
        ]
    )
    assert rc == 0
    out = capsys.readouterr().out
    for motif in ("self_citer", "cartel_member", "hyperteam_member"):
        assert f"{motif}: planted=" in out
    with open(eval_csv, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert {r["motif"] for r in rows} == {"self_citer", "cartel_member", "hyperteam_member"}


def test_exclude_field_flag_removes_field_from_tails(corpus_dir, tmp_path):
    out = tmp_path / "excl"
    assert main(_run_args(corpus_dir, out, extra=("--exclude-field", "F04"))) == 0
    with open(out / "allocation_a50.csv", newline="") as fh:
        fields = {r["field_id"] for r in csv.DictReader(fh)}
    assert "F04" not in fields
    # the c_over_h2 tail keeps every field
    with open(out / "allocation_c_over_h2.csv", newline="") as fh:
        fields_ratio = {r["field_id"] for r in csv.DictReader(fh)}
    assert "F04" in fields_ratio


def test_tail_values_match_metrics(run_dir):
    with open(run_dir / "metrics.csv", newline="") as fh:
        by_author = {r["author_id"]: r for r in csv.DictReader(fh)}
    with open(run_dir / "tail_a50.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            assert row["value"] == by_author[row["author_id"]]["a50"]


def test_cli_rejects_unknown_subcommand(capsys):
    with pytest.raises(SystemExit):
        main(["frobnicate"])


def test_empty_cohort_still_writes_full_report_set(tmp_path):
    corpus = tmp_path / "tiny"
    corpus.mkdir()
    (corpus / "papers.csv").write_text("paper_id,doc_type,subfield_id\np1,article,s101\n")
    (corpus / "authorships.csv").write_text("paper_id,author_id\np1,a1\n")
    (corpus / "citations.csv").write_text("citing_paper_id,cited_paper_id\n")
    (corpus / "taxonomy.csv").write_text(
        "subfield_id,subfield_name,field_id,field_name\ns101,x,F01,Life Sciences\n"
    )
    out = tmp_path / "out"
    assert main(_run_args(corpus, out)) == 0
    names = {p.name for p in out.iterdir()}
    assert "cooccur.csv" in names and "tail_a50.csv" in names
    assert (out / "metrics.csv").read_text().count("\n") == 1  # header only
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["cohort"]["n_eligible"] == 0


def test_outputs_identical_across_separate_processes(tmp_path):
    """Fresh interpreters get different hash seeds; outputs must not care."""
    import subprocess
    import sys

    synth_args = [
        sys.executable, "-m", "citegraph.cli", "synth",
        "--seed", "31", "--background", "80", "--established-fraction", "0.1",
        "--self-citers", "1", "--cartels", "0", "--hyperteams", "0",
    ]
    dirs = [tmp_path / "proc_a", tmp_path / "proc_b"]
    for d in dirs:
        subprocess.run(synth_args + ["--out", str(d / "corpus")], check=True, capture_output=True)
        run_args = [
            sys.executable, "-m", "citegraph.cli", "run",
            "--papers", str(d / "corpus" / "papers.csv"),
            "--authorships", str(d / "corpus" / "authorships.csv"),
            "--citations", str(d / "corpus" / "citations.csv"),
            "--taxonomy", str(d / "corpus" / "taxonomy.csv"),
            "--out", str(d / "run"),
            "--min-citations", "500",
        ]
        subprocess.run(run_args, check=True, capture_output=True)

    for name in ("papers.csv", "authorships.csv", "citations.csv", "taxonomy.csv", "truth.csv"):
        assert (dirs[0] / "corpus" / name).read_bytes() == (dirs[1] / "corpus" / name).read_bytes()
    for path in sorted((dirs[0] / "run").iterdir()):
        if path.name == "timings.json":
            continue
        rel = path.name
        a, b = path.read_bytes(), (dirs[1] / "run" / rel).read_bytes()
        # the two runs used different corpus paths; normalize them out of the manifest
        if rel == "manifest.json":
            a = a.replace(str(dirs[0]).encode(), b"BASE")
            b = b.replace(str(dirs[1]).encode(), b"BASE")
        assert a == b, rel


def test_malformed_csv_fails_with_line_number(tmp_path, corpus_dir, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text('paper_id,doc_type,subfield_id\n"p1,article,s101\n')
    args = _run_args(corpus_dir, tmp_path / "x")
    idx = args.index("--papers")
    args[idx + 1] = str(bad)
    assert main(args) == 2
    err = capsys.readouterr().err.strip()
    assert err.startswith("error:")
    assert "line" in err
