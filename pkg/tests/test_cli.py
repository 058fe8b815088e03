import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from predgroups.cli import cli, main
from predgroups.synthetic import topical_corpus


@pytest.fixture
def dataset_file(tmp_path):
    corpus = topical_corpus(3, 8, seed=31)
    path = tmp_path / "dataset.json"
    corpus.save(path)
    return path


def _run(*args):
    result = CliRunner().invoke(cli, [str(a) for a in args], catch_exceptions=False)
    return result


def _exit_code(argv):
    with pytest.raises(SystemExit) as exit_info:
        main([str(a) for a in argv])
    return exit_info.value.code


def test_ingest_prints_stats(dataset_file):
    result = _run("ingest", dataset_file)
    assert result.exit_code == 0
    stats = json.loads(result.output)
    assert stats["n_contributions"] == 24
    assert stats["n_comparisons"] == 3


def test_stats_with_trendlines(dataset_file, tmp_path):
    trend_dir = tmp_path / "trends"
    result = _run("stats", dataset_file, "--min-contributions", 8,
                  "--trend-dir", trend_dir)
    assert result.exit_code == 0
    payload = json.loads(result.output)
    assert payload["n_derived_groups"] == 3
    assert (trend_dir / "contributions_per_comparison.csv").exists()
    assert (trend_dir / "contributions_per_predicate.csv").exists()


def test_split_writes_spec(dataset_file, tmp_path):
    out = tmp_path / "split.json"
    result = _run("split", dataset_file, "--ratio", 0.7, "--seed", 3, "--out", out)
    assert result.exit_code == 0
    payload = json.loads(result.output)
    assert payload["n_train"] == 15  # floor(0.7 * 8) = 5 per comparison
    assert payload["n_test"] == 9
    spec = json.loads(out.read_text())
    assert spec["seed"] == 3


def test_fit_then_recommend_offline(dataset_file, tmp_path):
    out_dir = tmp_path / "models"
    result = _run("fit", dataset_file, "--algo", "kmeans", "--k", 3,
                  "--seed", 0, "--out-dir", out_dir)
    assert result.exit_code == 0
    info = json.loads(result.output)
    model_path = Path(info["model"])
    assert model_path.exists()
    assert (out_dir / "tfidf.json").exists()
    assert (out_dir / "kmeans-k3-assignment.csv").exists()

    result = _run(
        "--config", _config_file(tmp_path, dataset_file),
        "recommend", "--title", "word0x1 word0x2 word0x3",
        "--model", model_path, "--offline",
    )
    assert result.exit_code == 0
    rec = json.loads(result.output)
    assert rec["empty"] is False
    assert rec["predicates"][0]["id"].startswith("pred-")


def _config_file(tmp_path, dataset_file):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({
        "dataset": str(dataset_file),
        "cache_dir": str(tmp_path / "cache"),
    }))
    return str(path)


def test_recommend_without_model_exits_3(dataset_file, tmp_path):
    code = _exit_code([
        "recommend", "--title", "anything",
        "--model", tmp_path / "missing.pgcm", "--dataset", dataset_file,
    ])
    assert code == 3


def test_recommend_without_title_or_doi_exits_1(dataset_file, tmp_path):
    code = _exit_code([
        "recommend", "--model", tmp_path / "missing.pgcm", "--dataset", dataset_file,
    ])
    assert code == 1


def test_bad_dataset_exits_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"papers": []}')
    assert _exit_code(["ingest", bad]) == 2


def test_json_error_reporting(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    import io
    import contextlib

    stderr = io.StringIO()
    with contextlib.redirect_stderr(stderr):
        with pytest.raises(SystemExit) as exit_info:
            main(["--json", "ingest", str(bad)])
    assert exit_info.value.code == 2
    payload = json.loads(stderr.getvalue().strip())
    assert payload["error"] == "data"


def test_unknown_command_exits_1():
    assert _exit_code(["frobnicate"]) == 1


def test_evaluate_research_field_baseline(dataset_file):
    result = _run("evaluate", dataset_file, "--algo", "research-field", "--seed", 0)
    assert result.exit_code == 0
    row = json.loads(result.output)
    assert row["macro_recall"] == 1.0


def test_evaluate_clustering(dataset_file):
    result = _run("evaluate", dataset_file, "--algo", "agglomerative", "--k", 3)
    assert result.exit_code == 0
    row = json.loads(result.output)
    assert row["k"] == 3
    assert row["macro_f1"] == 1.0  # topical corpus is perfectly separable


def test_sweep_writes_csv_and_checkpoint(dataset_file, tmp_path):
    out = tmp_path / "report.csv"
    result = _run(
        "sweep", dataset_file, "--algo", "agglomerative",
        "--k-min", 2, "--k-max", 6, "--k-step", 2, "--out", out,
    )
    assert result.exit_code == 0
    assert out.exists()
    assert Path(str(out) + ".jsonl").exists()
    lines = out.read_text().splitlines()
    assert len(lines) == 4  # header + 3 rows


def test_cli_reports_are_byte_identical_across_runs(dataset_file, tmp_path):
    outs = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        _run("sweep", dataset_file, "--algo", "kmeans", "--seed", 7,
             "--k-min", 2, "--k-max", 4, "--k-step", 2, "--out", out,
             "--checkpoint", tmp_path / (name + ".jsonl"))
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_regen_command(dataset_file, tmp_path):
    out_dir = tmp_path / "models"
    info = json.loads(
        _run("fit", dataset_file, "--algo", "agglomerative", "--k", 3,
             "--out-dir", out_dir).output
    )
    result = _run("regen", dataset_file, "--model", info["model"],
                  "--out", tmp_path / "regen.csv")
    assert result.exit_code == 0
    payload = json.loads(result.output)
    assert payload["average"] == 1.0  # topical corpus clusters are pure
    assert (tmp_path / "regen.csv").exists()


def test_regen_missing_model_exits_3(dataset_file, tmp_path):
    code = _exit_code(
        ["regen", dataset_file, "--model", tmp_path / "none.pgcm"]
    )
    assert code == 3


@pytest.mark.skipif(
    not __import__("conftest").dataset_path().exists(),
    reason="published task dataset not available; set PREDGROUPS_DATASET",
)
def test_stats_on_task_dataset_reports_table_totals():
    from conftest import dataset_path

    result = _run("stats", dataset_path())
    stats = json.loads(result.output)
    assert stats["n_papers"] == 3941
    assert stats["n_contributions"] == 5123
    assert stats["n_unique_predicates"] == 1681
    assert stats["n_research_fields"] == 44
