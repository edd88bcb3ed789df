import json
import warnings

import numpy as np
import pytest

from auscult.cli import main
from auscult.cohort import load_cohort, save_cohort
from auscult.evaluate import evaluate_interactive
from auscult.qnet import load_checkpoint, save_checkpoint
from auscult.raster import ProbabilityRaster, save_raster

from test_evaluate import perfect_params, separable_exam


@pytest.fixture
def cohort_path(tmp_path):
    exams = [separable_exam(2 if i % 2 else 0) for i in range(12)]
    path = tmp_path / "cohort.json"
    save_cohort(exams, path)
    return str(path)


@pytest.fixture
def model_path(tmp_path):
    path = tmp_path / "model.json"
    save_checkpoint(perfect_params(), None, {"name": "perfect"}, path)
    return str(path)


class TestCohortCommand:
    def test_generates_and_reports(self, tmp_path, capsys):
        out = tmp_path / "c.json"
        assert main(["cohort", "--n", "25", "--out", str(out),
                     "--seed", "4"]) == 0
        assert capsys.readouterr().out == f"wrote 25 examinations to {out}\n"
        assert len(load_cohort(out)) == 25

    def test_seed_reproduces_file_bytes(self, tmp_path, capsys):
        a = tmp_path / "a.json"
        b = tmp_path / "b.json"
        main(["cohort", "--n", "10", "--out", str(a), "--seed", "7"])
        main(["cohort", "--n", "10", "--out", str(b), "--seed", "7"])
        assert a.read_bytes() == b.read_bytes()

    def test_global_seed_fallback(self, tmp_path, capsys):
        a = tmp_path / "a.json"
        b = tmp_path / "b.json"
        main(["--seed", "9", "cohort", "--n", "5", "--out", str(a)])
        main(["cohort", "--n", "5", "--out", str(b), "--seed", "9"])
        assert a.read_bytes() == b.read_bytes()


class TestFeaturesCommand:
    def test_known_raster(self, tmp_path, capsys):
        rows = np.zeros((5, 20))
        rows[0, 0:10] = 1.0     # one inspiration event
        rows[2, 0:10] = 0.9     # wheeze throughout it
        path = tmp_path / "r.json"
        save_raster(ProbabilityRaster(rows=rows), path)
        assert main(["features", "--raster", str(path)]) == 0
        values = [float(v) for v in capsys.readouterr().out.strip().split(",")]
        assert values == pytest.approx([0.9, 0, 1.0, 0, 0, 0, 0, 0])

    def test_missing_file_is_an_error(self, tmp_path, capsys):
        assert main(["features", "--raster", str(tmp_path / "nope.json")]) == 1
        assert capsys.readouterr().err.startswith("error:")


class TestTrainCommand:
    def test_zero_episodes(self, tmp_path, cohort_path, capsys):
        ckpt = tmp_path / "out.json"
        curves = tmp_path / "curves"
        assert main(["train", "--cohort", cohort_path, "--out", str(ckpt),
                     "--episodes", "0", "--curves", str(curves)]) == 0
        assert "trained 0 episodes" in capsys.readouterr().out
        _, _, metadata = load_checkpoint(ckpt)
        assert metadata["episodes"] == 0
        assert metadata["updates"] == 0
        assert (tmp_path / "curves-rewards.tsv").read_text() == ""
        assert (tmp_path / "curves-aps.tsv").read_text() == ""

    def test_short_run_writes_curves(self, tmp_path, cohort_path, capsys):
        ckpt = tmp_path / "out.json"
        curves = tmp_path / "curves"
        assert main(["train", "--cohort", cohort_path, "--out", str(ckpt),
                     "--episodes", "3", "--seed", "2",
                     "--curves", str(curves)]) == 0
        rewards = (tmp_path / "curves-rewards.tsv").read_text().strip().split("\n")
        aps = (tmp_path / "curves-aps.tsv").read_text().strip().split("\n")
        assert len(rewards) == 3
        assert len(aps) == 3
        assert rewards[0].split("\t")[0] == "1"

    def test_missing_cohort_file(self, tmp_path, capsys):
        assert main(["train", "--cohort", str(tmp_path / "nope.json"),
                     "--out", str(tmp_path / "m.json")]) == 1
        assert capsys.readouterr().err.startswith("error:")


class TestSimulateCommand:
    def test_line_format_and_outcomes(self, model_path, cohort_path, capsys):
        assert main(["simulate", "--model", model_path,
                     "--cohort", cohort_path, "--n", "5", "--seed", "1"]) == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert len(lines) == 5
        for i, line in enumerate(lines):
            assert line.startswith(f"episode {i + 1}: exam ")
            assert "points [1]" in line
            assert "correct" in line
            assert "reward 1.99" in line

    def test_repeat_runs_identical(self, model_path, cohort_path, capsys):
        main(["simulate", "--model", model_path, "--cohort", cohort_path,
              "--n", "20", "--seed", "5"])
        first = capsys.readouterr().out
        main(["simulate", "--model", model_path, "--cohort", cohort_path,
              "--n", "20", "--seed", "5"])
        assert capsys.readouterr().out == first


class TestEvalCommand:
    def test_fixed_checkpoint_smoke(self, tmp_path, model_path, cohort_path,
                                    capsys):
        out = tmp_path / "report.json"
        table = tmp_path / "folds.tsv"
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            code = main(["eval", "--model", model_path,
                         "--cohort", cohort_path, "--folds", "2",
                         "--repeats", "2", "--seed", "3",
                         "--out", str(out), "--table", str(table)])
        assert code == 0
        printed = capsys.readouterr().out.strip().split("\n")
        assert printed[0] == "folds=2 repeats=2"
        assert printed[1].startswith("bac ")
        doc = json.loads(out.read_text())
        assert doc["n_folds"] == 2
        assert len(doc["folds"]) == 4
        table_lines = table.read_text().strip().split("\n")
        assert table_lines[0].startswith("repeat\tfold")
        assert len(table_lines) == 5

    def test_retraining_smoke(self, cohort_path, capsys):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            code = main(["eval", "--cohort", cohort_path, "--folds", "2",
                         "--repeats", "1", "--episodes", "2", "--seed", "3"])
        assert code == 0
        assert "mean_aps" in capsys.readouterr().out


class TestHistogramCommand:
    def test_counts_sum_to_total(self, model_path, cohort_path, capsys):
        assert main(["histogram", "--model", model_path,
                     "--cohort", cohort_path, "--seed", "2"]) == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert len(lines) == 13
        counts = [int(line.split(":")[1]) for line in lines[:12]]
        total = int(lines[12].split(":")[1])
        assert sum(counts) == total
        # independent accounting: mean auscultations times cohort size
        params, _, _ = load_checkpoint(model_path)
        report = evaluate_interactive(params, load_cohort(cohort_path), seed=2)
        assert total == round(report.mean_aps * report.n)
        assert counts[0] == 12  # the crafted policy always probes point 1


class TestArgumentErrors:
    def test_unknown_command_exits_nonzero(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code != 0

    def test_missing_required_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["train", "--cohort", "x"])
        assert exc.value.code != 0
