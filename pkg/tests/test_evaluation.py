import json

import numpy as np
import pytest

from rodeokde.evaluation import (
    accuracy,
    confusion_matrix,
    macro_precision_specificity,
    run_experiment,
)
from rodeokde.reports import emit_reports
from rodeokde.rodeo import RodeoConfig


class TestMetrics:
    def test_accuracy(self):
        assert accuracy([1, 2, 1], [1, 2, 2]) == pytest.approx(2 / 3)
        assert accuracy([1], [1]) == 1.0

    def test_accuracy_errors(self):
        with pytest.raises(ValueError):
            accuracy([], [])
        with pytest.raises(ValueError):
            accuracy([1, 2], [1])

    def test_confusion_matrix(self):
        cm = confusion_matrix([1, 1, 2, 2], [1, 2, 2, 2], 2)
        assert np.array_equal(cm, [[1, 1], [0, 2]])
        assert cm.sum() == 4

    def test_macro_metrics_hand_case(self):
        # class 1: tp=5 fp=0 fn=5 tn=10 -> precision 1, specificity 1
        # class 2: tp=10 fp=5 fn=0 tn=5 -> precision 2/3, specificity 1/2
        cm = np.array([[5, 5], [0, 10]])
        prec, spec = macro_precision_specificity(cm)
        assert prec == pytest.approx((1.0 + 2 / 3) / 2)
        assert spec == pytest.approx((1.0 + 0.5) / 2)

    def test_macro_metrics_skip_empty_prediction(self):
        # nothing ever predicted as class 2: its precision is excluded
        cm = np.array([[4, 0], [2, 0]])
        prec, spec = macro_precision_specificity(cm)
        assert prec == pytest.approx(4 / 6)
        assert spec == pytest.approx((0 / 4 + 4 / 4) / 2)


@pytest.fixture(scope="module")
def small_aggregate():
    return run_experiment(
        "ex2", trials=3, seed=77, config=RodeoConfig(),
        groups=(3, 5), n_train=60, n_test=20,
    )


class TestRunExperiment:
    def test_aggregate_shapes(self, small_aggregate):
        agg = small_aggregate
        assert len(agg.accuracies) == 3
        assert agg.class_labels == [1, 2]
        assert agg.mean_z_matrix.shape == (2, 10)
        assert agg.mean_bw_matrix.shape == (2, 10)
        assert agg.bw_quartiles.shape == (2, 10, 5)
        # quartile ordering min <= q1 <= med <= q3 <= max
        q = agg.bw_quartiles
        assert np.all(np.diff(q, axis=-1) >= 0)
        assert 0.0 <= agg.mean_accuracy <= 1.0

    def test_deterministic_per_seed(self, small_aggregate):
        again = run_experiment(
            "ex2", trials=3, seed=77, config=RodeoConfig(),
            groups=(3, 5), n_train=60, n_test=20,
        )
        assert again.accuracies == small_aggregate.accuracies
        assert np.array_equal(again.mean_z_matrix, small_aggregate.mean_z_matrix)

    def test_trial_count_extends_prefix(self):
        # first trials share derived seeds, so a longer run extends a shorter one
        short = run_experiment("ex2", trials=2, seed=9, groups=(3, 5), n_train=40, n_test=10)
        long = run_experiment("ex2", trials=3, seed=9, groups=(3, 5), n_train=40, n_test=10)
        assert long.accuracies[:2] == short.accuracies

    def test_with_baseline(self):
        agg = run_experiment(
            "ex2", trials=2, seed=5, groups=(3, 5), n_train=40, n_test=10,
            with_baseline=True,
        )
        assert len(agg.baseline_accuracies) == 2

    def test_errors(self):
        with pytest.raises(ValueError):
            run_experiment("ex2", trials=0, seed=0, groups=(1, 2), n_train=10, n_test=5)
        with pytest.raises(ValueError):
            run_experiment("nope", trials=1, seed=0)
        with pytest.raises(ValueError):
            run_experiment("manifest", trials=1, seed=0)


class TestReports:
    def test_emit_and_reparse(self, small_aggregate, tmp_path):
        out = tmp_path / "report"
        written = emit_reports(small_aggregate, out)
        names = {p.split("/")[-1] for p in map(str, written)}
        assert {"metrics.json", "timings.json", "zscores.csv",
                "mean_bandwidths.csv", "bandwidth_boxplot.csv",
                "features.json"} <= names

        doc = json.loads((out / "metrics.json").read_text())
        assert doc["trials"] == 3
        assert doc["accuracy"]["mean"] == pytest.approx(small_aggregate.mean_accuracy)
        assert len(doc["accuracy"]["per_trial"]) == 3
        assert "wall_time" not in json.dumps(doc)

        timings = json.loads((out / "timings.json").read_text())
        assert len(timings["wall_time_sec"]["per_trial"]) == 3

        z_lines = (out / "zscores.csv").read_text().splitlines()
        assert z_lines[0] == "class," + ",".join(f"x{j}" for j in range(1, 11))
        assert len(z_lines) == 3

        box_lines = (out / "bandwidth_boxplot.csv").read_text().splitlines()
        assert box_lines[0] == "class,dimension,min,q1,median,q3,max"
        assert len(box_lines) == 1 + 2 * 10
        # full-precision round trip of the quartile stats
        vals = np.array([[float(v) for v in ln.split(",")[2:]] for ln in box_lines[1:]])
        assert np.array_equal(vals.reshape(2, 10, 5), small_aggregate.bw_quartiles)

    def test_figures_rendered(self, small_aggregate, tmp_path):
        out = tmp_path / "report"
        written = emit_reports(small_aggregate, out, render_figures=True)
        pngs = [p for p in written if str(p).endswith(".png")]
        assert len(pngs) == 3  # one box plot per class + z-score heat map
        for p in pngs:
            assert (out / "figures").exists()
            with open(p, "rb") as fh:
                assert fh.read(8) == b"\x89PNG\r\n\x1a\n"

    def test_no_figures_flag(self, small_aggregate, tmp_path):
        out = tmp_path / "plain"
        written = emit_reports(small_aggregate, out, render_figures=False)
        assert not any(str(p).endswith(".png") for p in written)

    def test_empty_aggregate(self, small_aggregate, tmp_path):
        import dataclasses

        empty = dataclasses.replace(small_aggregate, accuracies=[])
        with pytest.raises(ValueError):
            emit_reports(empty, tmp_path / "x")
