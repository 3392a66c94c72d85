import json

import numpy as np
import pytest

from fsimpute.data import DataError
from fsimpute.harness import (
    ExperimentConfig,
    ExperimentReport,
    SUMMARY_HEADER,
    StageError,
    emit_report,
    impute_matrix,
    run_benchmark,
)
from fsimpute.synthetic import as_dataset, linear_blend, logistic_labeled

FAST_IFGAN = {"generator_steps": 20, "discriminator_steps": 5, "max_sweeps": 2, "batch_size": 32}


@pytest.fixture(scope="module")
def labeled():
    x, y = logistic_labeled(n=200, d=5, seed=1)
    return as_dataset(x, y)


def cfg(**kw):
    base = dict(method="mean", repeats=2, seed=3, folds=2)
    base.update(kw)
    return ExperimentConfig(**base)


def test_reports_are_byte_identical(labeled):
    c = cfg(method="ifgan", ifgan=FAST_IFGAN, sweep_axis="missing_rate", sweep_values=[0.2, 0.4])
    a = run_benchmark(c, labeled)
    b = run_benchmark(c, labeled)
    assert emit_report(a) == emit_report(b)
    assert emit_report(a, "csv-summary") == emit_report(b, "csv-summary")


def test_timing_only_when_requested(labeled):
    rep = run_benchmark(cfg(), labeled)
    assert b"wall_clock" not in emit_report(rep)
    assert b"wall_clock" in emit_report(rep, include_timing=True)


def test_json_lines_record_count_and_config(labeled):
    rep = run_benchmark(cfg(sweep_axis="missing_rate", sweep_values=[0.1, 0.2, 0.3]), labeled)
    lines = emit_report(rep).decode().splitlines()
    assert len(lines) == 6
    rec = json.loads(lines[0])
    assert rec["config"]["seed"] == 3
    assert {"rmse", "auroc", "provenance", "repeat", "point"} <= set(rec)


def test_empty_sweep_gives_header_only(labeled):
    rep = run_benchmark(cfg(sweep_axis="missing_rate", sweep_values=[]), labeled)
    assert emit_report(rep, "csv-summary") == (",".join(SUMMARY_HEADER) + "\n").encode()
    assert emit_report(rep) == b""


def _report(rmses, aurocs=None):
    recs = [{"point": 0, "axis": None, "value": None, "mechanism": "MCAR", "method": "mean",
             "rmse": r, "auroc": None if aurocs is None else aurocs[i]} for i, r in enumerate(rmses)]
    return ExperimentReport({}, recs)


def test_summary_formatting_and_sample_std():
    row = emit_report(_report([0.1, 0.2]), "csv-summary").decode().splitlines()[1].split(",")
    assert row[SUMMARY_HEADER.index("rmse_mean")] == "0.1500"
    assert row[SUMMARY_HEADER.index("rmse_std")] == "0.0707"
    assert row[SUMMARY_HEADER.index("auroc_mean")] == "NA"


def test_identical_repeats_have_zero_std():
    row = emit_report(_report([0.3, 0.3, 0.3]), "csv-summary").decode().splitlines()[1].split(",")
    assert row[SUMMARY_HEADER.index("rmse_std")] == "0.0000"


def test_single_repeat_std_is_na():
    row = emit_report(_report([0.3]), "csv-summary").decode().splitlines()[1].split(",")
    assert row[SUMMARY_HEADER.index("rmse_std")] == "NA"


def test_tiny_rate_reports_undefined_rmse():
    ds = as_dataset(linear_blend(n=5, d=2, seed=0))
    rep = run_benchmark(cfg(missing_rate=1e-9, auroc=False, repeats=1), ds)
    (rec,) = rep.records
    assert rec["rmse"] is None
    assert rec["rmse_status"].startswith("undefined")


def test_amputed_cell_count_grows_with_missing_rate():
    ds = as_dataset(linear_blend(n=500, d=6, seed=2))
    rep = run_benchmark(cfg(repeats=3, auroc=False, sweep_axis="missing_rate",
                            sweep_values=[0.1, 0.4, 0.7]), ds)
    assert all(r["rmse_status"] == "ok" for r in rep.records)
    counts = [np.mean([r["n_missing_cells"] for r in p]) for p in rep.points()]
    assert counts[0] < counts[1] < counts[2]


def test_feature_size_sweep(labeled):
    rep = run_benchmark(cfg(sweep_axis="feature_size", sweep_values=[2, 4]), labeled)
    assert [p[0]["n_features"] for p in rep.points()] == [2, 4]


def test_sample_size_sweep(labeled):
    rep = run_benchmark(cfg(sweep_axis="sample_size", sweep_values=[50, 120]), labeled)
    assert [p[0]["n_rows"] for p in rep.points()] == [50, 120]


def test_oversized_sweep_is_stage_error(labeled):
    with pytest.raises(StageError) as e:
        run_benchmark(cfg(sweep_axis="sample_size", sweep_values=[10_000]), labeled)
    assert e.value.point == 0 and e.value.repeat == 0


def test_incomplete_input_rejected(labeled):
    holes = labeled.with_missing(np.eye(len(labeled), len(labeled.schema.names), dtype=bool))
    with pytest.raises(DataError):
        run_benchmark(cfg(), holes)


def test_config_validation():
    with pytest.raises(ValueError):
        cfg(method="gain")
    with pytest.raises(ValueError):
        cfg(sweep_axis="missing_rate", sweep_values=[1.5])
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"methd": "mean"})


def test_config_from_yaml_resolves_paths(tmp_path):
    p = tmp_path / "exp.yaml"
    p.write_text("data: d.csv\nschema: s.schema\nsweep: {axis: sample_size, values: [10, 20]}\n")
    c = ExperimentConfig.load(p)
    assert c.data == str(tmp_path / "d.csv")
    assert c.sweep_axis == "sample_size" and c.sweep_values == [10, 20]


@pytest.mark.parametrize("method", ["mean", "knn", "svd", "mice", "ifgan", "ifgan-nodisc"])
def test_impute_matrix_all_methods(method, nprng):
    x = linear_blend(n=60, d=4, seed=4)
    m = nprng.uniform(size=x.shape) > 0.2
    m[0] = True
    out, info = impute_matrix(method, np.where(m, x, 0), m, ifgan=FAST_IFGAN, baseline={"svd_rank": 2})
    assert np.array_equal(out[m], x[m])
    assert np.isfinite(out).all()
    assert ("delta_trace" in info) == method.startswith("ifgan")
