"""Benchmark orchestration: ampute, impute, score, repeat.

An experiment is described by a YAML document (see
``configs/benchmark_example.yaml``).  Every (sweep point, repeat) cell gets
its own random stream derived from the experiment seed and the cell
coordinates, so reports are reproducible byte for byte.
"""
import csv
import io
import json
import os
import time
from dataclasses import asdict, dataclass, field

import numpy as np
import yaml

from .amputation import MECHANISMS, AmputationConfig, ampute
from .baselines import BaselineConfig, impute_knn, impute_mean, impute_mice, impute_svd
from .data import DataError, Schema, encode, read_csv
from .imputer import IfganConfig, impute
from .metrics import UndefinedMetricError, cv_auroc, rmse
from .nn import TrainConfig
from .numerics import RngStream

METHODS = ("mean", "knn", "svd", "mice", "ifgan", "ifgan-nodisc")
SWEEP_AXES = ("missing_rate", "feature_size", "sample_size")


class StageError(RuntimeError):
    """A failure inside one benchmark cell, tagged with its coordinates."""

    def __init__(self, point, repeat, cause):
        super().__init__(f"sweep point {point}, repeat {repeat}: {type(cause).__name__}: {cause}")
        self.point = point
        self.repeat = repeat
        self.cause = cause


def make_ifgan_config(options=None, use_discriminator=True):
    options = dict(options or {})
    train_keys = set(TrainConfig.__dataclass_fields__)
    train = TrainConfig(**{k: v for k, v in options.items() if k in train_keys})
    rest = {k: v for k, v in options.items() if k not in train_keys}
    unknown = set(rest) - set(IfganConfig.__dataclass_fields__)
    if unknown:
        raise ValueError(f"unknown ifgan options: {sorted(unknown)}")
    rest["use_discriminator"] = use_discriminator and rest.get("use_discriminator", True)
    return IfganConfig(train=train, **rest)


def impute_matrix(method, x_hat, mask, encmap=None, rng=None, ifgan=None, baseline=None):
    """Run one imputation method; returns ``(matrix, info)``.

    ``ifgan`` and ``baseline`` are option dicts (or config objects) for the
    respective families.  ``info`` carries the delta trace for IFGAN runs.
    """
    rng = rng or RngStream(0)
    if method in ("ifgan", "ifgan-nodisc"):
        cfg = ifgan if isinstance(ifgan, IfganConfig) else make_ifgan_config(ifgan, method == "ifgan")
        if method == "ifgan-nodisc":
            cfg = cfg.without_discriminator()
        res = impute(x_hat, mask, cfg, rng, encmap=encmap)
        return res.x, {"delta_trace": res.delta_trace, "sweeps": res.sweeps, "stopped_early": res.stopped_early}
    bcfg = baseline if isinstance(baseline, BaselineConfig) else BaselineConfig(**(baseline or {}))
    if method == "mean":
        out = impute_mean(x_hat, mask, encmap)
    elif method == "knn":
        out = impute_knn(x_hat, mask, bcfg, encmap)
    elif method == "svd":
        out = impute_svd(x_hat, mask, bcfg, encmap)
    elif method == "mice":
        out = impute_mice(x_hat, mask, bcfg, encmap)
    else:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    if encmap is not None:
        # constant features encode to zero everywhere
        for k in encmap.constant_groups:
            c = encmap.columns[k]
            out[:, c.span] = np.where(mask[:, c.span], out[:, c.span], 0.0)
    return out, {}


@dataclass
class ExperimentConfig:
    data: str = None
    schema: str = None
    mechanism: str = "MCAR"
    missing_rate: float = 0.2
    method: str = "ifgan"
    repeats: int = 5
    seed: int = 0
    sweep_axis: str = None
    sweep_values: list = field(default_factory=list)
    output: str = None
    folds: int = 5
    auroc: bool = True
    mar_dependent_count: int = 10
    mnar_self_count: int = 5
    ifgan: dict = field(default_factory=dict)
    baseline: dict = field(default_factory=dict)
    na_values: list = field(default_factory=lambda: ["", "NA"])

    def __post_init__(self):
        self.mechanism = str(self.mechanism).upper()
        if self.mechanism not in MECHANISMS:
            raise ValueError(f"mechanism must be one of {MECHANISMS}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if self.folds < 1:
            raise ValueError("folds must be >= 1")
        if self.sweep_axis is not None:
            if self.sweep_axis not in SWEEP_AXES:
                raise ValueError(f"sweep axis must be one of {SWEEP_AXES}")
            for v in self.sweep_values:
                if self.sweep_axis == "missing_rate" and not 0 < v < 1:
                    raise ValueError(f"missing rate sweep value {v} outside (0, 1)")
                if self.sweep_axis != "missing_rate" and (int(v) != v or v < 1):
                    raise ValueError(f"{self.sweep_axis} sweep values must be positive integers, got {v}")

    @classmethod
    def from_dict(cls, d, base_dir=None):
        d = dict(d)
        sweep = d.pop("sweep", None)
        if sweep:
            d["sweep_axis"] = sweep.get("axis")
            d["sweep_values"] = list(sweep.get("values", []))
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown experiment config keys: {sorted(unknown)}")
        if base_dir:
            for key in ("data", "schema", "output"):
                if d.get(key) and not os.path.isabs(d[key]):
                    d[key] = os.path.join(base_dir, d[key])
        return cls(**d)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as f:
            doc = yaml.safe_load(f) or {}
        return cls.from_dict(doc, base_dir=os.path.dirname(os.path.abspath(path)))

    def to_dict(self):
        return asdict(self)


@dataclass
class ExperimentReport:
    config: dict
    records: list

    def points(self):
        seen = {}
        for r in self.records:
            seen.setdefault(r["point"], []).append(r)
        return [seen[k] for k in sorted(seen)]


def _point_values(cfg):
    if cfg.sweep_axis is None:
        return [None]
    return list(cfg.sweep_values)


def run_cell(ds, cfg, point, value, repeat):
    rng = RngStream(cfg.seed).child("point", point, "repeat", repeat)
    t = cfg.missing_rate
    sub = ds
    if cfg.sweep_axis == "missing_rate":
        t = float(value)
    elif cfg.sweep_axis == "feature_size":
        features = [c.name for c in ds.schema.features]
        if value > len(features):
            raise ValueError(f"feature size {value} exceeds the {len(features)} available features")
        pick = np.sort(rng.child("features").choice(len(features), size=int(value), replace=False))
        keep = {features[i] for i in pick}
        if ds.schema.label is not None:
            keep.add(ds.schema.label)
        sub = ds.select_columns([n for n in ds.schema.names if n in keep])
    elif cfg.sweep_axis == "sample_size":
        if value > len(ds):
            raise ValueError(f"sample size {value} exceeds the {len(ds)} available rows")
        rows = np.sort(rng.child("rows").choice(len(ds), size=int(value), replace=False))
        sub = ds.take_rows(rows)

    enc = encode(sub)
    amp = ampute(enc.x, AmputationConfig(cfg.mechanism, t, rng.child("ampute"),
                                         cfg.mar_dependent_count, cfg.mnar_self_count), enc.map)
    start = time.perf_counter()
    x_imp, info = impute_matrix(cfg.method, amp.x_hat, amp.mask, enc.map, rng.child("impute"),
                                cfg.ifgan, cfg.baseline)
    elapsed = time.perf_counter() - start

    record = {
        "point": point,
        "axis": cfg.sweep_axis,
        "value": value,
        "repeat": repeat,
        "seed": cfg.seed,
        "mechanism": cfg.mechanism,
        "missing_rate": t,
        "method": cfg.method,
        "n_rows": len(sub),
        "n_features": len(sub.schema.features),
        "n_missing_cells": int(amp.raw_missing.sum()),
        "provenance": amp.provenance,
        "delta_trace": info.get("delta_trace"),
        "wall_clock": elapsed,
    }
    try:
        record["rmse"] = rmse(enc.x, x_imp, amp.mask)
        record["rmse_status"] = "ok"
    except UndefinedMetricError:
        record["rmse"] = None
        record["rmse_status"] = "undefined: no cells amputed"
    record["auroc"] = None
    if cfg.auroc and enc.labels is not None:
        # only the imputed matrix reaches the classifier
        record["auroc"] = cv_auroc(x_imp, enc.labels, cfg.folds, rng.child("folds"))
    return record


def run_benchmark(cfg, dataset=None):
    """Run the full (sweep point x repeat) grid and collect an :class:`ExperimentReport`."""
    if dataset is None:
        schema = Schema.load(cfg.schema)
        dataset = read_csv(cfg.data, schema, tuple(cfg.na_values))
    if dataset.n_missing():
        raise DataError("benchmark input must be complete; amputation needs ground truth for every cell")
    records = []
    for point, value in enumerate(_point_values(cfg)):
        for repeat in range(cfg.repeats):
            try:
                records.append(run_cell(dataset, cfg, point, value, repeat))
            except Exception as e:
                raise StageError(point, repeat, e) from e
    return ExperimentReport(cfg.to_dict(), records)


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _fmt(v):
    return "NA" if v is None or not np.isfinite(v) else f"{v:.4f}"


def _mean_std(values):
    vals = [v for v in values if v is not None]
    if not vals:
        return None, None
    mean = float(np.mean(vals))
    std = float(np.std(vals, ddof=1)) if len(vals) > 1 else None
    return mean, std


SUMMARY_HEADER = ["point", "axis", "value", "mechanism", "method", "repeats",
                  "rmse_mean", "rmse_std", "auroc_mean", "auroc_std"]


def emit_report(report, fmt="json-lines", include_timing=False):
    """Serialize a report to bytes.

    ``json-lines`` writes one record per (sweep point, repeat), each with
    the resolved config.  ``csv-summary`` writes one row per sweep point
    with 4-decimal means and sample (n - 1) standard deviations.  Timings
    are left out unless ``include_timing`` is set, so equal runs give
    equal bytes.
    """
    if fmt == "json-lines":
        lines = []
        for r in report.records:
            rec = dict(r)
            if not include_timing:
                rec.pop("wall_clock", None)
            rec["config"] = report.config
            lines.append(json.dumps(rec, sort_keys=True, default=_json_default))
        return ("\n".join(lines) + ("\n" if lines else "")).encode("utf-8")
    if fmt == "csv-summary":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SUMMARY_HEADER)
        for recs in report.points():
            first = recs[0]
            rm, rs = _mean_std([r["rmse"] for r in recs])
            am, as_ = _mean_std([r["auroc"] for r in recs])
            w.writerow([first["point"], first["axis"] or "", "" if first["value"] is None else first["value"],
                        first["mechanism"], first["method"], len(recs),
                        _fmt(rm), _fmt(rs), _fmt(am), _fmt(as_)])
        return buf.getvalue().encode("utf-8")
    raise ValueError(f"unknown report format {fmt!r}")


def write_report(report, path, fmt="json-lines", include_timing=False):
    data = emit_report(report, fmt, include_timing)
    try:
        with open(path, "wb") as f:
            f.write(data)
    except OSError as e:
        raise OSError(f"cannot write report to {path}: {e}") from e
    return path
