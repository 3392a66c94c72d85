"""Command line interface: ``fsimpute {ampute,impute,evaluate,benchmark}``.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical error.
"""
import argparse
import csv
import io
import json
import sys

import numpy as np

from .amputation import AmputationConfig, ampute
from .baselines import NumericalError
from .data import DataError, Schema, decode, encode, expand_mask, fit_encoding, raw_mask, read_csv
from .harness import METHODS, ExperimentConfig, StageError, impute_matrix, run_benchmark, write_report
from .imputer import DegenerateMatrixError
from .metrics import DegenerateLabelError, UndefinedMetricError, cv_auroc, rmse
from .nn import DomainError
from .numerics import RngStream, ShapeError

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


class UsageError(Exception):
    pass


def exit_code_for(exc):
    if isinstance(exc, StageError):
        exc = exc.cause
    if isinstance(exc, (NumericalError, DegenerateMatrixError, DomainError, UndefinedMetricError,
                        ArithmeticError, np.linalg.LinAlgError)):
        return EXIT_NUMERIC
    if isinstance(exc, (DataError, DegenerateLabelError, ShapeError, OSError, UnicodeDecodeError)):
        return EXIT_DATA
    return EXIT_USAGE


def write_mask_csv(path, names, observed):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for row in np.asarray(observed, dtype=np.int64):
        w.writerow(row.tolist())
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(buf.getvalue())


def read_mask_csv(path, names):
    with open(path, encoding="utf-8", newline="") as f:
        rows = list(csv.reader(f))
    if not rows or [h.strip() for h in rows[0]] != list(names):
        raise DataError(f"mask header in {path} does not match the schema columns {list(names)}")
    out = []
    for r, row in enumerate(rows[1:], 1):
        if not row:
            continue
        if len(row) != len(names) or any(v.strip() not in ("0", "1") for v in row):
            raise DataError(f"mask row {r} in {path} must have {len(names)} values, each 0 or 1")
        out.append([v.strip() == "1" for v in row])
    return np.array(out, dtype=bool).reshape(-1, len(names))


def _full_mask(ds, enc):
    """Mask over all raw columns (label column always observed)."""
    feat = raw_mask(enc.mask, enc.map)
    names = ds.schema.names
    full = np.ones((len(ds), len(names)), dtype=bool)
    for k, c in enumerate(enc.map.columns):
        full[:, names.index(c.name)] = feat[:, k]
    return full


def cmd_ampute(args):
    schema = Schema.load(args.schema)
    ds = read_csv(args.input, schema, args.na)
    if ds.n_missing():
        raise DataError("ampute needs a complete input table")
    enc = encode(ds)
    cfg = AmputationConfig(args.mechanism, args.t, RngStream(args.seed).child("ampute"),
                           args.mar_dependent_count, args.mnar_self_count)
    res = ampute(enc.x, cfg, enc.map)
    full = np.ones((len(ds), len(schema.names)), dtype=bool)
    for k, c in enumerate(enc.map.columns):
        full[:, schema.index(c.name)] = ~res.raw_missing[:, k]
    with open(args.out_data, "w", encoding="utf-8", newline="") as f:
        f.write(ds.with_missing(~full).to_csv())
    write_mask_csv(args.out_mask, schema.names, full)
    if args.provenance:
        with open(args.provenance, "w", encoding="utf-8") as f:
            json.dump(res.provenance, f, indent=2, sort_keys=True)
    return EXIT_OK


def _method_options(args):
    ifgan = {}
    for flag, key in (("lr", "learning_rate"), ("batch_size", "batch_size"), ("l2", "l2_lambda"),
                      ("alpha", "adversarial_alpha"), ("g_steps", "generator_steps"),
                      ("d_steps", "discriminator_steps"), ("hidden_width", "hidden_width"),
                      ("max_sweeps", "max_sweeps")):
        v = getattr(args, flag)
        if v is not None:
            ifgan[key] = v
    if args.generator_first:
        ifgan["discriminator_first"] = False
    baseline = {}
    for key in ("knn_k", "svd_rank", "svd_tol", "svd_max_iters", "mice_sweeps", "mice_ridge"):
        v = getattr(args, key)
        if v is not None:
            baseline[key] = v
    return ifgan, baseline


def cmd_impute(args):
    schema = Schema.load(args.schema)
    ds = read_csv(args.input, schema, args.na)
    if args.mask:
        given = read_mask_csv(args.mask, schema.names)
        if given.shape[0] != len(ds):
            raise DataError(f"mask has {given.shape[0]} rows, data has {len(ds)}")
        if (ds.missing_matrix() & given).any():
            raise DataError("mask marks a missing cell as observed")
        ds = ds.with_missing(~given)
    enc = encode(ds)
    ifgan, baseline = _method_options(args)
    x, info = impute_matrix(args.method, enc.x, enc.mask, enc.map, RngStream(args.seed).child("impute"),
                            ifgan, baseline)
    labels = ds.values[schema.label] if schema.label is not None else None
    out = decode(x, enc.map, schema, labels)
    with open(args.out, "w", encoding="utf-8", newline="") as f:
        f.write(out.to_csv())
    if args.report:
        with open(args.report, "w", encoding="utf-8") as f:
            json.dump({"method": args.method, "seed": args.seed, **info}, f, indent=2, sort_keys=True)
    return EXIT_OK


def cmd_evaluate(args):
    schema = Schema.load(args.schema)
    if args.label:
        schema = Schema(schema.columns, args.label)
    truth = read_csv(args.truth, schema, args.na)
    imputed = read_csv(args.imputed, schema, args.na)
    if truth.n_missing() or imputed.n_missing():
        raise DataError("truth and imputed tables must be complete")
    if len(truth) != len(imputed):
        raise DataError(f"truth has {len(truth)} rows, imputed has {len(imputed)}")
    observed = read_mask_csv(args.mask, schema.names)
    if observed.shape[0] != len(truth):
        raise DataError(f"mask has {observed.shape[0]} rows, data has {len(truth)}")
    encmap = fit_encoding(truth.with_missing(~observed))
    t = encode(truth, encmap)
    i = encode(imputed, encmap)
    feat_idx = [schema.index(c.name) for c in encmap.columns]
    mask = expand_mask(observed[:, feat_idx], encmap)
    result = {"rmse": rmse(t.x, i.x, mask), "n_missing_cells": int((~observed[:, feat_idx]).sum())}
    if schema.label is not None:
        result["auroc"] = cv_auroc(i.x, t.labels, args.folds, RngStream(args.seed).child("folds"))
        result["folds"] = args.folds
    json.dump(result, sys.stdout, sort_keys=True)
    sys.stdout.write("\n")
    return EXIT_OK


def cmd_benchmark(args):
    try:
        cfg = ExperimentConfig.load(args.config)
    except (ValueError, TypeError) as e:
        raise UsageError(f"invalid experiment config {args.config}: {e}") from e
    out = args.out or cfg.output
    if not out:
        raise UsageError("no output path: pass --out or set 'output' in the config")
    report = run_benchmark(cfg)
    write_report(report, out, "json-lines", args.timing)
    if args.summary:
        write_report(report, args.summary, "csv-summary")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="fsimpute", description="Missing-value imputation and benchmarking.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--schema", required=True, help="schema file")
        sp.add_argument("--na", nargs="*", default=["", "NA"], help="cell strings treated as missing")

    a = sub.add_parser("ampute", help="blank cells of a complete table")
    a.add_argument("input")
    common(a)
    a.add_argument("--mechanism", choices=["MCAR", "MAR", "MNAR"], default="MCAR")
    a.add_argument("--t", type=float, default=None, help="missing rate (default 0.2 for MCAR, 0.5 otherwise)")
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--mar-dependent-count", type=int, default=10)
    a.add_argument("--mnar-self-count", type=int, default=5)
    a.add_argument("--out-data", required=True)
    a.add_argument("--out-mask", required=True)
    a.add_argument("--provenance", help="write mechanism parameters as JSON")
    a.set_defaults(func=cmd_ampute)

    i = sub.add_parser("impute", help="fill missing cells")
    i.add_argument("input")
    common(i)
    i.add_argument("--mask", help="0/1 CSV; zeros are treated as missing")
    i.add_argument("--method", choices=METHODS, default="ifgan")
    i.add_argument("--seed", type=int, default=0)
    i.add_argument("--out", required=True)
    i.add_argument("--report", help="write delta trace and run info as JSON")
    g = i.add_argument_group("ifgan options")
    g.add_argument("--lr", type=float)
    g.add_argument("--batch-size", type=int)
    g.add_argument("--l2", type=float)
    g.add_argument("--alpha", type=float)
    g.add_argument("--g-steps", type=int)
    g.add_argument("--d-steps", type=int)
    g.add_argument("--hidden-width", type=int)
    g.add_argument("--max-sweeps", type=int)
    g.add_argument("--generator-first", action="store_true", help="train G before D in each round")
    b = i.add_argument_group("baseline options")
    b.add_argument("--knn-k", type=int)
    b.add_argument("--svd-rank", type=int)
    b.add_argument("--svd-tol", type=float)
    b.add_argument("--svd-max-iters", type=int)
    b.add_argument("--mice-sweeps", type=int)
    b.add_argument("--mice-ridge", type=float)
    i.set_defaults(func=cmd_impute)

    e = sub.add_parser("evaluate", help="RMSE (and AUROC) of an imputed table")
    e.add_argument("--truth", required=True)
    e.add_argument("--imputed", required=True)
    e.add_argument("--mask", required=True)
    common(e)
    e.add_argument("--label", help="label column (overrides the schema)")
    e.add_argument("--folds", type=int, default=5)
    e.add_argument("--seed", type=int, default=0)
    e.set_defaults(func=cmd_evaluate)

    r = sub.add_parser("benchmark", help="run an experiment grid from a YAML config")
    r.add_argument("--config", required=True)
    r.add_argument("--out", help="JSON-lines report path (default: config 'output')")
    r.add_argument("--summary", help="also write a CSV summary")
    r.add_argument("--timing", action="store_true", help="include wall-clock times in the report")
    r.set_defaults(func=cmd_benchmark)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "t", None) is None and args.command == "ampute":
        args.t = 0.2 if args.mechanism == "MCAR" else 0.5
    try:
        return args.func(args)
    except UsageError as e:
        print(f"fsimpute: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        code = exit_code_for(e)
        if code == EXIT_USAGE and not isinstance(e, (ValueError, TypeError, KeyError)):
            raise
        print(f"fsimpute: error: {e}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
