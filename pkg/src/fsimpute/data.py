"""Mixed-type datasets and their numeric encoding.

A :class:`MixedDataset` holds continuous and categorical columns with
missing cells.  :func:`encode` turns it into a fully numeric matrix in
``[0, 1]`` plus a boolean mask (``True`` = observed).  Continuous columns
are min-max scaled with bounds taken from observed cells; categorical
columns are one-hot encoded, except two-category columns which become a
single 0/1 column.  Missing slots in the encoded matrix hold ``0.0`` and
are identified only through the mask.

Schema files use a flat ``key = value`` layout, one block per column::

    [column]
    name = age
    kind = continuous

    [column]
    name = smoker
    kind = categorical
    categories = no|yes
    label = true

Blank lines separate blocks and lines starting with ``#`` are ignored.
:meth:`Schema.to_text` writes the canonical form, which parses back to
the same bytes.
"""
import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .numerics import ShapeError

CONTINUOUS = "continuous"
CATEGORICAL = "categorical"
DEFAULT_NA = ("", "NA")


class DataError(ValueError):
    """Malformed input data or schema."""


class ParseError(DataError):
    def __init__(self, message, row=None, column=None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.row = row
        self.column = column


class UnimputableColumnError(DataError):
    """A column has no observed cells, so nothing can be learned for it."""


@dataclass(frozen=True)
class Column:
    name: str
    kind: str
    categories: tuple = ()

    def __post_init__(self):
        if self.kind not in (CONTINUOUS, CATEGORICAL):
            raise DataError(f"column {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == CATEGORICAL:
            cats = tuple(self.categories)
            if len(cats) < 2 or len(set(cats)) != len(cats):
                raise DataError(f"column {self.name!r}: categorical columns need >= 2 distinct categories")
            object.__setattr__(self, "categories", cats)
        elif self.categories:
            raise DataError(f"column {self.name!r}: continuous columns take no categories")

    @property
    def is_categorical(self):
        return self.kind == CATEGORICAL


@dataclass(frozen=True)
class Schema:
    columns: tuple
    label: str = None

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise DataError("column names must be unique")
        if self.label is not None and self.label not in names:
            raise DataError(f"label column {self.label!r} is not in the schema")

    @property
    def names(self):
        return [c.name for c in self.columns]

    @property
    def features(self):
        """Columns used for imputation (everything except the label)."""
        return [c for c in self.columns if c.name != self.label]

    def index(self, name):
        return self.names.index(name)

    def __getitem__(self, name):
        return self.columns[self.index(name)]

    def subset(self, names):
        keep = set(names)
        label = self.label if self.label in keep else None
        return Schema(tuple(c for c in self.columns if c.name in keep), label)

    # -- schema file -----------------------------------------------------
    def to_text(self):
        blocks = []
        for c in self.columns:
            lines = ["[column]", f"name = {c.name}", f"kind = {c.kind}"]
            if c.is_categorical:
                lines.append("categories = " + "|".join(c.categories))
            if c.name == self.label:
                lines.append("label = true")
            blocks.append("\n".join(lines) + "\n")
        return "\n".join(blocks)

    @classmethod
    def from_text(cls, text):
        entries = []
        current = None
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line == "[column]":
                current = {}
                entries.append((lineno, current))
                continue
            if current is None:
                raise DataError(f"schema line {lineno}: expected '[column]' before {line!r}")
            key, sep, value = line.partition("=")
            if not sep:
                raise DataError(f"schema line {lineno}: expected 'key = value', got {line!r}")
            key, value = key.strip(), value.strip()
            if key not in ("name", "kind", "categories", "label"):
                raise DataError(f"schema line {lineno}: unknown key {key!r}")
            if key in current:
                raise DataError(f"schema line {lineno}: duplicate key {key!r}")
            current[key] = value

        columns, label = [], None
        for lineno, e in entries:
            if "name" not in e or "kind" not in e:
                raise DataError(f"schema block at line {lineno} needs both name and kind")
            cats = tuple(e["categories"].split("|")) if "categories" in e else ()
            columns.append(Column(e["name"], e["kind"], cats))
            flag = e.get("label", "false").lower()
            if flag not in ("true", "false"):
                raise DataError(f"schema block at line {lineno}: label must be true or false")
            if flag == "true":
                if label is not None:
                    raise DataError("only one column may be marked as label")
                label = e["name"]
        if not columns:
            raise DataError("schema declares no columns")
        return cls(tuple(columns), label)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as f:
            return cls.from_text(f.read())

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(self.to_text())


class MixedDataset:
    """Table of continuous and categorical columns with missing cells.

    Continuous columns are stored as float arrays (NaN = missing) and
    categorical columns as integer codes into the declared category list
    (-1 = missing).
    """

    def __init__(self, schema, values):
        self.schema = schema
        self.values = {}
        n = None
        for col in schema.columns:
            v = np.asarray(values[col.name])
            if col.is_categorical:
                v = v.astype(np.int64)
                if ((v < -1) | (v >= len(col.categories))).any():
                    raise DataError(f"column {col.name!r}: category code out of range")
            else:
                v = v.astype(np.float64)
                if np.isinf(v).any():
                    raise DataError(f"column {col.name!r}: values must be finite")
            if n is None:
                n = v.shape[0]
            elif v.shape != (n,):
                raise ShapeError(f"column {col.name!r} has shape {v.shape}, expected ({n},)")
            self.values[col.name] = v
        self.n_rows = n or 0

    def __len__(self):
        return self.n_rows

    def missing(self, name):
        v = self.values[name]
        return v < 0 if self.schema[name].is_categorical else np.isnan(v)

    def missing_matrix(self):
        """``N x (raw columns)`` boolean array, True where a cell is missing."""
        return np.column_stack([self.missing(n) for n in self.schema.names])

    def n_missing(self):
        return int(self.missing_matrix().sum())

    def labels(self):
        """Label column as 0/1 integers (categorical codes or rounded numbers)."""
        if self.schema.label is None:
            raise DataError("schema has no label column")
        name = self.schema.label
        if self.missing(name).any():
            raise DataError(f"label column {name!r} has missing cells")
        v = self.values[name]
        return np.asarray(v, dtype=np.int64) if self.schema[name].is_categorical else np.rint(v).astype(np.int64)

    def take_rows(self, rows):
        rows = np.asarray(rows, dtype=np.int64)
        return MixedDataset(self.schema, {k: v[rows] for k, v in self.values.items()})

    def select_columns(self, names):
        schema = self.schema.subset(names)
        return MixedDataset(schema, {n: self.values[n] for n in schema.names})

    def with_missing(self, missing):
        """Copy with additional cells blanked; ``missing`` is ``N x raw columns``."""
        missing = np.asarray(missing, dtype=bool)
        out = {}
        for j, col in enumerate(self.schema.columns):
            v = self.values[col.name].copy()
            v[missing[:, j]] = -1 if col.is_categorical else np.nan
            out[col.name] = v
        return MixedDataset(self.schema, out)

    def cell(self, i, name):
        col = self.schema[name]
        v = self.values[name][i]
        if col.is_categorical:
            return None if v < 0 else col.categories[v]
        return None if np.isnan(v) else float(v)

    def to_csv(self, na="NA"):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.schema.names)
        cols = self.schema.columns
        for i in range(self.n_rows):
            row = []
            for c in cols:
                v = self.cell(i, c.name)
                row.append(na if v is None else (v if c.is_categorical else repr(v)))
            w.writerow(row)
        return buf.getvalue()

    def equals(self, other):
        if self.schema != other.schema or self.n_rows != other.n_rows:
            return False
        return all(np.array_equal(self.values[n], other.values[n], equal_nan=True) for n in self.schema.names)


def parse_csv(text, schema, na_values=DEFAULT_NA):
    """Read CSV text into a :class:`MixedDataset`.

    Missing cells are those whose stripped text is in ``na_values``.  Errors
    carry 1-based data-row numbers and column names.
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty CSV (header row required)") from None
    header = [h.strip() for h in header]
    if header != schema.names:
        raise ParseError(f"header {header} does not match schema columns {schema.names}")

    na = set(na_values)
    cols = schema.columns
    lookup = [{c: k for k, c in enumerate(col.categories)} if col.is_categorical else None for col in cols]
    data = [[] for _ in cols]
    for r, row in enumerate(reader, 1):
        if not row:
            continue
        if len(row) != len(cols):
            raise ParseError(f"expected {len(cols)} fields, got {len(row)}", row=r)
        for j, (col, raw) in enumerate(zip(cols, row)):
            s = raw.strip()
            if s in na:
                data[j].append(-1 if col.is_categorical else np.nan)
            elif col.is_categorical:
                if s not in lookup[j]:
                    raise ParseError(f"unknown category {s!r} (allowed: {list(col.categories)})", row=r, column=col.name)
                data[j].append(lookup[j][s])
            else:
                try:
                    x = float(s)
                except ValueError:
                    raise ParseError(f"cannot parse {s!r} as a number", row=r, column=col.name) from None
                if not np.isfinite(x):
                    raise ParseError(f"non-finite number {s!r}", row=r, column=col.name)
                data[j].append(x)
    return MixedDataset(schema, {col.name: np.array(d, dtype=np.int64 if col.is_categorical else np.float64)
                                 for col, d in zip(cols, data)})


def read_csv(path, schema, na_values=DEFAULT_NA):
    with open(path, encoding="utf-8", newline="") as f:
        return parse_csv(f.read(), schema, na_values)


@dataclass
class ColumnEncoding:
    name: str
    kind: str
    start: int
    stop: int
    low: float = 0.0
    high: float = 1.0
    categories: tuple = ()
    constant: bool = False

    @property
    def span(self):
        return slice(self.start, self.stop)

    @property
    def width(self):
        return self.stop - self.start

    @property
    def binary(self):
        return self.kind == CATEGORICAL


@dataclass
class EncodingMap:
    """Where each feature column lives in the encoded matrix and how it is scaled."""

    columns: list = field(default_factory=list)

    @property
    def width(self):
        return self.columns[-1].stop if self.columns else 0

    @property
    def spans(self):
        return [(c.start, c.stop) for c in self.columns]

    @property
    def binary_columns(self):
        """Boolean flag per encoded column: True for 0/1 (categorical) targets."""
        out = np.zeros(self.width, dtype=bool)
        for c in self.columns:
            out[c.span] = c.binary
        return out

    @property
    def constant_groups(self):
        return [k for k, c in enumerate(self.columns) if c.constant]

    def group_of(self, name):
        for k, c in enumerate(self.columns):
            if c.name == name:
                return k
        raise KeyError(name)

    @classmethod
    def identity(cls, d):
        """Map for an already-numeric matrix: every column continuous, no rescaling."""
        return cls([ColumnEncoding(f"x{j}", CONTINUOUS, j, j + 1) for j in range(d)])


@dataclass
class Encoded:
    x: np.ndarray
    mask: np.ndarray
    map: EncodingMap
    labels: np.ndarray = None


def fit_encoding(ds):
    """Compute the encoding map from the observed cells of ``ds``."""
    cols, start = [], 0
    for col in ds.schema.features:
        v = ds.values[col.name]
        miss = ds.missing(col.name)
        if miss.all():
            raise UnimputableColumnError(f"column {col.name!r} has no observed cells")
        if col.is_categorical:
            width = 1 if len(col.categories) == 2 else len(col.categories)
            cols.append(ColumnEncoding(col.name, CATEGORICAL, start, start + width, categories=col.categories))
        else:
            obs = v[~miss]
            lo, hi = float(obs.min()), float(obs.max())
            width = 1
            cols.append(ColumnEncoding(col.name, CONTINUOUS, start, start + 1, lo, hi, constant=lo == hi))
        start += width
    return EncodingMap(cols)


def encode(ds, encmap=None):
    """Encode ``ds`` into an :class:`Encoded` (matrix, mask, map, labels).

    ``encmap`` reuses existing bounds (e.g. to put ground truth and an
    imputed table in the same space); otherwise bounds come from the
    observed cells of ``ds``.
    """
    if encmap is None:
        encmap = fit_encoding(ds)
    n = ds.n_rows
    x = np.zeros((n, encmap.width))
    mask = np.ones((n, encmap.width), dtype=bool)
    for c in encmap.columns:
        v = ds.values[c.name]
        miss = ds.missing(c.name)
        if c.kind == CATEGORICAL:
            if c.width == 1:
                x[:, c.start] = np.where(miss, 0.0, v == 1)
            else:
                rows = np.flatnonzero(~miss)
                x[rows, c.start + v[rows]] = 1.0
        elif not c.constant:
            x[:, c.start] = np.where(miss, 0.0, (np.nan_to_num(v) - c.low) / (c.high - c.low))
        mask[miss, c.start:c.stop] = False
    labels = ds.labels() if ds.schema.label is not None else None
    return Encoded(x, mask, encmap, labels)


def decode(x, encmap, schema, labels=None):
    """Inverse of :func:`encode` for a complete matrix.

    Categorical spans decode by argmax (ties go to the lowest category
    position); two-category columns decode to the second category when the
    value exceeds 0.5.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != encmap.width:
        raise ShapeError(f"matrix shape {x.shape} does not match encoding width {encmap.width}")
    values = {}
    for c in encmap.columns:
        block = x[:, c.span]
        if c.kind == CATEGORICAL:
            values[c.name] = (block[:, 0] > 0.5).astype(np.int64) if c.width == 1 else np.argmax(block, axis=1)
        elif c.constant:
            values[c.name] = np.full(x.shape[0], c.low)
        else:
            values[c.name] = block[:, 0] * (c.high - c.low) + c.low
    if schema.label is not None:
        if labels is None:
            raise DataError("labels are required to decode a schema with a label column")
        values[schema.label] = np.asarray(labels)
    return MixedDataset(schema, values)


def raw_mask(mask, encmap):
    """Collapse an encoded mask to one column per feature."""
    return np.asarray(mask, dtype=bool)[:, [c.start for c in encmap.columns]]


def expand_mask(raw, encmap):
    """Broadcast a per-feature mask over each feature's encoded span."""
    raw = np.asarray(raw, dtype=bool)
    return np.repeat(raw, [c.width for c in encmap.columns], axis=1)


def column_groups(d, encmap=None):
    """Encoded-column spans, one per raw feature; singleton spans when no map is given."""
    if encmap is None:
        return [(j, j + 1) for j in range(d)]
    if encmap.width != d:
        raise ShapeError(f"encoding width {encmap.width} does not match matrix width {d}")
    return encmap.spans


@dataclass(frozen=True)
class FourPartView:
    """Row partition of a matrix relative to one target feature.

    ``target`` is the feature's encoded span; ``obs_rows`` / ``mis_rows``
    index rows where it is observed / missing.
    """

    x: np.ndarray
    target: tuple
    obs_rows: np.ndarray
    mis_rows: np.ndarray

    @property
    def rest(self):
        a, b = self.target
        return np.r_[0:a, b:self.x.shape[1]].astype(np.int64)

    @property
    def x_obs(self):
        return self.x[self.obs_rows, self.target[0]:self.target[1]]

    @property
    def x_mis(self):
        return self.x[self.mis_rows, self.target[0]:self.target[1]]

    @property
    def rest_obs(self):
        return self.x[np.ix_(self.obs_rows, self.rest)]

    @property
    def rest_mis(self):
        return self.x[np.ix_(self.mis_rows, self.rest)]


def split_four_parts(x, mask, i, encmap=None):
    groups = column_groups(x.shape[1], encmap)
    if not 0 <= i < len(groups):
        raise IndexError(f"feature index {i} out of range ({len(groups)} features)")
    a, b = groups[i]
    observed = np.asarray(mask, dtype=bool)[:, a]
    return FourPartView(x, (a, b), np.flatnonzero(observed), np.flatnonzero(~observed))


def sort_columns_by_missingness(mask, encmap=None):
    """Feature indices with missing cells, fewest missing first (stable)."""
    mask = np.asarray(mask, dtype=bool)
    groups = column_groups(mask.shape[1], encmap)
    counts = [int((~mask[:, a]).sum()) for a, _ in groups]
    order = sorted(range(len(groups)), key=lambda k: (counts[k], k))
    return [k for k in order if counts[k] > 0]


def check_imputable(mask, encmap=None):
    mask = np.asarray(mask, dtype=bool)
    for k, (a, _) in enumerate(column_groups(mask.shape[1], encmap)):
        if not mask[:, a].any():
            name = encmap.columns[k].name if encmap is not None else f"column {k}"
            raise UnimputableColumnError(f"{name} has no observed cells")
