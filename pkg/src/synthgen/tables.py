"""Schema-driven CSV table generation with per-row deterministic seeding.

A schema is an ordered list of column specs (kind + distribution +
nullability). Row i draws from derive_stream(master_seed, i); every column
consumes a fixed number of draws per row (value draws are consumed even
when the null check fires), so a whole chunk of rows can be produced with
vectorized counter arithmetic that walks the exact same draw sequence as
the scalar per-row path. generate_row() is literally a chunk of size one.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ParameterError
from .rng import draws_at, draws_at_open, stream_bases, zipf_cumweights
from .runtime import GenerationPlan, ThroughputReport, run_chunked

COLUMN_KINDS = (
    "integer",
    "real",
    "date",
    "categorical-string",
    "sequential-id",
    "foreign-key",
)
DISTRIBUTIONS = ("uniform", "gaussian", "zipf", "categorical")

_EPOCH = np.datetime64("1970-01-01", "D")


def _iso_to_day(value, path: str) -> int:
    if isinstance(value, str):
        try:
            return int((np.datetime64(value, "D") - _EPOCH).astype(int))
        except ValueError as e:
            raise ConfigError(f"{path}: invalid ISO date {value!r}") from e
    if isinstance(value, (int, float)) and float(value).is_integer():
        return int(value)
    raise ConfigError(f"{path}: expected ISO date or integer day count, got {value!r}")


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    kind: str
    distribution: dict | None = None
    nullable_probability: float = 0.0
    references: str | None = None

    def to_dict(self) -> dict:
        d: dict = {"name": self.name, "kind": self.kind}
        if self.distribution is not None:
            d["distribution"] = dict(self.distribution)
        if self.nullable_probability:
            d["nullable_probability"] = self.nullable_probability
        if self.references is not None:
            d["references"] = self.references
        return d


@dataclass(frozen=True)
class TableSchema:
    table: str
    columns: tuple[ColumnSpec, ...]
    rows: int | None = None
    foreign_rows: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d: dict = {"table": self.table}
        if self.rows is not None:
            d["rows"] = self.rows
        d["columns"] = [c.to_dict() for c in self.columns]
        if self.foreign_rows:
            d["foreign_rows"] = dict(self.foreign_rows)
        return d

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)


_ALLOWED_DIST = {
    "integer": {"uniform", "gaussian", "zipf"},
    "real": {"uniform", "gaussian"},
    "date": {"uniform", "gaussian"},
    "categorical-string": {"categorical"},
}


def _validate_distribution(col: dict, path: str) -> dict:
    kind = col["kind"]
    dist = col.get("distribution")
    if kind in ("sequential-id", "foreign-key"):
        if dist is not None:
            raise ConfigError(f"{path}.distribution: {kind} columns take no distribution")
        return {}
    if not isinstance(dist, dict) or "type" not in dist:
        raise ConfigError(f"{path}.distribution: required object with a 'type' field")
    dtype = dist["type"]
    if dtype not in DISTRIBUTIONS:
        raise ConfigError(
            f"{path}.distribution.type: unknown distribution {dtype!r};"
            f" expected one of {DISTRIBUTIONS}"
        )
    if dtype not in _ALLOWED_DIST[kind]:
        raise ConfigError(f"{path}.distribution.type: {dtype} not valid for kind {kind}")
    if dtype == "uniform":
        for key in ("lo", "hi"):
            if key not in dist:
                raise ConfigError(f"{path}.distribution.{key}: required for uniform")
        if kind == "date":
            lo = _iso_to_day(dist["lo"], f"{path}.distribution.lo")
            hi = _iso_to_day(dist["hi"], f"{path}.distribution.hi")
        else:
            lo, hi = dist["lo"], dist["hi"]
            if not all(isinstance(v, (int, float)) for v in (lo, hi)):
                raise ConfigError(f"{path}.distribution: lo/hi must be numbers")
        if hi < lo:
            raise ConfigError(f"{path}.distribution: hi must be >= lo")
    elif dtype == "gaussian":
        for key in ("mean", "sd"):
            if key not in dist:
                raise ConfigError(f"{path}.distribution.{key}: required for gaussian")
        if kind == "date":
            _iso_to_day(dist["mean"], f"{path}.distribution.mean")
        elif not isinstance(dist["mean"], (int, float)):
            raise ConfigError(f"{path}.distribution.mean: must be a number")
        if not isinstance(dist["sd"], (int, float)) or dist["sd"] <= 0:
            raise ConfigError(f"{path}.distribution.sd: must be a positive number")
    elif dtype == "zipf":
        s = dist.get("s")
        if not isinstance(s, (int, float)) or s <= 0:
            raise ConfigError(f"{path}.distribution.s: must be a positive number")
        card = dist.get("cardinality")
        if not isinstance(card, int) or not (1 <= card <= 10 ** 6):
            raise ConfigError(
                f"{path}.distribution.cardinality: must be an integer in [1, 1e6]"
            )
    elif dtype == "categorical":
        values = dist.get("values")
        if not isinstance(values, list) or not values:
            raise ConfigError(f"{path}.distribution.values: non-empty list required")
        if not all(isinstance(v, str) for v in values):
            raise ConfigError(f"{path}.distribution.values: values must be strings")
        weights = dist.get("weights")
        if weights is not None:
            if len(weights) != len(values):
                raise ConfigError(
                    f"{path}.distribution.weights: length must match values"
                )
            if any(not isinstance(w, (int, float)) or w < 0 for w in weights):
                raise ConfigError(f"{path}.distribution.weights: nonnegative numbers")
            if sum(weights) <= 0:
                raise ConfigError(f"{path}.distribution.weights: at least one positive")
    return dict(dist)


def load_table_schema(config_text: str) -> TableSchema:
    """Parse and fully validate a JSON table schema."""
    try:
        data = json.loads(config_text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"schema is not valid JSON: {e}") from e
    return table_schema_from_dict(data)


def table_schema_from_dict(data: dict) -> TableSchema:
    if not isinstance(data, dict):
        raise ConfigError("schema root must be an object")
    table = data.get("table")
    if not isinstance(table, str) or not table:
        raise ConfigError("table: non-empty string required")
    rows = data.get("rows")
    if rows is not None and (not isinstance(rows, int) or rows < 1):
        raise ConfigError("rows: must be a positive integer")
    raw_cols = data.get("columns")
    if not isinstance(raw_cols, list) or not raw_cols:
        raise ConfigError("columns: non-empty list required")
    foreign_rows = data.get("foreign_rows", {})
    if not isinstance(foreign_rows, dict) or any(
        not isinstance(v, int) or v < 1 for v in foreign_rows.values()
    ):
        raise ConfigError("foreign_rows: table name -> positive row count map")

    names = set()
    seq_ids = 0
    cols = []
    for i, col in enumerate(raw_cols):
        path = f"columns[{i}]"
        if not isinstance(col, dict):
            raise ConfigError(f"{path}: must be an object")
        name = col.get("name")
        if not isinstance(name, str) or not name:
            raise ConfigError(f"{path}.name: non-empty string required")
        if name in names:
            raise ConfigError(f"{path}.name: duplicate column {name!r}")
        names.add(name)
        kind = col.get("kind")
        if kind not in COLUMN_KINDS:
            raise ConfigError(
                f"{path}.kind: unknown kind {kind!r}; expected one of {COLUMN_KINDS}"
            )
        if kind == "sequential-id":
            seq_ids += 1
            if seq_ids > 1:
                raise ConfigError(f"{path}: at most one sequential-id column allowed")
        dist = _validate_distribution(col, path)
        null_p = col.get("nullable_probability", 0.0)
        if not isinstance(null_p, (int, float)) or not (0.0 <= null_p <= 1.0):
            raise ConfigError(f"{path}.nullable_probability: must lie in [0, 1]")
        references = col.get("references")
        if kind == "foreign-key":
            if not isinstance(references, str) or not references:
                raise ConfigError(f"{path}.references: required for foreign-key")
            if references not in foreign_rows:
                raise ConfigError(
                    f"{path}.references: no foreign_rows entry for {references!r}"
                )
        elif references is not None:
            raise ConfigError(f"{path}.references: only valid on foreign-key columns")
        cols.append(
            ColumnSpec(
                name=name,
                kind=kind,
                distribution=dist or None,
                nullable_probability=float(null_p),
                references=references,
            )
        )
    return TableSchema(
        table=table, columns=tuple(cols), rows=rows, foreign_rows=dict(foreign_rows)
    )


def load_table_schema_file(path) -> TableSchema:
    with open(path, "r", encoding="utf-8") as fh:
        return load_table_schema(fh.read())


# ---------------------------------------------------------------------------
# generation


class _ColumnSampler:
    """Per-column vectorized value production with a fixed draw budget."""

    def __init__(self, spec: ColumnSpec, foreign_rows: dict):
        self.spec = spec
        self.null_draws = 1 if spec.nullable_probability > 0 else 0
        dist = spec.distribution or {}
        self.dtype = dist.get("type")
        kind = spec.kind
        if kind == "sequential-id":
            self.value_draws = 0
        elif kind == "foreign-key":
            self.value_draws = 1
            self.parent_rows = foreign_rows[spec.references]
        elif self.dtype == "uniform":
            self.value_draws = 1
            if kind == "date":
                self.lo = _iso_to_day(dist["lo"], spec.name)
                self.hi = _iso_to_day(dist["hi"], spec.name)
            else:
                self.lo, self.hi = float(dist["lo"]), float(dist["hi"])
        elif self.dtype == "gaussian":
            self.value_draws = 2
            mean = dist["mean"]
            self.mean = float(_iso_to_day(mean, spec.name)) if kind == "date" else float(mean)
            self.sd = float(dist["sd"])
        elif self.dtype == "zipf":
            self.value_draws = 1
            self.cum = zipf_cumweights(float(dist["s"]), int(dist["cardinality"]))
        elif self.dtype == "categorical":
            self.value_draws = 1
            w = dist.get("weights")
            w = np.ones(len(dist["values"])) if w is None else np.asarray(w, float)
            self.cum = np.cumsum(w)
            self.last_pos = int(np.max(np.nonzero(w)[0]))
            self.values = np.array(dist["values"], dtype=object)
        else:
            raise ConfigError(f"column {spec.name}: unsupported configuration")

    @property
    def total_draws(self) -> int:
        return self.null_draws + self.value_draws

    def produce(self, bases: np.ndarray, offset: int, start: int) -> list:
        """Values for one chunk; consumes draws [offset+1 .. offset+total]."""
        count = len(bases)
        null_mask = None
        if self.null_draws:
            null_mask = draws_at(bases, offset + 1) < self.spec.nullable_probability
            offset += 1
        kind = self.spec.kind
        if kind == "sequential-id":
            vals = list(range(start + 1, start + count + 1))
        elif kind == "foreign-key":
            u = draws_at(bases, offset + 1)
            vals = (1 + (u * self.parent_rows).astype(np.int64)).tolist()
        elif self.dtype == "uniform":
            u = draws_at(bases, offset + 1)
            if kind == "integer":
                vals = (int(self.lo) + (u * (int(self.hi) - int(self.lo) + 1)).astype(np.int64)).tolist()
            elif kind == "date":
                days = self.lo + (u * (self.hi - self.lo + 1)).astype(np.int64)
                vals = _render_dates(days)
            else:
                vals = (self.lo + u * (self.hi - self.lo)).tolist()
        elif self.dtype == "gaussian":
            u1 = draws_at_open(bases, offset + 1)
            u2 = draws_at(bases, offset + 2)
            z = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
            raw = self.mean + self.sd * z
            if kind == "integer":
                vals = np.rint(raw).astype(np.int64).tolist()
            elif kind == "date":
                vals = _render_dates(np.rint(raw).astype(np.int64))
            else:
                vals = raw.tolist()
        elif self.dtype == "zipf":
            u = draws_at(bases, offset + 1)
            idx = np.searchsorted(self.cum, u * self.cum[-1], side="right")
            vals = (np.minimum(idx, len(self.cum) - 1) + 1).tolist()
        else:  # categorical
            u = draws_at(bases, offset + 1)
            idx = np.searchsorted(self.cum, u * self.cum[-1], side="right")
            idx = np.minimum(idx, self.last_pos)
            vals = self.values[idx].tolist()
        if null_mask is not None:
            vals = [None if m else v for m, v in zip(null_mask.tolist(), vals)]
        return vals


def _render_dates(days: np.ndarray) -> list:
    return np.datetime_as_string(days.astype("datetime64[D]"), unit="D").tolist()


def _compile(schema: TableSchema) -> list[_ColumnSampler]:
    return [_ColumnSampler(c, schema.foreign_rows) for c in schema.columns]


# per-process sampler cache; the held schema reference keeps ids stable
_COMPILED: dict[int, tuple[TableSchema, list]] = {}


def _compile_cached(schema: TableSchema) -> list[_ColumnSampler]:
    entry = _COMPILED.get(id(schema))
    if entry is not None and entry[0] is schema:
        return entry[1]
    samplers = _compile(schema)
    if len(_COMPILED) > 8:
        _COMPILED.clear()
    _COMPILED[id(schema)] = (schema, samplers)
    return samplers


def _chunk_values(schema: TableSchema, seed: int, start: int, count: int) -> list[list]:
    """Column-major values for rows [start, start+count)."""
    samplers = _compile_cached(schema)
    bases = stream_bases(seed, np.arange(start, start + count, dtype=np.uint64))
    cols = []
    offset = 0
    for sampler in samplers:
        cols.append(sampler.produce(bases, offset, start))
        offset += sampler.total_draws
    return cols


def generate_row(schema: TableSchema, master_seed: int, row_index: int) -> list:
    """Row values (None marks null); pure function of its arguments."""
    return [col[0] for col in _chunk_values(schema, master_seed, row_index, 1)]


def csv_header(schema: TableSchema) -> bytes:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerow([c.name for c in schema.columns])
    return buf.getvalue().encode("utf-8")


def table_chunk(schema: TableSchema, seed: int, start: int, count: int) -> tuple[bytes, np.ndarray]:
    """Rows [start, start+count) rendered as CSV bytes plus per-row sizes."""
    cols = _chunk_values(schema, seed, start, count)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    char_sizes = np.empty(count, dtype=np.int64)
    prev = 0
    for i, row in enumerate(zip(*cols)):
        writer.writerow(["" if v is None else v for v in row])
        pos = buf.tell()
        char_sizes[i] = pos - prev
        prev = pos
    text = buf.getvalue()
    payload = text.encode("utf-8")
    if len(payload) == len(text):
        return payload, char_sizes
    # non-ASCII values: recompute sizes in bytes from the char offsets
    sizes = np.empty(count, dtype=np.int64)
    pos = 0
    for i, n_chars in enumerate(char_sizes.tolist()):
        sizes[i] = len(text[pos : pos + n_chars].encode("utf-8"))
        pos += n_chars
    return payload, sizes


def generate_table(schema: TableSchema, plan: GenerationPlan) -> ThroughputReport:
    """Write header plus rows 0..R-1 (or until the byte target is crossed)."""
    if plan.edges is not None:
        raise ParameterError("table plans take a row count or byte target")
    return run_chunked(table_chunk, schema, plan, "rows", prefix=csv_header(schema))
