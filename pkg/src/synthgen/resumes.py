"""Schema-less resume records: Bernoulli field presence, multinomial content.

Every record starts with a generated name (the primary key, made unique by
suffixing the record's stream id). Each optional field is included by its
own Bernoulli draw; compound fields repeat the same rule one level down
for their sub-fields. Absent fields are omitted from the record entirely,
never emitted as nulls.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ParameterError
from .rng import RandomStream, derive_stream
from .runtime import GenerationPlan, ThroughputReport, run_chunked


@dataclass
class FieldSpec:
    """One optional field: presence probability plus either a value pool
    (with multinomial weights) or a list of leaf sub-fields."""

    name: str
    presence: float
    repeat: int = 1
    values: list[str] | None = None
    weights: list[float] | None = None
    subfields: list["FieldSpec"] | None = None

    def to_dict(self) -> dict:
        d: dict = {"name": self.name, "presence": self.presence}
        if self.repeat != 1:
            d["repeat"] = self.repeat
        if self.values is not None:
            d["values"] = list(self.values)
        if self.weights is not None:
            d["weights"] = list(self.weights)
        if self.subfields is not None:
            d["subfields"] = [sf.to_dict() for sf in self.subfields]
        return d


def _field_from_dict(data: dict, path: str, depth: int) -> FieldSpec:
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: must be an object")
    name = data.get("name")
    if not isinstance(name, str) or not name:
        raise ConfigError(f"{path}.name: non-empty string required")
    presence = data.get("presence")
    if not isinstance(presence, (int, float)) or not (0.0 <= presence <= 1.0):
        raise ConfigError(f"{path}.presence: must lie in [0, 1]")
    repeat = data.get("repeat", 1)
    if not isinstance(repeat, int) or repeat < 1:
        raise ConfigError(f"{path}.repeat: must be an integer >= 1")
    values = data.get("values")
    subfields = data.get("subfields")
    if (values is None) == (subfields is None):
        raise ConfigError(f"{path}: exactly one of values/subfields required")
    weights = data.get("weights")
    if values is not None:
        if not isinstance(values, list) or not values:
            raise ConfigError(f"{path}.values: non-empty list required")
        if weights is not None:
            if len(weights) != len(values):
                raise ConfigError(f"{path}.weights: length must match values")
            if any(not isinstance(w, (int, float)) or w < 0 for w in weights):
                raise ConfigError(f"{path}.weights: nonnegative numbers required")
            if sum(weights) <= 0:
                raise ConfigError(f"{path}.weights: at least one positive weight")
    else:
        if depth >= 1:
            raise ConfigError(f"{path}.subfields: nesting deeper than one level")
        if not isinstance(subfields, list) or not subfields:
            raise ConfigError(f"{path}.subfields: non-empty list required")
        sub_names = [sf.get("name") for sf in subfields if isinstance(sf, dict)]
        if len(set(sub_names)) != len(subfields):
            raise ConfigError(f"{path}.subfields: sub-field names must be unique")
        subfields = [
            _field_from_dict(sf, f"{path}.subfields[{i}]", depth + 1)
            for i, sf in enumerate(subfields)
        ]
    return FieldSpec(
        name=name,
        presence=float(presence),
        repeat=repeat,
        values=values,
        weights=weights,
        subfields=subfields,
    )


class ResumeSchema:
    """Name-generation parameters plus the ordered optional field specs."""

    def __init__(self, fields: list[FieldSpec], name_syllables: list[str],
                 name_length: tuple[int, int] = (2, 4)):
        names = [f.name for f in fields]
        if len(set(names)) != len(names):
            raise ConfigError("field names must be unique")
        if "name" in names:
            raise ConfigError("'name' is implicit and cannot be an optional field")
        if not name_syllables:
            raise ConfigError("name_syllables must be non-empty")
        lo, hi = name_length
        if not (1 <= lo <= hi):
            raise ConfigError("name_length must satisfy 1 <= lo <= hi")
        self.fields = list(fields)
        self.name_syllables = list(name_syllables)
        self.name_length = (int(lo), int(hi))
        self._cums = {}
        for f in self.fields:
            self._compile_field(f)

    def _compile_field(self, f: FieldSpec) -> None:
        if f.values is not None:
            w = np.ones(len(f.values)) if f.weights is None else np.asarray(f.weights, float)
            self._cums[id(f)] = np.cumsum(w)
        else:
            for sf in f.subfields:
                self._compile_field(sf)

    def cum_weights(self, f: FieldSpec) -> np.ndarray:
        return self._cums[id(f)]

    def __reduce__(self):
        # the cum-weight cache is keyed by object ids, so rebuild on unpickle
        return (ResumeSchema.from_dict, (self.to_dict(),))

    def to_dict(self) -> dict:
        return {
            "name_syllables": list(self.name_syllables),
            "name_length": list(self.name_length),
            "fields": [f.to_dict() for f in self.fields],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ResumeSchema":
        if not isinstance(data, dict):
            raise ConfigError("resume schema root must be an object")
        raw = data.get("fields")
        if not isinstance(raw, list) or not raw:
            raise ConfigError("fields: non-empty list required")
        fields = [_field_from_dict(f, f"fields[{i}]", 0) for i, f in enumerate(raw)]
        syllables = data.get("name_syllables")
        if not isinstance(syllables, list) or not all(isinstance(s, str) for s in syllables):
            raise ConfigError("name_syllables: list of strings required")
        length = data.get("name_length", [2, 4])
        if (not isinstance(length, list) or len(length) != 2
                or not all(isinstance(v, int) for v in length)):
            raise ConfigError("name_length: [lo, hi] integers required")
        return cls(fields, syllables, (length[0], length[1]))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    @classmethod
    def load(cls, path) -> "ResumeSchema":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as e:
                raise ConfigError(f"resume schema {path} is not valid JSON: {e}") from e
        return cls.from_dict(data)


_SYLLABLES = [
    "an", "bel", "cor", "dan", "el", "far", "gil", "han", "ir", "jo",
    "kal", "lim", "mor", "nar", "ol", "per", "quin", "ras", "sel", "tor",
    "ul", "ven", "wil", "xan", "yor", "zel",
]

_INSTITUTES = [
    "Northgate University", "Clearwater Institute of Technology",
    "Redwood State University", "Harborview College", "Summit Polytechnic",
    "Lakeside Research Institute", "Ironbridge University", "Easton Academy of Sciences",
]

_TITLES = [
    "Professor", "Associate Professor", "Assistant Professor", "Lecturer",
    "Research Fellow", "Senior Researcher", "Postdoctoral Researcher",
]

_INTERESTS = [
    "distributed systems", "machine learning", "databases", "computer architecture",
    "operating systems", "information retrieval", "compilers", "computer networks",
    "numerical methods", "data visualization",
]

_CITIES = [
    "Springfield", "Riverton", "Maple Falls", "Ashford", "Crestview",
    "Dunmore", "Fairhaven", "Granite Bay",
]

_COMPANIES = [
    "Acme Analytics", "Bluepeak Systems", "Corewave Labs", "Deltaline Software",
    "Evergreen Data", "Foxglove Computing",
]

_DEGREES = ["B.Sc.", "M.Sc.", "Ph.D.", "B.Eng.", "M.Eng."]

_SPANS = ["1998-2002", "2002-2006", "2006-2010", "2010-2014", "2014-2018", "2018-2022"]

_YEARS = ["year 2009", "year 2011", "year 2013", "year 2015", "year 2017", "year 2019"]

_AUTHORS = ["A. Lindgren", "B. Okafor", "C. Tanaka", "D. Marquez", "E. Novak"]

_VENUES = [
    "Journal of Systems Research", "Data Engineering Letters",
    "Proceedings of the Computing Frontiers Workshop", "Applied Informatics Quarterly",
]

_PAPER_TITLES = [
    "On the scalability of layered pipelines", "A study of adaptive caching",
    "Sampling methods for stream summaries", "Fault isolation in shared clusters",
    "Indexing strategies for sparse workloads",
]


def default_resume_schema() -> ResumeSchema:
    """Built-in schema with placeholder pools and documented default rates."""
    emails = [f"contact{i}@mail.example" for i in range(1, 25)]
    phones = [f"+1-555-01{i:02d}-{(37 * i) % 100:02d}00" for i in range(1, 25)]
    addresses = [f"{7 * i + 1} Oak Street, {_CITIES[i % len(_CITIES)]}" for i in range(16)]
    births = [f"19{55 + i}-{(i % 12) + 1:02d}-{(i % 27) + 1:02d}" for i in range(30)]
    fields = [
        FieldSpec("email", 0.7, repeat=2, values=emails),
        FieldSpec("telephone", 0.5, values=phones),
        FieldSpec("address", 0.5, values=addresses),
        FieldSpec("date of birth", 0.5, values=births),
        FieldSpec("home place", 0.5, values=_CITIES),
        FieldSpec("institute", 0.9, values=_INSTITUTES),
        FieldSpec("title", 0.9, values=_TITLES),
        FieldSpec("research interest", 0.5, repeat=3, values=_INTERESTS),
        FieldSpec(
            "education experience", 0.5, repeat=2,
            subfields=[
                FieldSpec("time", 0.8, values=_SPANS),
                FieldSpec("school", 0.9, values=_INSTITUTES),
                FieldSpec("degree", 0.7, values=_DEGREES),
            ],
        ),
        FieldSpec(
            "work experience", 0.5, repeat=3,
            subfields=[
                FieldSpec("time", 0.8, values=_SPANS),
                FieldSpec("company", 0.9, values=_COMPANIES),
                FieldSpec("position", 0.7, values=_TITLES),
            ],
        ),
        FieldSpec(
            "publications", 0.5, repeat=4,
            subfields=[
                FieldSpec("author", 0.9, values=_AUTHORS),
                FieldSpec("time", 0.8, values=_YEARS),
                FieldSpec("title", 0.9, values=_PAPER_TITLES),
                FieldSpec("source", 0.7, values=_VENUES),
            ],
        ),
    ]
    return ResumeSchema(fields, _SYLLABLES, (2, 4))


def _draw_value(schema: ResumeSchema, f: FieldSpec, s: RandomStream) -> str:
    cum = schema.cum_weights(f)
    i = int(np.searchsorted(cum, s.next_double() * cum[-1], side="right"))
    if i >= len(f.values):
        i = len(f.values) - 1
    return f.values[i]


def _draw_leaf(schema: ResumeSchema, f: FieldSpec, s: RandomStream):
    count = 1 if f.repeat == 1 else 1 + int(s.next_double() * f.repeat)
    if count == 1:
        return _draw_value(schema, f, s)
    return [_draw_value(schema, f, s) for _ in range(count)]


def _draw_compound(schema: ResumeSchema, f: FieldSpec, s: RandomStream):
    count = 1 if f.repeat == 1 else 1 + int(s.next_double() * f.repeat)
    entries = []
    for _ in range(count):
        entry = {}
        for sf in f.subfields:
            if s.next_double() < sf.presence:
                entry[sf.name] = _draw_leaf(schema, sf, s)
        entries.append(entry)
    return entries[0] if count == 1 else entries


def generate_resume(schema: ResumeSchema, s: RandomStream) -> dict:
    """One record: generated name plus the fields whose presence draw fired."""
    lo, hi = schema.name_length
    n_syll = lo + int(s.next_double() * (hi - lo + 1))
    pool = schema.name_syllables
    parts = [pool[int(s.next_double() * len(pool))] for _ in range(n_syll)]
    record: dict = {"name": f"{''.join(parts).capitalize()}-{s.stream_id}"}
    for f in schema.fields:
        if s.next_double() >= f.presence:
            continue
        if f.values is not None:
            record[f.name] = _draw_leaf(schema, f, s)
        else:
            record[f.name] = _draw_compound(schema, f, s)
    return record


def resume_chunk(schema: ResumeSchema, seed: int, start: int, count: int) -> tuple[bytes, np.ndarray]:
    """Records [start, start+count) as JSON lines plus sizes."""
    lines = []
    sizes = np.empty(count, dtype=np.int64)
    for i in range(count):
        rec = generate_resume(schema, derive_stream(seed, start + i))
        line = json.dumps(rec, separators=(",", ":")).encode("utf-8") + b"\n"
        lines.append(line)
        sizes[i] = len(line)
    return b"".join(lines), sizes


def generate_resumes(schema: ResumeSchema, plan: GenerationPlan) -> ThroughputReport:
    """Write JSON-lines records until the record or byte target is met."""
    if plan.edges is not None:
        raise ParameterError("resume plans take a record count or byte target")
    return run_chunked(resume_chunk, schema, plan, "records")
