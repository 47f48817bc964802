"""Streaming format conversion between the suite's flat output formats.

Supported pairs: JSON-lines <-> CSV for flat records, edge-list <-> CSV,
and text-lines -> CSV (one column). Conversions stream line by line; the
JSON-lines -> CSV direction makes one extra pass to collect the column
set, so memory stays bounded regardless of file size.

CSV carries no types, so the reverse direction recovers them by parse
order int -> float -> string, and an empty cell becomes an omitted key
(matching the schema-less record convention). Flat records whose string
values do not look numeric round-trip exactly.
"""

from __future__ import annotations

import csv
import io
import json

from .errors import ConfigError, ParameterError

FORMATS = ("jsonl", "csv", "edges", "text")

_PAIRS = {
    ("jsonl", "csv"),
    ("csv", "jsonl"),
    ("edges", "csv"),
    ("csv", "edges"),
    ("text", "csv"),
}


def convert_format(input_path, from_format: str, to_format: str, output_path) -> None:
    """Convert input_path into to_format at output_path."""
    for fmt in (from_format, to_format):
        if fmt not in FORMATS:
            raise ParameterError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    if (from_format, to_format) not in _PAIRS:
        raise ParameterError(
            f"unsupported conversion {from_format} -> {to_format}; "
            f"supported pairs: jsonl<->csv, edges<->csv, text->csv"
        )
    if from_format == "jsonl":
        _jsonl_to_csv(input_path, output_path)
    elif from_format == "edges":
        _edges_to_csv(input_path, output_path)
    elif from_format == "text":
        _text_to_csv(input_path, output_path)
    elif to_format == "jsonl":
        _csv_to_jsonl(input_path, output_path)
    else:
        _csv_to_edges(input_path, output_path)


def _parse_record(line: str, lineno: int) -> dict:
    try:
        rec = json.loads(line)
    except json.JSONDecodeError as e:
        raise ConfigError(f"line {lineno}: not valid JSON: {e}") from e
    if not isinstance(rec, dict):
        raise ConfigError(f"line {lineno}: expected a JSON object")
    return rec


def _jsonl_to_csv(input_path, output_path) -> None:
    # pass 1: column order (first seen) and nested-field detection
    columns: list[str] = []
    seen: set[str] = set()
    offenders: set[str] = set()
    with open(input_path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            rec = _parse_record(line, lineno)
            for key, value in rec.items():
                if isinstance(value, (dict, list)):
                    offenders.add(key)
                if key not in seen:
                    seen.add(key)
                    columns.append(key)
    if offenders:
        raise ParameterError(
            "cannot convert nested fields to CSV: " + ", ".join(sorted(offenders))
        )
    with open(input_path, "r", encoding="utf-8") as src, open(
        output_path, "w", encoding="utf-8", newline=""
    ) as dst:
        writer = csv.writer(dst, lineterminator="\n")
        writer.writerow(columns)
        for lineno, line in enumerate(src, 1):
            if not line.strip():
                continue
            rec = _parse_record(line, lineno)
            writer.writerow(["" if rec.get(c) is None else rec.get(c) for c in columns])


def _infer(value: str):
    try:
        return int(value)
    except ValueError:
        pass
    try:
        return float(value)
    except ValueError:
        return value


def _csv_to_jsonl(input_path, output_path) -> None:
    with open(input_path, "r", encoding="utf-8", newline="") as src, open(
        output_path, "w", encoding="utf-8"
    ) as dst:
        reader = csv.reader(src)
        header = next(reader, None)
        if header is None:
            raise ConfigError("CSV input is empty; expected a header row")
        for row in reader:
            rec = {
                key: _infer(value)
                for key, value in zip(header, row)
                if value != ""  # empty cell means the field was absent
            }
            dst.write(json.dumps(rec, separators=(",", ":")) + "\n")


def _edges_to_csv(input_path, output_path) -> None:
    with open(input_path, "r", encoding="ascii") as src, open(
        output_path, "w", encoding="utf-8", newline=""
    ) as dst:
        writer = csv.writer(dst, lineterminator="\n")
        writer.writerow(["src", "dst"])
        for lineno, line in enumerate(src, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ConfigError(f"line {lineno}: expected 'src<TAB>dst'")
            writer.writerow(parts)


def _csv_to_edges(input_path, output_path) -> None:
    # two passes: sizes for the header first, then the edge lines
    max_node = -1
    count = 0
    with open(input_path, "r", encoding="utf-8", newline="") as src:
        reader = csv.reader(src)
        next(reader, None)
        for row in reader:
            if len(row) != 2:
                raise ConfigError(f"edge row {count + 2}: expected two columns")
            try:
                a, b = int(row[0]), int(row[1])
            except ValueError as e:
                raise ConfigError(f"edge row {count + 2}: non-integer endpoint") from e
            max_node = max(max_node, a, b)
            count += 1
    with open(input_path, "r", encoding="utf-8", newline="") as src, open(
        output_path, "w", encoding="ascii"
    ) as dst:
        dst.write(f"# nodes {max_node + 1} edges {count} directed 1\n")
        reader = csv.reader(src)
        next(reader, None)
        for row in reader:
            dst.write(f"{int(row[0])}\t{int(row[1])}\n")


def _text_to_csv(input_path, output_path) -> None:
    with open(input_path, "r", encoding="utf-8") as src, open(
        output_path, "w", encoding="utf-8", newline=""
    ) as dst:
        writer = csv.writer(dst, lineterminator="\n")
        writer.writerow(["text"])
        for line in src:
            writer.writerow([line.rstrip("\n")])
