"""Command line interface.

Subcommands: gen, train lda, fit kronecker, stats graph, scale, convert.
Reports go to stdout as single-line JSON; human-readable summaries go to
stderr. Exit codes: 0 success, 2 configuration/schema error, 3 I/O error,
4 parameter-domain error.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from .convert import FORMATS, convert_format
from .errors import IO_EXIT_CODE, ParameterError, SynthgenError
from .harness import load_model, run_plan
from .kronecker import estimate_initiator, graph_stats, load_edge_list
from .lda import preprocess_corpus, train_lda
from .rng import derive_stream
from .runtime import GENERATOR_KINDS, GenerationPlan
from .scaling import plot_scaling, scaling_experiment, write_scaling_csv

_NATIVE_FORMATS = {
    "text": ("text",),
    "graph": ("edges",),
    "table": ("csv",),
    "resume": ("jsonl",),
    "review": ("jsonl", "triples", "labels"),
}

_SIZE_RE = re.compile(r"^(\d+(?:\.\d+)?)\s*(KB|MB|GB|TB|B)?$", re.IGNORECASE)


def parse_size(text: str) -> int:
    """'16MB' -> bytes with binary units; bare numbers pass through."""
    m = _SIZE_RE.match(text.strip())
    if not m:
        raise argparse.ArgumentTypeError(f"cannot parse size {text!r}")
    value = float(m.group(1))
    unit = (m.group(2) or "B").upper()
    factor = {"B": 1, "KB": 1 << 10, "MB": 1 << 20, "GB": 1 << 30, "TB": 1 << 40}[unit]
    return int(value * factor)


def parse_rate(text: str) -> float:
    """Rate with optional binary size unit and /s suffix: '10MB/s', '5000'."""
    cleaned = text.strip()
    if cleaned.lower().endswith("/s"):
        cleaned = cleaned[:-2]
    return float(parse_size(cleaned))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="synthgen",
        description="Deterministic synthetic data generators with throughput reporting.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate data from a trained model or schema")
    gen.add_argument("kind", choices=GENERATOR_KINDS)
    gen.add_argument("--model", required=True, help="model/schema JSON file")
    gen.add_argument("--out", required=True, help="output file path")
    vol = gen.add_mutually_exclusive_group()
    vol.add_argument("--records", type=int, help="record/document/row count target")
    vol.add_argument("--edges", type=int, help="edge count target (graph)")
    vol.add_argument("--bytes", type=parse_size, dest="size_bytes", help="byte target, e.g. 16MB")
    gen.add_argument("--rate", type=parse_rate, help="velocity cap: bytes/s (or edges/s for graphs)")
    gen.add_argument("--workers", type=int, default=1)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--format", dest="fmt", help="output format (review: jsonl|triples|labels)")
    gen.add_argument("--power", type=int, help="Kronecker power (graph; default from edge target)")

    train = sub.add_parser("train", help="train a model from seed data")
    train_sub = train.add_subparsers(dest="trainer", required=True)
    lda = train_sub.add_parser("lda", help="train a topic model from a line-per-document corpus")
    lda.add_argument("--input", required=True, help="seed corpus, one document per line")
    lda.add_argument("--out", required=True, help="model JSON output path")
    lda.add_argument("--topics", type=int, default=20)
    lda.add_argument("--iterations", type=int, default=100)
    lda.add_argument("--alpha", type=float, default=None, help="symmetric prior (default 50/topics)")
    lda.add_argument("--eta", type=float, default=0.01)
    lda.add_argument("--min-freq", type=int, default=5)
    lda.add_argument("--seed", type=int, default=0)

    fit = sub.add_parser("fit", help="fit a generator model to real data")
    fit_sub = fit.add_subparsers(dest="fitter", required=True)
    kron = fit_sub.add_parser("kronecker", help="estimate an initiator from an edge list")
    kron.add_argument("--graph", required=True, help="edge-list file")
    kron.add_argument("--out", required=True, help="initiator JSON output path")
    kron.add_argument("--size", type=int, default=2, help="initiator side length")
    kron.add_argument("--iterations", type=int, default=100)
    kron.add_argument("--learning-rate", type=float, default=0.1)
    kron.add_argument("--permutation-samples", type=int, default=3)
    kron.add_argument("--seed", type=int, default=0)

    stats = sub.add_parser("stats", help="statistics of generated or real data")
    stats_sub = stats.add_subparsers(dest="target", required=True)
    gstats = stats_sub.add_parser("graph", help="node/edge/degree statistics of an edge list")
    gstats.add_argument("path")

    scale = sub.add_parser("scale", help="volume-ladder scaling measurement")
    scale.add_argument("kind", choices=GENERATOR_KINDS)
    scale.add_argument("--model", required=True)
    scale.add_argument("--volumes", required=True,
                       help="comma-separated volumes: bytes (suffixes ok) or edges for graphs")
    scale.add_argument("--reps", type=int, default=3)
    scale.add_argument("--out", required=True, help="directory for the CSV table and PNG figure")
    scale.add_argument("--workers", type=int, default=1)
    scale.add_argument("--seed", type=int, default=0)

    conv = sub.add_parser("convert", help="convert between output formats")
    conv.add_argument("--from", dest="from_format", required=True, choices=FORMATS)
    conv.add_argument("--to", dest="to_format", required=True, choices=FORMATS)
    conv.add_argument("input")
    conv.add_argument("output")
    return parser


def _cmd_gen(args) -> int:
    model = load_model(args.kind, args.model)
    records, edges, size_bytes = args.records, args.edges, args.size_bytes
    if records is None and edges is None and size_bytes is None:
        if args.kind == "table" and getattr(model, "rows", None):
            records = model.rows  # schema-declared default row count
        else:
            raise ParameterError("one of --records/--edges/--bytes is required")
    if args.fmt is not None and args.fmt not in _NATIVE_FORMATS[args.kind]:
        raise ParameterError(
            f"format {args.fmt!r} not available for {args.kind};"
            f" expected one of {_NATIVE_FORMATS[args.kind]}"
        )
    plan = GenerationPlan(
        kind=args.kind,
        model=model,
        out=args.out,
        records=records,
        edges=edges,
        size_bytes=size_bytes,
        rate=args.rate,
        workers=args.workers,
        seed=args.seed,
        fmt=args.fmt,
        power=args.power,
    )
    report = run_plan(plan)
    print(json.dumps(report.to_dict()))
    print(report.summary(), file=sys.stderr)
    return 0


def _cmd_train_lda(args) -> int:
    with open(args.input, "r", encoding="utf-8") as fh:
        dictionary, corpus = preprocess_corpus(fh, min_token_frequency=args.min_freq)
    model = train_lda(
        corpus,
        k=args.topics,
        iterations=args.iterations,
        alpha_init=args.alpha,
        eta=args.eta,
        s=derive_stream(args.seed, 0),
    )
    model.save(args.out)
    info = {
        "k": model.k,
        "dictionary_size": len(dictionary),
        "documents": len(corpus.documents),
        "xi": model.xi,
        "model": str(args.out),
    }
    print(json.dumps(info))
    print(
        f"trained {model.k}-topic model on {len(corpus.documents)} documents,"
        f" dictionary size {len(dictionary)}, mean length {model.xi:.2f}",
        file=sys.stderr,
    )
    return 0


def _cmd_fit_kronecker(args) -> int:
    graph = load_edge_list(args.graph)
    initiator = estimate_initiator(
        graph,
        n=args.size,
        iterations=args.iterations,
        learning_rate=args.learning_rate,
        permutation_samples=args.permutation_samples,
        s=derive_stream(args.seed, 0),
    )
    initiator.save(args.out)
    print(json.dumps(initiator.to_dict()))
    print(f"fitted {args.size}x{args.size} initiator -> {args.out}", file=sys.stderr)
    return 0


def _cmd_stats_graph(args) -> int:
    stats = graph_stats(load_edge_list(args.path))
    print(
        json.dumps(
            {
                "nodes": stats.node_count,
                "edges": stats.edge_count,
                "self_loops": stats.self_loops,
                "degree_histogram": {str(k): v for k, v in stats.degree_histogram.items()},
            }
        )
    )
    return 0


def _cmd_scale(args) -> int:
    model = load_model(args.kind, args.model)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.kind == "graph":
        volumes = [int(v) for v in args.volumes.split(",")]
    else:
        volumes = [parse_size(v) for v in args.volumes.split(",")]
    scratch = out_dir / f"scale_{args.kind}.scratch"
    template = GenerationPlan(
        kind=args.kind,
        model=model,
        out=scratch,
        size_bytes=1,  # placeholder; replaced per run
        workers=args.workers,
        seed=args.seed,
    )
    result = scaling_experiment(template, volumes, args.reps)
    csv_path = out_dir / f"scaling_{args.kind}.csv"
    png_path = out_dir / f"scaling_{args.kind}.png"
    write_scaling_csv(result, csv_path)
    plot_scaling(result, png_path)
    if scratch.exists():
        scratch.unlink()
    print(json.dumps(result.to_dict()))
    status = "PARTIAL" if result.partial else "ok"
    print(
        f"scaling {args.kind}: R^2 = {result.r_squared:.4f} over {len(result.volumes)}"
        f" volumes x {args.reps} reps [{status}] -> {csv_path}, {png_path}",
        file=sys.stderr,
    )
    return 1 if result.partial else 0


def _cmd_convert(args) -> int:
    convert_format(args.input, args.from_format, args.to_format, args.output)
    print(f"converted {args.input} ({args.from_format}) -> {args.output} ({args.to_format})",
          file=sys.stderr)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        if args.command == "gen":
            return _cmd_gen(args)
        if args.command == "train":
            return _cmd_train_lda(args)
        if args.command == "fit":
            return _cmd_fit_kronecker(args)
        if args.command == "stats":
            return _cmd_stats_graph(args)
        if args.command == "scale":
            return _cmd_scale(args)
        if args.command == "convert":
            return _cmd_convert(args)
        parser.error(f"unknown command {args.command!r}")
    except SynthgenError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return IO_EXIT_CODE
    return 0


if __name__ == "__main__":
    sys.exit(main())
