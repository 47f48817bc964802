"""Product-review records: a bipartite Kronecker edge set with scored text.

A directed Kronecker graph supplies (user, product) pairs; product ids are
offset by the node count so the two sides can never collide. Each edge
then draws a score from the score-weight multinomial and review text from
the topic model trained for that score. Record e draws everything from
derive_stream(seed, e); the graph phase reserves the top stream id so it
cannot collide with any record stream.
"""

from __future__ import annotations

import json
import time
from typing import Iterable, Iterator

import numpy as np

from .errors import ConfigError, ParameterError
from .kronecker import InitiatorMatrix, accepted_edge_stream, generate_edges, _check_power
from .lda import LdaModel, generate_document
from .rng import derive_stream
from .runtime import (
    CHUNK_RECORDS,
    GenerationPlan,
    ThroughputReport,
    _chunk_results,
    _Sink,
    run_chunked,
)

# record streams use ids 0..E-1; the graph phase gets the very top id
_GRAPH_PHASE_ID = 0xFFFFFFFFFFFFFFFF

REVIEW_FORMATS = ("jsonl", "triples", "labels")


class ReviewModel:
    """Initiator + power + score weights + one text model per active score."""

    def __init__(self, initiator: InitiatorMatrix, k: int, score_weights,
                 text_models: dict[int, LdaModel]):
        w = np.asarray(score_weights, dtype=np.float64)
        if w.shape != (5,) or np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ConfigError("score_weights must be five nonnegative numbers")
        if w.sum() <= 0:
            raise ConfigError("score_weights must have at least one positive entry")
        if k < 1:
            raise ConfigError("kronecker power k must be >= 1")
        _check_power(initiator.n, k)
        for score in range(1, 6):
            if w[score - 1] > 0 and score not in text_models:
                raise ConfigError(f"score {score} has positive weight but no text model")
        # review edges are read as user -> product, a directed relation
        self.initiator = InitiatorMatrix(initiator.theta, directed=True)
        self.k = int(k)
        self.score_weights = w
        self.score_cum = np.cumsum(w)
        self.text_models = dict(text_models)
        self.node_count = initiator.n ** self.k

    def to_dict(self) -> dict:
        return {
            "initiator": self.initiator.to_dict(),
            "k": self.k,
            "score_weights": self.score_weights.tolist(),
            "text_models": {str(s): m.to_dict() for s, m in self.text_models.items()},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ReviewModel":
        try:
            initiator = InitiatorMatrix.from_dict(data["initiator"])
            models = {
                int(score): LdaModel.from_dict(m)
                for score, m in data["text_models"].items()
            }
            return cls(initiator, data["k"], data["score_weights"], models)
        except KeyError as e:
            raise ConfigError(f"review model missing field {e}") from e

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "ReviewModel":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as e:
                raise ConfigError(f"review model {path} is not valid JSON: {e}") from e
        return cls.from_dict(data)


def generate_review(model: ReviewModel, user: int, product_node: int, s) -> dict:
    """One record for the edge (user, product_node); consumes from s."""
    cum = model.score_cum
    i = int(np.searchsorted(cum, s.next_double() * cum[-1], side="right"))
    if i >= 5:
        i = int(np.searchsorted(cum, cum[-1], side="left"))
    score = i + 1
    text_model = model.text_models[score]
    draw = generate_document(text_model, s)
    toks = text_model._token_bytes
    text = b" ".join(toks[int(w)] for w in draw.words).decode("utf-8")
    return {
        "userId": int(user),
        "productId": int(product_node) + model.node_count,
        "score": score,
        "text": text,
    }


def _render(record: dict, fmt: str) -> bytes:
    if fmt == "jsonl":
        return json.dumps(record, separators=(",", ":")).encode("utf-8") + b"\n"
    if fmt == "triples":
        return f"{record['userId']},{record['productId']},{record['score']}\n".encode()
    return f"{record['text']}\t{record['score']}\n".encode()


def review_chunk(bundle, seed: int, start: int, count: int) -> tuple[bytes, np.ndarray]:
    """Records [start, start+count); bundle carries the edge slice they map to."""
    model, src, dst, offset, fmt = bundle
    lines = []
    sizes = np.empty(count, dtype=np.int64)
    lo = start - offset
    for i in range(count):
        user = src[lo + i]
        product = dst[lo + i]
        rec = generate_review(model, user, product, derive_stream(seed, start + i))
        line = _render(rec, fmt)
        lines.append(line)
        sizes[i] = len(line)
    return b"".join(lines), sizes


def _graph_seed(plan_seed: int) -> int:
    return derive_stream(plan_seed, _GRAPH_PHASE_ID).key


def generate_reviews(model: ReviewModel, plan: GenerationPlan) -> ThroughputReport:
    """Write review records until the record or byte target is met."""
    if plan.edges is not None:
        raise ParameterError("review plans take a record count or byte target")
    fmt = plan.fmt or "jsonl"
    if fmt not in REVIEW_FORMATS:
        raise ParameterError(f"review format must be one of {REVIEW_FORMATS}")
    prefix = b"userId,productId,score\n" if fmt == "triples" else b""
    if plan.records is not None:
        graph = generate_edges(
            model.initiator, model.k, _graph_seed(plan.seed), plan.records,
            workers=plan.workers,
        )
        bundle = (model, graph.src, graph.dst, 0, fmt)
        return run_chunked(review_chunk, bundle, plan, "records", prefix=prefix)
    return _generate_reviews_bytes(model, plan, fmt, prefix)


def _generate_reviews_bytes(model, plan, fmt, prefix) -> ThroughputReport:
    """Byte-targeted path: extend the edge set wave by wave until enough
    record bytes are written. Output equals the record-count path's prefix."""
    target = plan.size_bytes
    chunk_records = CHUNK_RECORDS["review"]
    wave = chunk_records * max(plan.workers * 4, 8)
    started = time.perf_counter()
    sink = _Sink(plan.out, plan.rate, None)
    edges_src: list = []
    edges_dst: list = []
    stream = accepted_edge_stream(model.initiator, model.k, _graph_seed(plan.seed), 1)
    candidates = 0
    try:
        if prefix:
            sink.write_prefix(prefix)
        done = 0
        while sink.total_bytes < target:
            while len(edges_src) < done + wave:
                acc_s, acc_d, n_cand = next(stream)
                candidates += n_cand
                edges_src.extend(acc_s.tolist())
                edges_dst.extend(acc_d.tolist())
                if candidates > 100 * max(len(edges_src), 65536):
                    raise ParameterError(
                        "graph capacity exhausted before reaching the byte target"
                    )
            src = np.array(edges_src[done : done + wave], dtype=np.uint64)
            dst = np.array(edges_dst[done : done + wave], dtype=np.uint64)
            bundle = (model, src, dst, done, fmt)
            tasks = iter(
                [(done + o, chunk_records) for o in range(0, wave, chunk_records)]
            )
            results = _chunk_results(review_chunk, bundle, plan.seed, tasks, plan.workers)
            try:
                for payload, sizes in results:
                    cum = np.cumsum(sizes) + sink.total_bytes
                    if cum[-1] >= target:
                        upto = int(np.searchsorted(cum, target, side="left")) + 1
                        sink.write_chunk(payload, sizes, upto)
                        break
                    sink.write_chunk(payload, sizes, None)
            finally:
                results.close()
            done += wave
    finally:
        stream.close()
        sink.close()
    elapsed = time.perf_counter() - started
    return ThroughputReport(
        kind="review",
        amount_bytes=sink.total_bytes,
        amount_units=sink.total_records,
        unit_label="records",
        seconds=elapsed,
        workers=plan.workers,
        seed=plan.seed,
    )


def export_for_filtering(records: Iterable[dict]) -> Iterator[str]:
    """Project records to (userId, productId, score) CSV lines with header."""
    yield "userId,productId,score\n"
    for rec in records:
        yield f"{rec['userId']},{rec['productId']},{rec['score']}\n"


def export_for_classification(records: Iterable[dict]) -> Iterator[str]:
    """Project records to text<TAB>score lines for classifier input."""
    for rec in records:
        yield f"{rec['text']}\t{rec['score']}\n"
