"""Generation plans, throughput reports, pacing, and the chunked writer.

A plan names a generator kind, a volume target and a seed; generators
expose pure chunk functions (model, seed, start_id, count) -> payload and
the writer here concatenates chunk payloads in stream-id order. Chunk
boundaries depend only on the plan, never on the worker count, so output
bytes are identical for any parallelism degree. The rate limiter is the
only time-dependent component and sits between the writer and the sink.
"""

from __future__ import annotations

import multiprocessing as mp
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Iterable, Iterator

import numpy as np

from .errors import ParameterError

MB = float(1 << 20)  # binary megabyte, the convention all MB/s rates use

GENERATOR_KINDS = ("text", "graph", "table", "resume", "review")

# records per chunk, per kind; fixed so chunk boundaries are plan-only
CHUNK_RECORDS = {"text": 256, "table": 4096, "resume": 1024, "review": 512}


class SystemClock:
    """Monotonic wall clock."""

    def now(self) -> float:
        return time.monotonic()

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            time.sleep(seconds)


class FakeClock:
    """Deterministic clock for pacing tests; sleep() just advances now()."""

    def __init__(self, start: float = 0.0):
        self._now = start
        self.sleeps = 0

    def now(self) -> float:
        return self._now

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            self.sleeps += 1
            self._now += seconds

    def advance(self, seconds: float) -> None:
        self._now += seconds


@dataclass(frozen=True)
class GenerationPlan:
    """What to generate, how much, how fast, and under which seed."""

    kind: str
    model: Any
    out: str | Path
    records: int | None = None
    edges: int | None = None
    size_bytes: int | None = None
    rate: float | None = None  # bytes/s, or edges/s for graph plans
    workers: int = 1
    seed: int = 0
    fmt: str | None = None
    power: int | None = None  # Kronecker power override for graph plans

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise ParameterError(
                f"unknown generator kind {self.kind!r}; expected one of {GENERATOR_KINDS}"
            )
        targets = [
            t for t in (self.records, self.edges, self.size_bytes) if t is not None
        ]
        if len(targets) != 1:
            raise ParameterError("exactly one of records/edges/size_bytes must be set")
        if targets[0] <= 0:
            raise ParameterError(f"volume target must be positive, got {targets[0]}")
        if self.rate is not None and self.rate <= 0:
            raise ParameterError(f"velocity cap must be positive, got {self.rate}")
        if self.workers < 1:
            raise ParameterError(f"workers must be >= 1, got {self.workers}")

    def with_volume(self, **kw) -> "GenerationPlan":
        """Copy with volume fields replaced (others cleared)."""
        base = {"records": None, "edges": None, "size_bytes": None}
        base.update(kw)
        return replace(self, **base)


@dataclass(frozen=True)
class ThroughputReport:
    """Amount generated, wall time, and the derived generation rate."""

    kind: str
    amount_bytes: int
    amount_units: int
    unit_label: str  # "documents" | "rows" | "records" | "edges"
    seconds: float
    workers: int
    seed: int

    @property
    def rate(self) -> float:
        if self.unit_label == "edges":
            return self.amount_units / self.seconds
        return (self.amount_bytes / MB) / self.seconds

    @property
    def rate_unit(self) -> str:
        return "Edges/s" if self.unit_label == "edges" else "MB/s"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "bytes": self.amount_bytes,
            "units": self.amount_units,
            "unit": self.unit_label,
            "seconds": self.seconds,
            "rate": self.rate,
            "rate_unit": self.rate_unit,
            "workers": self.workers,
            "seed": self.seed,
        }

    def summary(self) -> str:
        return (
            f"{self.kind}: {self.amount_units} {self.unit_label}"
            f" ({self.amount_bytes} bytes) in {self.seconds:.3f} s"
            f" -> {self.rate:.3f} {self.rate_unit}"
            f" [workers={self.workers} seed={self.seed}]"
        )


def rate_limit(
    records: Iterable, target_rate: float, clock=None, cost=len
) -> Iterator:
    """Token-bucket pacing of a record stream; lossless and order-preserving.

    `cost` maps a record to its budget units (bytes by default, 1 per edge
    for graph streams). The bucket holds at most one second of budget and
    starts empty, so the amount emitted by time T never exceeds
    target_rate * T (plus at most one record of debt when a single record
    exceeds the bucket).
    """
    if target_rate <= 0:
        raise ParameterError(f"target rate must be positive, got {target_rate}")
    if clock is None:
        clock = SystemClock()
    capacity = float(target_rate)
    tokens = 0.0
    last = clock.now()
    for rec in records:
        need = float(cost(rec))
        now = clock.now()
        tokens = min(capacity, tokens + (now - last) * target_rate)
        last = now
        if tokens < need:
            clock.sleep((min(need, capacity) - tokens) / target_rate)
            now = clock.now()
            tokens = min(capacity, tokens + (now - last) * target_rate)
            last = now
        tokens -= need  # may go negative for records larger than the bucket
        yield rec


# ---------------------------------------------------------------------------
# chunked ordered writer

ChunkFn = Callable[[Any, int, int, int], tuple[bytes, np.ndarray]]

_STATE: dict = {}


def _pool_init(fn: ChunkFn, model: Any, seed: int) -> None:
    _STATE["fn"] = fn
    _STATE["model"] = model
    _STATE["seed"] = seed


def _pool_task(args: tuple[int, int]) -> tuple[bytes, np.ndarray]:
    start, count = args
    return _STATE["fn"](_STATE["model"], _STATE["seed"], start, count)


def _chunk_results(
    chunk_fn: ChunkFn,
    model: Any,
    seed: int,
    tasks: Iterator[tuple[int, int]],
    workers: int,
) -> Iterator[tuple[bytes, np.ndarray]]:
    if workers <= 1:
        for start, count in tasks:
            yield chunk_fn(model, seed, start, count)
        return
    ctx = mp.get_context("fork")
    with ctx.Pool(workers, initializer=_pool_init, initargs=(chunk_fn, model, seed)) as pool:
        # feed in bounded waves so open-ended byte targets don't queue forever
        wave = workers * 4
        pending = True
        while pending:
            batch = []
            for _ in range(wave):
                try:
                    batch.append(next(tasks))
                except StopIteration:
                    pending = False
                    break
            if not batch:
                break
            yield from pool.imap(_pool_task, batch)


class _Sink:
    """File sink that tracks bytes/records and applies optional pacing."""

    def __init__(self, path, rate: float | None, clock):
        self._fh = open(path, "wb")
        self._rate = rate
        self._clock = clock
        self.total_bytes = 0
        self.total_records = 0

    def write_prefix(self, prefix: bytes) -> None:
        if self._rate is None:
            self._fh.write(prefix)
        else:
            for rec in rate_limit([prefix], self._rate, self._clock):
                self._fh.write(rec)
        self.total_bytes += len(prefix)

    def write_chunk(self, payload: bytes, sizes: np.ndarray, upto: int | None) -> None:
        if upto is not None:
            sizes = sizes[:upto]
            payload = payload[: int(sizes.sum())]
        if self._rate is None:
            self._fh.write(payload)
        else:
            self._write_paced(payload, sizes)
        self.total_bytes += len(payload)
        self.total_records += len(sizes)

    def _write_paced(self, payload: bytes, sizes: np.ndarray) -> None:
        view = memoryview(payload)
        offsets = np.concatenate(([0], np.cumsum(sizes)))

        def records():
            for i in range(len(sizes)):
                yield view[offsets[i] : offsets[i + 1]]

        for rec in rate_limit(records(), self._rate, self._clock):
            self._fh.write(rec)

    def close(self) -> None:
        self._fh.close()


def run_chunked(
    chunk_fn: ChunkFn,
    model: Any,
    plan: GenerationPlan,
    unit_label: str,
    clock=None,
    prefix: bytes = b"",
) -> ThroughputReport:
    """Run a record-oriented plan: ordered chunks -> (paced) sink -> report.

    Output bytes are a pure function of (model, seed, volume target); the
    worker count only changes who computes each chunk. `prefix` (a CSV
    header, say) is written first and counts toward byte targets but not
    toward the record count.
    """
    chunk_records = CHUNK_RECORDS[plan.kind]
    started = time.perf_counter()
    sink = _Sink(plan.out, plan.rate, clock)
    try:
        if prefix:
            sink.write_prefix(prefix)
        if plan.records is not None:
            total = plan.records
            tasks = iter(
                [
                    (start, min(chunk_records, total - start))
                    for start in range(0, total, chunk_records)
                ]
            )
            for payload, sizes in _chunk_results(chunk_fn, model, plan.seed, tasks, plan.workers):
                sink.write_chunk(payload, sizes, None)
        else:
            target = plan.size_bytes

            def endless():
                start = 0
                while True:
                    yield (start, chunk_records)
                    start += chunk_records

            results = _chunk_results(chunk_fn, model, plan.seed, endless(), plan.workers)
            try:
                for payload, sizes in results:
                    cum = np.cumsum(sizes) + sink.total_bytes
                    if cum[-1] >= target:
                        # stop after the first record that crosses the target
                        upto = int(np.searchsorted(cum, target, side="left")) + 1
                        sink.write_chunk(payload, sizes, upto)
                        break
                    sink.write_chunk(payload, sizes, None)
            finally:
                results.close()
    finally:
        sink.close()
    elapsed = time.perf_counter() - started
    return ThroughputReport(
        kind=plan.kind,
        amount_bytes=sink.total_bytes,
        amount_units=sink.total_records,
        unit_label=unit_label,
        seconds=elapsed,
        workers=plan.workers,
        seed=plan.seed,
    )
