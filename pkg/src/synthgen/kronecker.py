"""Stochastic Kronecker graphs: generation, statistics, and initiator fitting.

A small n x n probability matrix raised to the k-th Kronecker power defines
an edge distribution over n^k nodes. Edges are placed one cell choice per
power round, so a graph with E expected edges costs O(E * k) instead of
enumerating the n^k x n^k adjacency structure; that is what keeps
generation linear in the expected edge count.

Fitting reverses the process: stochastic gradient ascent on an approximate
log-likelihood whose node-relabeling nuisance is integrated out by
Metropolis-sampled permutations (a desk-scale version of the classic
KronFit scheme).
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ParameterError
from .rng import RandomStream, derive_stream, sample_poisson
from .runtime import GenerationPlan, ThroughputReport, _chunk_results, rate_limit


class InitiatorMatrix:
    """Square probability matrix seeding the Kronecker recursion."""

    def __init__(self, theta, directed: bool = True):
        t = np.asarray(theta, dtype=np.float64)
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] < 1:
            raise ConfigError("initiator must be a square matrix")
        if np.any(t < 0) or np.any(t > 1) or not np.all(np.isfinite(t)):
            raise ConfigError("initiator entries must lie in [0, 1]")
        if not directed and not np.allclose(t, t.T, atol=0, rtol=0):
            raise ConfigError("undirected initiator must be symmetric")
        self.theta = t
        self.n = t.shape[0]
        self.directed = bool(directed)

    def entry_sum(self) -> float:
        return float(self.theta.sum())

    def to_dict(self) -> dict:
        return {"n": self.n, "directed": self.directed, "theta": self.theta.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "InitiatorMatrix":
        try:
            m = cls(data["theta"], directed=data["directed"])
        except KeyError as e:
            raise ConfigError(f"initiator file missing field {e}") from e
        if m.n != data.get("n", m.n):
            raise ConfigError("initiator field n disagrees with theta shape")
        return m

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "InitiatorMatrix":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as e:
                raise ConfigError(f"initiator file {path} is not valid JSON: {e}") from e
        return cls.from_dict(data)


@dataclass
class EdgeList:
    """Edge set over nodes 0..node_count-1; undirected edges stored as (min, max)."""

    node_count: int
    src: np.ndarray
    dst: np.ndarray
    directed: bool

    @property
    def edge_count(self) -> int:
        return len(self.src)


@dataclass
class GraphStats:
    node_count: int
    edge_count: int
    self_loops: int
    degree_histogram: dict[int, int]  # total degree -> number of nodes


def expected_edge_count(initiator: InitiatorMatrix, k: int) -> float:
    """Closed form: (sum of initiator entries) ** k."""
    if k < 1:
        raise ParameterError("kronecker power k must be >= 1")
    return initiator.entry_sum() ** k


def _check_power(n: int, k: int) -> int:
    nodes = n ** k
    if nodes > 2 ** 63 - 1:
        raise ParameterError(f"n^k = {n}^{k} does not fit in 64 bits")
    return nodes


def _cell_tables(initiator: InitiatorMatrix) -> tuple[np.ndarray, int]:
    flat = initiator.theta.reshape(-1)
    if flat.sum() <= 0:
        raise ParameterError("initiator has zero total mass")
    cum = np.cumsum(flat)
    last_pos = int(np.max(np.nonzero(flat)[0]))
    return cum, last_pos


def attainable_edges(initiator: InitiatorMatrix, k: int) -> int:
    """Exact count of distinct edges the initiator can ever produce.

    Cell paths compose injectively into (src, dst), so the directed support
    is z^k for z nonzero cells; canonicalized undirected pairs collapse the
    mirrored paths, leaving (z^k + d^k) / 2 with d nonzero diagonal cells.
    """
    z = int(np.count_nonzero(initiator.theta))
    if initiator.directed:
        return z ** k
    d = int(np.count_nonzero(np.diagonal(initiator.theta)))
    return (z ** k + d ** k) // 2


def _candidate_chunk(model, seed: int, chunk_id: int, count: int):
    """One chunk of raw edge candidates; chunk_id keys the stream."""
    cum, last_pos, n, k, directed = model
    s = derive_stream(seed, chunk_id)
    u = s.doubles(count * k).reshape(count, k)
    total = cum[-1]
    src = np.zeros(count, dtype=np.uint64)
    dst = np.zeros(count, dtype=np.uint64)
    un = np.uint64(n)
    for r in range(k):
        cells = np.searchsorted(cum, u[:, r] * total, side="right")
        cells = np.minimum(cells, last_pos).astype(np.uint64)
        src = src * un + cells // un
        dst = dst * un + cells % un
    if not directed:
        lo = np.minimum(src, dst)
        hi = np.maximum(src, dst)
        src, dst = lo, hi
    return src, dst


CANDIDATE_CHUNK = 65536  # fixed, so shorter edge budgets are prefixes of longer ones


def accepted_edge_stream(initiator: InitiatorMatrix, k: int, seed: int, workers: int = 1):
    """Deduplicated edges in deterministic order, yielded chunk by chunk.

    Candidate chunk c always holds CANDIDATE_CHUNK draws from
    derive_stream(seed, c); the consumer keeps first occurrences. Yields
    (src, dst, candidates_seen) triples where src/dst are the newly
    accepted edges of one candidate chunk.
    """
    _check_power(initiator.n, k)
    cum, last_pos = _cell_tables(initiator)
    model = (cum, last_pos, initiator.n, k, initiator.directed)
    seen: set = set()

    def tasks():
        c = 0
        while True:
            yield (c, CANDIDATE_CHUNK)
            c += 1

    results = _chunk_results(_candidate_chunk, model, seed, tasks(), workers)
    try:
        for src, dst in results:
            acc_s: list = []
            acc_d: list = []
            for s_, d_ in zip(src.tolist(), dst.tolist()):
                key = (s_, d_)
                if key in seen:
                    continue
                seen.add(key)
                acc_s.append(s_)
                acc_d.append(d_)
            yield (
                np.array(acc_s, dtype=np.uint64),
                np.array(acc_d, dtype=np.uint64),
                len(src),
            )
    finally:
        results.close()


def generate_edges(
    initiator: InitiatorMatrix,
    k: int,
    seed: int,
    budget: int,
    workers: int = 1,
) -> EdgeList:
    """Exactly `budget` distinct edges; chunk c draws from derive_stream(seed, c)."""
    nodes = _check_power(initiator.n, k)
    directed = initiator.directed
    supported = attainable_edges(initiator, k)
    if budget > supported:
        raise ParameterError(
            f"cannot place {budget} distinct edges; the initiator supports "
            f"at most {supported}"
        )
    if budget < 0:
        raise ParameterError("edge budget must be nonnegative")
    out_src: list = []
    out_dst: list = []
    attempts = 0
    cap = 100 * max(budget, CANDIDATE_CHUNK)
    stream = accepted_edge_stream(initiator, k, seed, workers)
    try:
        while len(out_src) < budget:
            acc_s, acc_d, n_candidates = next(stream)
            attempts += n_candidates
            need = budget - len(out_src)
            out_src.extend(acc_s[:need].tolist())
            out_dst.extend(acc_d[:need].tolist())
            if len(out_src) < budget and attempts >= cap:
                raise ParameterError(
                    f"duplicate redraw cap reached: {attempts} candidates yielded "
                    f"only {len(out_src)} of {budget} distinct edges"
                )
    finally:
        stream.close()
    return EdgeList(
        node_count=nodes,
        src=np.array(out_src, dtype=np.uint64),
        dst=np.array(out_dst, dtype=np.uint64),
        directed=directed,
    )


def generate_graph(
    initiator: InitiatorMatrix,
    k: int,
    s: RandomStream,
    workers: int = 1,
) -> EdgeList:
    """Kronecker graph with edge count drawn as Poisson of the expectation."""
    nodes = _check_power(initiator.n, k)
    expected = expected_edge_count(initiator, k)
    supported = attainable_edges(initiator, k)
    if expected > supported:
        raise ParameterError(
            f"expected edge count {expected} exceeds the {supported} distinct "
            f"edges the initiator can produce"
        )
    # the Poisson draw may exceed the attainable support even when the
    # expectation does not; clamp, since more distinct edges cannot exist
    budget = min(sample_poisson(s, expected), supported) if expected > 0 else 0
    if budget == 0:
        return EdgeList(nodes, np.empty(0, np.uint64), np.empty(0, np.uint64), initiator.directed)
    return generate_edges(initiator, k, s.key, budget, workers=workers)


def graph_stats(graph: EdgeList) -> GraphStats:
    """Exact node/edge/self-loop counts and the total-degree histogram."""
    if graph.edge_count and (
        int(graph.src.max()) >= graph.node_count or int(graph.dst.max()) >= graph.node_count
    ):
        raise ConfigError("edge endpoint out of node range")
    deg = np.bincount(graph.src.astype(np.int64), minlength=graph.node_count)
    deg = deg + np.bincount(graph.dst.astype(np.int64), minlength=graph.node_count)
    loops = int(np.count_nonzero(graph.src == graph.dst))
    values, counts = np.unique(deg, return_counts=True)
    hist = {int(v): int(c) for v, c in zip(values, counts)}
    return GraphStats(
        node_count=graph.node_count,
        edge_count=graph.edge_count,
        self_loops=loops,
        degree_histogram=hist,
    )


# ---------------------------------------------------------------------------
# edge-list files


def save_edge_list(graph: EdgeList, path) -> None:
    with open(path, "wb") as fh:
        fh.write(_edge_header(graph))
        for chunk in _edge_line_chunks(graph.src, graph.dst):
            fh.write(chunk)


def _edge_header(graph: EdgeList) -> bytes:
    return (
        f"# nodes {graph.node_count} edges {graph.edge_count} "
        f"directed {1 if graph.directed else 0}\n"
    ).encode()


def _edge_line_chunks(src, dst, block: int = 65536):
    for i in range(0, len(src), block):
        s = src[i : i + block].tolist()
        d = dst[i : i + block].tolist()
        yield ("\n".join(f"{a}\t{b}" for a, b in zip(s, d)) + "\n").encode()


def load_edge_list(path) -> EdgeList:
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().split()
        if len(header) != 7 or header[0] != "#" or header[1] != "nodes":
            raise ConfigError(f"{path}: malformed edge-list header")
        node_count = int(header[2])
        edge_count = int(header[4])
        directed = header[6] == "1"
        data = np.loadtxt(fh, dtype=np.uint64, ndmin=2) if edge_count else np.empty((0, 2), np.uint64)
    if data.shape != (edge_count, 2):
        raise ConfigError(
            f"{path}: header announces {edge_count} edges, found {data.shape[0]}"
        )
    src, dst = data[:, 0].copy(), data[:, 1].copy()
    if edge_count and (int(src.max()) >= node_count or int(dst.max()) >= node_count):
        raise ConfigError(f"{path}: edge endpoint out of node range")
    return EdgeList(node_count=node_count, src=src, dst=dst, directed=directed)


# ---------------------------------------------------------------------------
# initiator estimation (desk-scale KronFit)


def _digit_cells(pu: np.ndarray, pv: np.ndarray, n: int, k: int) -> np.ndarray:
    """Per-round initiator cell index of each (permuted) node pair; shape (k, E)."""
    cells = np.empty((k, len(pu)), dtype=np.int64)
    for r in range(k):
        shift = n ** (k - 1 - r)
        iu = (pu // shift) % n
        iv = (pv // shift) % n
        cells[r] = iu * n + iv
    return cells


def _edge_terms(theta: np.ndarray, cells: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """log p and log p - log(1-p) per pair, given per-round cells."""
    log_theta = np.log(theta.reshape(-1))
    logp = log_theta[cells].sum(axis=0)
    p = np.exp(logp)
    return logp, logp - np.log1p(-p)


def estimate_initiator(
    graph: EdgeList,
    n: int = 2,
    iterations: int = 100,
    learning_rate: float = 0.1,
    permutation_samples: int = 3,
    s: RandomStream | None = None,
    swaps_per_sample: int | None = None,
) -> InitiatorMatrix:
    """Fit an n x n initiator to a graph by sampled-permutation gradient ascent.

    Each iteration refreshes the node permutation with Metropolis swaps and
    averages the likelihood gradient over `permutation_samples` snapshots.
    The non-edge part of the likelihood uses the standard second-order
    approximation -(sum theta)^k - 0.5 * (sum theta^2)^k, which is exact
    enough for the sparse graphs this targets. Entries are clamped to
    [0.001, 0.999]. Deterministic given the seed stream.
    """
    if graph.edge_count == 0:
        raise ParameterError("cannot fit an initiator to an empty graph")
    if n < 2:
        raise ParameterError("initiator side length must be >= 2")
    if iterations < 1 or permutation_samples < 1:
        raise ParameterError("iterations and permutation_samples must be >= 1")
    if learning_rate <= 0:
        raise ParameterError("learning_rate must be positive")
    if s is None:
        s = derive_stream(0, 0)

    k = max(1, math.ceil(math.log(max(graph.node_count, 2)) / math.log(n) - 1e-9))
    nodes = _check_power(n, k)

    if graph.directed:
        src = graph.src.astype(np.int64)
        dst = graph.dst.astype(np.int64)
    else:
        loops = graph.src == graph.dst
        src = np.concatenate([graph.src, graph.dst[~loops]]).astype(np.int64)
        dst = np.concatenate([graph.dst, graph.src[~loops]]).astype(np.int64)
    e = len(src)

    # incident edge ids per node, for local swap deltas
    incident: list[list[int]] = [[] for _ in range(nodes)]
    for i, (a, b) in enumerate(zip(src.tolist(), dst.tolist())):
        incident[a].append(i)
        if b != a:
            incident[b].append(i)
    incident_arr = [np.array(ids, dtype=np.int64) for ids in incident]

    theta = _default_theta(n)
    if not graph.directed:
        theta = (theta + theta.T) / 2.0

    sigma = np.arange(nodes, dtype=np.int64)
    for i in range(nodes - 1, 0, -1):  # Fisher-Yates from the stream
        j = int(s.next_double() * (i + 1))
        sigma[i], sigma[j] = sigma[j], sigma[i]

    if swaps_per_sample is None:
        swaps_per_sample = max(nodes, 100)

    def swap_round(count: int) -> None:
        for _ in range(count):
            a = int(s.next_double() * nodes)
            b = int(s.next_double() * nodes)
            if a == b:
                continue
            ids = incident_arr[a]
            if len(incident_arr[b]):
                ids = np.unique(np.concatenate([ids, incident_arr[b]]))
            if len(ids) == 0:
                sigma[a], sigma[b] = sigma[b], sigma[a]
                continue
            pu, pv = sigma[src[ids]], sigma[dst[ids]]
            _, old_terms = _edge_terms(theta, _digit_cells(pu, pv, n, k))
            sigma[a], sigma[b] = sigma[b], sigma[a]
            pu, pv = sigma[src[ids]], sigma[dst[ids]]
            _, new_terms = _edge_terms(theta, _digit_cells(pu, pv, n, k))
            delta = float(new_terms.sum() - old_terms.sum())
            if delta < 0 and s.next_double() >= math.exp(max(delta, -700.0)):
                sigma[a], sigma[b] = sigma[b], sigma[a]  # revert

    swap_round(10 * nodes)  # warm-up before the first gradient

    for _ in range(iterations):
        grad = np.zeros(n * n, dtype=np.float64)
        for _ in range(permutation_samples):
            swap_round(swaps_per_sample)
            cells = _digit_cells(sigma[src], sigma[dst], n, k)
            logp, _ = _edge_terms(theta, cells)
            p = np.exp(logp)
            coeff = 1.0 + p / (1.0 - p)
            sample_grad = np.zeros(n * n, dtype=np.float64)
            for r in range(k):
                sample_grad += np.bincount(cells[r], weights=coeff, minlength=n * n)
            grad += sample_grad
        grad /= permutation_samples
        grad = grad.reshape(n, n) / theta
        ssum = theta.sum()
        s2sum = (theta ** 2).sum()
        grad -= k * ssum ** (k - 1)
        grad -= k * theta * s2sum ** (k - 1)
        theta = theta + learning_rate * grad / (e * k)
        theta = np.clip(theta, 0.001, 0.999)
        if not graph.directed:
            theta = (theta + theta.T) / 2.0

    # canonical labeling: strongest diagonal entry first
    if theta[n - 1, n - 1] > theta[0, 0]:
        theta = theta[::-1, ::-1].copy()
    return InitiatorMatrix(theta, directed=graph.directed)


def _default_theta(n: int) -> np.ndarray:
    if n == 2:
        return np.array([[0.9, 0.6], [0.6, 0.2]])
    t = np.full((n, n), 0.5)
    for i in range(n):
        t[i, i] = 0.9 - 0.6 * i / max(n - 1, 1)
    return t


# ---------------------------------------------------------------------------
# plan-driven generation


def generate_graph_volume(initiator: InitiatorMatrix, plan: GenerationPlan) -> ThroughputReport:
    """Write an edge-list file with exactly plan.edges distinct edges."""
    if plan.edges is None:
        raise ParameterError("graph plans take an edge-count target")
    k = plan.power
    if k is None:
        k = max(1, math.ceil(math.log(max(plan.edges, 2)) / math.log(initiator.n) - 1e-9))
    started = time.perf_counter()
    graph = generate_edges(initiator, k, plan.seed, plan.edges, workers=plan.workers)
    total = 0
    with open(plan.out, "wb") as fh:
        header = _edge_header(graph)
        fh.write(header)
        total += len(header)
        if plan.rate is None:
            for chunk in _edge_line_chunks(graph.src, graph.dst):
                fh.write(chunk)
                total += len(chunk)
        else:
            def lines():
                for i in range(graph.edge_count):
                    yield f"{graph.src[i]}\t{graph.dst[i]}\n".encode()

            for rec in rate_limit(lines(), plan.rate, cost=lambda _: 1.0):
                fh.write(rec)
                total += len(rec)
    elapsed = time.perf_counter() - started
    return ThroughputReport(
        kind="graph",
        amount_bytes=total,
        amount_units=graph.edge_count,
        unit_label="edges",
        seconds=elapsed,
        workers=plan.workers,
        seed=plan.seed,
    )
