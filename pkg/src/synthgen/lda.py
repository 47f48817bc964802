"""Topic-model text generation: train on a seed corpus, then sample documents.

Training uses collapsed Gibbs sampling over token-topic assignments; the
topic-word matrix is read out as smoothed normalized counts after the last
sweep. Generation follows the standard three-step process: draw a length
from Poisson(xi), topic proportions from Dirichlet(alpha), then for every
word a topic from the proportions and a token from that topic's row.

Documents are independent given the model, so document i of a volume run
is produced entirely from derive_stream(seed, i) and the output does not
depend on how documents are distributed over workers.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ConfigError, ParameterError
from .rng import RandomStream, derive_stream, sample_dirichlet, sample_poisson
from .runtime import GenerationPlan, ThroughputReport, run_chunked

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    """Lowercase, split on non-alphanumerics, drop pure-digit tokens."""
    return [t for t in _TOKEN_RE.findall(text.lower()) if not t.isdigit()]


class Dictionary:
    """Ordered vocabulary with stable token indices."""

    def __init__(self, words: list[str]):
        if len(set(words)) != len(words):
            raise ConfigError("dictionary contains duplicate tokens")
        if not words:
            raise ConfigError("dictionary must contain at least one token")
        self.words = list(words)
        self.index = {w: i for i, w in enumerate(self.words)}

    def __len__(self) -> int:
        return len(self.words)

    def __eq__(self, other) -> bool:
        return isinstance(other, Dictionary) and self.words == other.words


@dataclass
class BagOfWordsCorpus:
    """Sparse (token-index, count) document vectors over a dictionary."""

    documents: list[list[tuple[int, int]]]
    dictionary: Dictionary

    def doc_lengths(self) -> np.ndarray:
        return np.array([sum(c for _, c in d) for d in self.documents], dtype=np.int64)


def preprocess_corpus(
    raw_documents: Iterable[str], min_token_frequency: int = 5
) -> tuple[Dictionary, BagOfWordsCorpus]:
    """Tokenize a raw corpus and keep tokens with frequency >= the threshold.

    Documents that end up empty after filtering are dropped; an entirely
    empty result is an error naming the cause.
    """
    if min_token_frequency < 1:
        raise ParameterError("min_token_frequency must be >= 1")
    token_docs = [tokenize(doc) for doc in raw_documents]
    freq: Counter = Counter()
    for toks in token_docs:
        freq.update(toks)
    if not freq:
        raise ParameterError("corpus is empty after tokenization")
    words: list[str] = []
    seen = set()
    for toks in token_docs:  # first-appearance order keeps indices stable
        for t in toks:
            if t not in seen and freq[t] >= min_token_frequency:
                seen.add(t)
                words.append(t)
    if not words:
        raise ParameterError(
            f"all {len(freq)} distinct tokens fall below "
            f"min_token_frequency={min_token_frequency}; dictionary is empty"
        )
    dictionary = Dictionary(words)
    documents = []
    for toks in token_docs:
        counts = Counter(t for t in toks if t in dictionary.index)
        if counts:
            documents.append([(dictionary.index[t], c) for t, c in counts.items()])
    if not documents:
        raise ParameterError("no document survived token filtering")
    return dictionary, BagOfWordsCorpus(documents, dictionary)


class LdaModel:
    """Trained topic model: priors, topic-word matrix, and the dictionary."""

    def __init__(self, k, alpha, beta, xi, dictionary: Dictionary):
        self.k = int(k)
        self.alpha = np.asarray(alpha, dtype=np.float64)
        self.beta = np.asarray(beta, dtype=np.float64)
        self.xi = float(xi)
        self.dictionary = dictionary
        self._validate()
        # generation tables: per-row CDFs normalized to end exactly at 1 and
        # offset by the topic index, so one searchsorted resolves any mix of
        # topics against the stacked array
        cum = np.cumsum(self.beta, axis=1)
        cum = cum / cum[:, -1:]
        self._cum_beta = cum
        self._flat_cum_beta = (cum + np.arange(self.k)[:, None]).reshape(-1)
        self._token_bytes = [w.encode("utf-8") for w in dictionary.words]

    def _validate(self) -> None:
        v = len(self.dictionary)
        if self.k < 1:
            raise ConfigError("topic count must be >= 1")
        if self.alpha.shape != (self.k,) or np.any(self.alpha <= 0):
            raise ConfigError("alpha must be a strictly positive vector of length k")
        if not np.isfinite(self.xi) or self.xi <= 0:
            raise ConfigError("document length prior xi must be positive")
        if self.beta.shape != (self.k, v):
            raise ConfigError(
                f"beta must be k x V = {self.k} x {v}, got {self.beta.shape}"
            )
        if np.any(self.beta < 0):
            raise ConfigError("beta entries must be nonnegative")
        rowsums = self.beta.sum(axis=1)
        if np.any(np.abs(rowsums - 1.0) > 1e-6):
            raise ConfigError("every beta row must sum to 1 within 1e-6")

    def expected_word_marginal(self) -> np.ndarray:
        """Mixture-averaged word distribution sum_k E[theta_k] * beta[k]."""
        mean_theta = self.alpha / self.alpha.sum()
        return mean_theta @ self.beta

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "alpha": self.alpha.tolist(),
            "xi": self.xi,
            "dictionary": list(self.dictionary.words),
            "beta": self.beta.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LdaModel":
        try:
            return cls(
                k=data["k"],
                alpha=data["alpha"],
                beta=data["beta"],
                xi=data["xi"],
                dictionary=Dictionary(data["dictionary"]),
            )
        except KeyError as e:
            raise ConfigError(f"model file missing field {e}") from e

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "LdaModel":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as e:
                raise ConfigError(f"model file {path} is not valid JSON: {e}") from e
        return cls.from_dict(data)


def train_lda(
    corpus: BagOfWordsCorpus,
    k: int,
    iterations: int = 100,
    alpha_init: float | None = None,
    eta: float = 0.01,
    s: RandomStream | None = None,
) -> LdaModel:
    """Collapsed Gibbs training; deterministic given corpus, params and seed.

    alpha_init defaults to the 50/k heuristic. beta is the smoothed
    normalized topic-word count matrix after the final sweep; xi is the
    corpus mean document length.
    """
    v = len(corpus.dictionary)
    if k < 1:
        raise ParameterError("topic count must be >= 1")
    if k > v:
        raise ParameterError(f"topic count {k} exceeds distinct token count {v}")
    if iterations < 1:
        raise ParameterError("iterations must be >= 1")
    if eta <= 0:
        raise ParameterError("smoothing eta must be positive")
    if not corpus.documents:
        raise ParameterError("corpus is empty")
    if alpha_init is None:
        alpha_init = 50.0 / k
    if alpha_init <= 0:
        raise ParameterError("alpha_init must be positive")
    if s is None:
        s = derive_stream(0, 0)

    doc_tokens = [
        np.repeat(
            np.array([w for w, _ in doc], dtype=np.int64),
            np.array([c for _, c in doc], dtype=np.int64),
        )
        for doc in corpus.documents
    ]
    n_docs = len(doc_tokens)
    lengths = np.array([len(t) for t in doc_tokens], dtype=np.int64)
    xi = float(lengths.mean())

    n_kw = np.zeros((k, v), dtype=np.float64)
    n_k = np.zeros(k, dtype=np.float64)
    n_dk = np.zeros((n_docs, k), dtype=np.float64)
    assignments = []
    for d, toks in enumerate(doc_tokens):
        z = np.minimum((s.doubles(len(toks)) * k).astype(np.int64), k - 1)
        assignments.append(z)
        np.add.at(n_kw, (z, toks), 1.0)
        np.add.at(n_k, z, 1.0)
        np.add.at(n_dk[d], z, 1.0)

    v_eta = v * eta
    for _ in range(iterations):
        for d, toks in enumerate(doc_tokens):
            z = assignments[d]
            row = n_dk[d]
            for t in range(len(toks)):
                w = toks[t]
                old = z[t]
                n_kw[old, w] -= 1.0
                n_k[old] -= 1.0
                row[old] -= 1.0
                probs = (n_kw[:, w] + eta) / (n_k + v_eta) * (row + alpha_init)
                cum = np.cumsum(probs)
                new = int(np.searchsorted(cum, s.next_double() * cum[-1], side="right"))
                if new >= k:
                    new = k - 1
                z[t] = new
                n_kw[new, w] += 1.0
                n_k[new] += 1.0
                row[new] += 1.0

    beta = (n_kw + eta) / (n_k + v_eta)[:, None]
    alpha = np.full(k, alpha_init, dtype=np.float64)
    return LdaModel(k=k, alpha=alpha, beta=beta, xi=xi, dictionary=corpus.dictionary)


@dataclass
class DocumentDraw:
    """One sampled document: length, topic proportions, tokens and topics."""

    n: int
    theta: np.ndarray
    words: np.ndarray
    topics: np.ndarray


def generate_document(model: LdaModel, s: RandomStream) -> DocumentDraw:
    """Sample one document from the model."""
    n = sample_poisson(s, model.xi)
    theta = sample_dirichlet(s, model.alpha)
    if n == 0:
        empty = np.empty(0, dtype=np.int64)
        return DocumentDraw(0, theta, empty, empty)
    cum_theta = np.cumsum(theta)
    uz = s.doubles(n)
    topics = np.minimum(
        np.searchsorted(cum_theta, uz * cum_theta[-1], side="right"), model.k - 1
    )
    uw = s.doubles(n)
    v = len(model.dictionary)
    flat = np.searchsorted(model._flat_cum_beta, topics + uw, side="right")
    words = flat - topics * v
    return DocumentDraw(n, theta, words, topics)


def render_document(model: LdaModel, draw: DocumentDraw) -> bytes:
    """One document as a space-joined token line."""
    toks = model._token_bytes
    return b" ".join([toks[w] for w in draw.words.tolist()]) + b"\n"


def text_chunk(model: LdaModel, seed: int, start: int, count: int) -> tuple[bytes, np.ndarray]:
    """Documents [start, start+count) as newline-delimited bytes plus sizes."""
    lines = []
    sizes = np.empty(count, dtype=np.int64)
    for i in range(count):
        line = render_document(model, generate_document(model, derive_stream(seed, start + i)))
        lines.append(line)
        sizes[i] = len(line)
    return b"".join(lines), sizes


def generate_text_volume(model: LdaModel, plan: GenerationPlan) -> ThroughputReport:
    """Write documents until the plan's document or byte target is met."""
    if plan.edges is not None:
        raise ParameterError("text plans take a document count or byte target")
    return run_chunked(text_chunk, model, plan, "documents")
