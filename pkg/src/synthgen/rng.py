"""Deterministic counter-based random streams and the primitive samplers.

Every generator in the suite draws from a :class:`RandomStream` keyed by
``(master_seed, stream_id)``. A stream is a splitmix64 counter: draw ``d``
is a pure function of ``(master_seed, stream_id, d)``, which is what makes
order-independent parallel generation possible. The vectorized helpers
(`RandomStream.doubles`, `stream_bases`, `draws_at`) walk the exact same
counter sequence as repeated scalar calls, so batched and scalar code
paths emit identical values.

Not cryptographic. Cross-platform bit-exactness holds for everything built
from integer mixing, comparisons and IEEE +-*/sqrt; values that pass
through log/cos (gaussian, gamma, large-xi poisson) are exact per
platform/numpy build and equal to the last ulp elsewhere.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ParameterError

_MASK = 0xFFFFFFFFFFFFFFFF
_GAMMA = 0x9E3779B97F4A7C15  # splitmix64 counter increment
_STREAM_SALT = 0xD1B54A32D192ED03  # separates stream ids inside the key mix
_DOUBLE_SCALE = 2.0 ** -53

_V_GAMMA = np.uint64(_GAMMA)
_V_M1 = np.uint64(0xBF58476D1CE4E5B9)
_V_M2 = np.uint64(0x94D049BB133111EB)


def _mix64(z: int) -> int:
    """Finalization mix of splitmix64 (scalar, python ints)."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def _mix64_vec(z: np.ndarray) -> np.ndarray:
    """Vector twin of :func:`_mix64`; uint64 wraparound does the masking."""
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= _V_M1
    z ^= z >> np.uint64(27)
    z *= _V_M2
    return z ^ (z >> np.uint64(31))


def _stream_base(master_seed: int, stream_id: int) -> int:
    key = _mix64((master_seed + _GAMMA) & _MASK)
    return _mix64((key + stream_id * _STREAM_SALT) & _MASK)


class RandomStream:
    """Deterministic sample stream, single-owner, cheap to create."""

    __slots__ = ("master_seed", "stream_id", "_base", "_count")

    def __init__(self, master_seed: int, stream_id: int = 0):
        self.master_seed = master_seed & _MASK
        self.stream_id = stream_id & _MASK
        self._base = _stream_base(self.master_seed, self.stream_id)
        self._count = 0

    @property
    def key(self) -> int:
        """The 64-bit mix of (master_seed, stream_id); seeds child streams."""
        return self._base

    def substream(self, child_id: int) -> "RandomStream":
        """Derive an independent child stream; pure function of the parent key."""
        return RandomStream(self._base, child_id)

    def next_u64(self) -> int:
        self._count += 1
        return _mix64((self._base + self._count * _GAMMA) & _MASK)

    def next_double(self) -> float:
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) * _DOUBLE_SCALE

    def next_double_open(self) -> float:
        """Uniform double in (0, 1]; safe to pass through log."""
        return ((self.next_u64() >> 11) + 1) * _DOUBLE_SCALE

    def doubles(self, count: int) -> np.ndarray:
        """Block of uniforms equal to `count` consecutive next_double calls."""
        idx = np.arange(self._count + 1, self._count + count + 1, dtype=np.uint64)
        self._count += count
        vals = _mix64_vec(np.uint64(self._base) + idx * _V_GAMMA)
        return (vals >> np.uint64(11)) * _DOUBLE_SCALE


def derive_stream(master_seed: int, stream_id: int) -> RandomStream:
    """Independent deterministic stream for (master_seed, stream_id)."""
    return RandomStream(master_seed, stream_id)


def stream_bases(master_seed: int, stream_ids: np.ndarray) -> np.ndarray:
    """Vectorized stream keys: bases[i] drives the same draws as
    derive_stream(master_seed, stream_ids[i])."""
    key = np.uint64(_mix64((master_seed + _GAMMA) & _MASK))
    ids = np.asarray(stream_ids, dtype=np.uint64)
    return _mix64_vec(key + ids * np.uint64(_STREAM_SALT))


def draws_at(bases: np.ndarray, draw_index: int) -> np.ndarray:
    """The draw_index-th uniform (1-based) of each stream in `bases`."""
    offset = np.uint64((draw_index * _GAMMA) & _MASK)
    vals = _mix64_vec(bases + offset)
    return (vals >> np.uint64(11)) * _DOUBLE_SCALE


def draws_at_open(bases: np.ndarray, draw_index: int) -> np.ndarray:
    """Like draws_at but in (0, 1]; safe to pass through log."""
    offset = np.uint64((draw_index * _GAMMA) & _MASK)
    vals = _mix64_vec(bases + offset)
    return ((vals >> np.uint64(11)) + np.uint64(1)) * _DOUBLE_SCALE


# ---------------------------------------------------------------------------
# scalar samplers


def sample_bernoulli(s: RandomStream, p: float) -> bool:
    """True with probability p."""
    if not (0.0 <= p <= 1.0):
        raise ParameterError(f"bernoulli p must be in [0, 1], got {p}")
    return s.next_double() < p


def _check_weights(weights) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise ParameterError("weights must be a non-empty 1-d vector")
    if not np.all(np.isfinite(w)):
        raise ParameterError("weights must be finite")
    if np.any(w < 0):
        raise ParameterError("weights must be nonnegative")
    if w.sum() <= 0:
        raise ParameterError("at least one weight must be positive")
    return w


def sample_multinomial(s: RandomStream, weights) -> int:
    """Index i with probability weights[i] / sum(weights)."""
    w = _check_weights(weights)
    cum = np.cumsum(w)
    return _index_from_cum(cum, s.next_double())


def _index_from_cum(cum: np.ndarray, u: float) -> int:
    # side="right" keeps zero-mass categories unreachable; the final clamp
    # only fires when u*total rounds up to the total itself.
    i = int(np.searchsorted(cum, u * cum[-1], side="right"))
    if i >= cum.size:
        i = int(np.searchsorted(cum, cum[-1], side="left"))
    return i


def sample_dirichlet(s: RandomStream, alpha) -> np.ndarray:
    """Point on the simplex from Dirichlet(alpha), via normalized gammas."""
    a = np.asarray(alpha, dtype=np.float64)
    if a.ndim != 1 or a.size == 0:
        raise ParameterError("alpha must be a non-empty 1-d vector")
    if not np.all(np.isfinite(a)) or np.any(a <= 0):
        raise ParameterError("all alpha components must be positive and finite")
    for _ in range(100):
        g = gamma_block(s, a)
        total = g.sum()
        if total > 0:
            return g / total
    raise ParameterError("alpha too small: gamma draws underflow to zero")


def gamma_block(s: RandomStream, shapes) -> np.ndarray:
    """Gamma(shape_i, 1) draws via the Marsaglia-Tsang squeeze, whole block.

    Each rejection round consumes one block of 3 uniforms per still-pending
    lane (two for the Box-Muller normal, one for the squeeze), so the
    sequence of draws is reproducible. Shapes below 1 are boosted through
    Gamma(shape + 1) and scaled by u^(1/shape) afterwards.
    """
    shapes = np.asarray(shapes, dtype=np.float64)
    out = np.empty(len(shapes))
    boost = shapes < 1.0
    work = np.where(boost, shapes + 1.0, shapes)
    d = work - 1.0 / 3.0
    c = 1.0 / np.sqrt(9.0 * d)
    pending = np.arange(len(shapes))
    while len(pending):
        m = len(pending)
        u = s.doubles(3 * m)
        u1 = u[0::3] + _DOUBLE_SCALE  # (0, 1]; safe through log
        u2 = u[1::3]
        u3 = u[2::3]
        x = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
        dp = d[pending]
        v = (1.0 + c[pending] * x) ** 3
        positive = v > 0.0
        squeeze = u3 < 1.0 - 0.0331 * x ** 4
        with np.errstate(divide="ignore", invalid="ignore"):
            slow = np.log(u3) < 0.5 * x * x + dp * (1.0 - v + np.log(np.where(positive, v, 1.0)))
        accept = positive & (squeeze | slow)
        taken = pending[accept]
        out[taken] = dp[accept] * v[accept]
        pending = pending[~accept]
    if np.any(boost):
        ub = s.doubles(int(boost.sum()))
        out[boost] *= ub ** (1.0 / shapes[boost])
    return out


def sample_gamma(s: RandomStream, shape: float) -> float:
    """Gamma(shape, 1) draw; scalar view of gamma_block."""
    if shape <= 0 or not math.isfinite(shape):
        raise ParameterError(f"gamma shape must be positive, got {shape}")
    return float(gamma_block(s, np.array([shape]))[0])


def sample_gaussian(s: RandomStream, mean: float = 0.0, sd: float = 1.0) -> float:
    """Normal draw via Box-Muller; always consumes exactly two uniforms."""
    if sd <= 0 or not math.isfinite(sd):
        raise ParameterError(f"gaussian sd must be positive, got {sd}")
    u1 = s.next_double_open()
    u2 = s.next_double()
    z = math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
    return mean + sd * z


def sample_poisson(s: RandomStream, xi: float) -> int:
    """Poisson count; inversion below 30, Hormann's PTRS rejection above."""
    if xi <= 0 or not math.isfinite(xi):
        raise ParameterError(f"poisson rate must be positive, got {xi}")
    if xi < 30.0:
        limit = math.exp(-xi)
        k = 0
        prod = s.next_double()
        while prod > limit:
            k += 1
            prod *= s.next_double()
        return k
    return _poisson_ptrs(s, xi)


def _poisson_ptrs(s: RandomStream, mu: float) -> int:
    # Transformed rejection with squeeze (Hormann 1993); no normal approximation.
    b = 0.931 + 2.53 * math.sqrt(mu)
    a = -0.059 + 0.02483 * b
    inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
    v_r = 0.9277 - 3.6224 / (b - 2.0)
    log_mu = math.log(mu)
    while True:
        u = s.next_double() - 0.5
        v = s.next_double()
        us = 0.5 - abs(u)
        k = math.floor((2.0 * a / us + b) * u + mu + 0.43)
        if us >= 0.07 and v <= v_r:
            return int(k)
        if k < 0 or (us < 0.013 and v > us):
            continue
        if v <= 0.0:
            return int(k)
        lhs = math.log(v * inv_alpha / (a / (us * us) + b))
        if lhs <= k * log_mu - mu - math.lgamma(k + 1.0):
            return int(k)


def sample_uniform(s: RandomStream, lo: float, hi: float) -> float:
    """Uniform real in [lo, hi)."""
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
        raise ParameterError(f"invalid uniform range [{lo}, {hi})")
    return lo + (hi - lo) * s.next_double()


def sample_uniform_int(s: RandomStream, lo: int, hi: int) -> int:
    """Uniform integer in [lo, hi] inclusive."""
    if hi < lo:
        raise ParameterError(f"invalid integer range [{lo}, {hi}]")
    span = hi - lo + 1
    return lo + int(s.next_double() * span)


def zipf_cumweights(exponent: float, cardinality: int) -> np.ndarray:
    """Cumulative rank weights for a Zipf(s) law over 1..cardinality."""
    if exponent <= 0:
        raise ParameterError(f"zipf exponent must be positive, got {exponent}")
    if not (1 <= cardinality <= 10 ** 6):
        raise ParameterError("zipf cardinality must be in [1, 1e6]")
    ranks = np.arange(1, cardinality + 1, dtype=np.float64)
    return np.cumsum(ranks ** -exponent)
