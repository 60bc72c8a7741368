"""Keyed random streams and the elementary samplers used by every model.

A stream is a numpy ``Generator`` (PCG64) seeded from a hash of
``(run_seed, replication, label)``, so replications fan out without any
shared state and every draw is reproducible bit for bit.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class StreamKey:
    run_seed: int
    replication: int = 0
    label: str = "root"

    def child(self, label: str) -> "StreamKey":
        return StreamKey(self.run_seed, self.replication, f"{self.label}/{label}")


def _label_words(label: str) -> list[int]:
    digest = hashlib.blake2b(label.encode("utf-8"), digest_size=16).digest()
    return [int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4)]


class Stream:
    """Single-consumer random stream; ``rng`` is the underlying numpy Generator."""

    __slots__ = ("key", "rng")

    def __init__(self, key: StreamKey):
        if key.replication < 0:
            raise InvalidParameterError("replication index must be >= 0")
        self.key = key
        seed = int(key.run_seed) & _MASK64
        entropy = [seed & 0xFFFFFFFF, seed >> 32, int(key.replication)] + _label_words(key.label)
        self.rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))

    def child(self, label: str) -> "Stream":
        """Independent sub-stream; depends only on this stream's key, not its state."""
        return Stream(self.key.child(label))

    def __repr__(self):
        return f"Stream({self.key!r})"


def make_stream(key: StreamKey | int, replication: int = 0, label: str = "root") -> Stream:
    if not isinstance(key, StreamKey):
        key = StreamKey(int(key), replication, label)
    return Stream(key)


def sample_uniform(s: Stream, size=None):
    """Uniform draws on the half-open interval (0, 1]."""
    return 1.0 - s.rng.random(size)


def sample_exponential(s: Stream, size=None):
    """Exp(1) by inversion; ``u`` in (0, 1] keeps ``-log(u)`` finite."""
    return -np.log(sample_uniform(s, size))


def _check_rate(lam):
    arr = np.asarray(lam, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise InvalidParameterError(f"Poisson parameter must be finite and >= 0, got {lam!r}")
    return arr


def sample_poisson(s: Stream, lam, size=None):
    """Poisson draws; ``lam`` may be a scalar or an array (drawn in C order)."""
    arr = _check_rate(lam)
    out = s.rng.poisson(arr, size)
    if np.ndim(out) == 0:
        return int(out)
    return out.astype(np.int64, copy=False)


def sample_geometric_from_exponential(s: Stream, scale: float, size=None):
    """Return ``(ceil(xi * scale), xi)`` with ``xi ~ Exp(1)``.

    The first component is Geometric on {1, 2, ...} with success probability
    ``1 - exp(-1/scale)``; the exponential itself is returned for reuse.
    """
    if not (scale > 0) or not math.isfinite(scale):
        raise InvalidParameterError(f"scale must be positive, got {scale!r}")
    xi = sample_exponential(s, size)
    # xi == 0 has probability ~2**-53; clamp to the support of the geometric law
    c = np.maximum(np.ceil(xi * scale), 1).astype(np.int64)
    if np.ndim(c) == 0:
        return int(c), float(xi)
    return c, xi


def _check_weights(weights) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise InvalidParameterError("weights must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(w)) or np.any(w < 0) or not np.any(w > 0):
        raise InvalidParameterError("weights must be finite, non-negative and not all zero")
    return w


def categorical_index(cumulative: np.ndarray, u):
    """Inversion of uniform(s) ``u`` in (0, 1] against an (unnormalized) cumulative sum."""
    target = np.asarray(u) * cumulative[-1]
    idx = np.searchsorted(cumulative, target, side="left")
    # guard against target rounding just above the last partial sum
    return np.minimum(idx, cumulative.size - 1)


def sample_categorical(s: Stream, weights, size=None):
    w = _check_weights(weights)
    cum = np.cumsum(w)
    idx = categorical_index(cum, sample_uniform(s, size))
    if np.ndim(idx) == 0:
        return int(idx)
    return idx.astype(np.int64, copy=False)
