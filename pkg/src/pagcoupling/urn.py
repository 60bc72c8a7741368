"""Pólya urn with a Fenwick (binary indexed) tree for O(log n) weighted choice.

Each step draws ``u`` uniform on (0, 1] and selects the smallest urn index
whose cumulative ball count reaches ``u * total``.  The hot loops are
compiled with numba; the pure-Python wrappers own all randomness.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import InvalidParameterError
from .rand import Stream, sample_uniform


@numba.njit(cache=True)
def fenwick_build(counts):
    n = counts.shape[0]
    tree = np.zeros(n + 1, dtype=np.int64)
    for i in range(n):
        tree[i + 1] += counts[i]
        parent = (i + 1) + ((i + 1) & -(i + 1))
        if parent <= n:
            tree[parent] += tree[i + 1]
    return tree


@numba.njit(cache=True)
def fenwick_add(tree, i, delta):
    n = tree.shape[0] - 1
    k = i + 1
    while k <= n:
        tree[k] += delta
        k += k & -k


@numba.njit(cache=True)
def fenwick_prefix(tree, i):
    """Sum of counts[0..i] inclusive."""
    s = 0
    k = i + 1
    while k > 0:
        s += tree[k]
        k -= k & -k
    return s


@numba.njit(cache=True)
def fenwick_search(tree, target):
    """Smallest 0-based index whose inclusive prefix sum is >= target (target > 0)."""
    n = tree.shape[0] - 1
    pos = 0
    step = 1
    while step * 2 <= n:
        step *= 2
    rem = target
    while step > 0:
        nxt = pos + step
        if nxt <= n and tree[nxt] < rem:
            pos = nxt
            rem -= tree[nxt]
        step //= 2
    if pos >= n:
        pos = n - 1
    return pos


def linear_search(counts, target) -> int:
    """Reference linear cumulative scan with the same selection rule as the tree."""
    acc = 0
    for i, c in enumerate(counts):
        acc += c
        if acc >= target:
            return i
    return len(counts) - 1


@numba.njit(cache=True)
def _run_steps(tree, counts, total, uniforms, out):
    for k in range(uniforms.shape[0]):
        i = fenwick_search(tree, uniforms[k] * total)
        counts[i] += 1
        fenwick_add(tree, i, 1)
        total += 1
        out[k] = i
    return total


@dataclass
class UrnState:
    n: int
    counts: np.ndarray
    fenwick: np.ndarray
    total: int
    t: int = 0

    @classmethod
    def fresh(cls, n: int) -> "UrnState":
        return cls.from_counts(np.ones(n, dtype=np.int64), t=0)

    @classmethod
    def from_counts(cls, counts, t: int | None = None) -> "UrnState":
        counts = np.array(counts, dtype=np.int64)
        if counts.ndim != 1 or counts.size == 0 or np.any(counts < 1):
            raise InvalidParameterError("every urn needs at least one ball")
        n = counts.size
        total = int(counts.sum())
        return cls(n, counts, fenwick_build(counts), total, total - n if t is None else t)

    def proportions(self) -> np.ndarray:
        return self.counts / float(self.t + self.n)


@dataclass
class UrnTrajectory:
    n: int
    choices: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def __len__(self):
        return int(self.choices.size)

    def final_counts(self, initial=None) -> np.ndarray:
        base = np.ones(self.n, dtype=np.int64) if initial is None else np.asarray(initial, dtype=np.int64)
        return base + np.bincount(self.choices, minlength=self.n)

    def proportions_at(self, t: int, initial=None) -> np.ndarray:
        """R_{i,t}: urn proportions after the first ``t`` recorded steps."""
        base = np.ones(self.n, dtype=np.int64) if initial is None else np.asarray(initial, dtype=np.int64)
        counts = base + np.bincount(self.choices[:t], minlength=self.n)
        return counts / float(counts.sum())


def urn_step(u: UrnState, s: Stream) -> int:
    out = np.empty(1, dtype=np.int64)
    u.total = int(_run_steps(u.fenwick, u.counts, u.total, np.atleast_1d(sample_uniform(s)), out))
    u.t += 1
    return int(out[0])


def advance(u: UrnState, steps: int, s: Stream) -> np.ndarray:
    """Run ``steps`` more steps in place and return the chosen indices."""
    if steps < 0:
        raise InvalidParameterError("steps must be >= 0")
    out = np.empty(steps, dtype=np.int64)
    if steps:
        u.total = int(_run_steps(u.fenwick, u.counts, u.total, sample_uniform(s, steps), out))
        u.t += steps
    return out


def run_urn(n: int, steps: int, s: Stream, record: bool = False):
    """Run a fresh urn with one ball per urn; returns ``(state, trajectory or None)``."""
    if n < 1:
        raise InvalidParameterError("need at least one urn")
    u = UrnState.fresh(n)
    choices = advance(u, steps, s)
    return u, (UrnTrajectory(n, choices) if record else None)


def run_urn_conditioned(n: int, final_counts, s: Stream) -> UrnTrajectory:
    """Trajectory with prescribed final counts, drawn from its exact conditional law.

    Sequence probabilities of a Pólya urn depend only on the final counts, so
    the conditional law is a uniform shuffle of the multiset in which urn ``i``
    appears ``final_counts[i] - 1`` times.
    """
    fc = np.asarray(final_counts, dtype=np.int64)
    if fc.shape != (n,):
        raise InvalidParameterError(f"expected {n} final counts, got shape {fc.shape}")
    if np.any(fc < 1):
        raise InvalidParameterError("final counts must all be >= 1")
    multiset = np.repeat(np.arange(n, dtype=np.int64), fc - 1)
    return UrnTrajectory(n, s.rng.permutation(multiset))


@numba.njit(cache=True)
def _batch_final_counts(n, steps, uniforms):
    """Final counts of independent fresh urns, one row per entry of ``steps``."""
    m = steps.shape[0]
    out = np.ones((m, n), dtype=np.int64)
    pos = 0
    for r in range(m):
        total = n
        for _ in range(steps[r]):
            x = uniforms[pos] * total
            pos += 1
            acc = 0
            sel = n - 1
            for i in range(n):
                acc += out[r, i]
                if acc >= x:
                    sel = i
                    break
            out[r, sel] += 1
            total += 1
    return out


def batch_final_counts(n: int, steps, s: Stream) -> np.ndarray:
    """Final counts of many small independent urn runs (linear scan, for small n)."""
    steps = np.asarray(steps, dtype=np.int64)
    return _batch_final_counts(n, steps, sample_uniform(s, int(steps.sum())))
