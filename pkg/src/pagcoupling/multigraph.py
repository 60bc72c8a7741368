"""Dense undirected multigraphs with loops.

``A[i, j]`` is the multiplicity of edge ``ij``; a loop at ``i`` is stored
once in ``A[i, i]`` (not doubled).  With this convention the matrix sum is
``2 * (non-loop edges) + loops``.
"""
from __future__ import annotations

import os

import numpy as np

from .errors import InvalidParameterError


class Multigraph:
    __slots__ = ("A", "_total")

    def __init__(self, n: int):
        if int(n) < 1:
            raise InvalidParameterError("a multigraph needs at least one vertex")
        self.A = np.zeros((int(n), int(n)), dtype=np.int64)
        self._total = 0

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def total_matrix_sum(self) -> int:
        return self._total

    @classmethod
    def from_matrix(cls, A) -> "Multigraph":
        A = np.asarray(A)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise InvalidParameterError("adjacency matrix must be square")
        if not np.array_equal(A, A.T):
            raise InvalidParameterError("adjacency matrix must be symmetric")
        if np.any(A < 0):
            raise InvalidParameterError("multiplicities must be non-negative")
        g = cls(A.shape[0])
        g.A[...] = A
        g._total = int(g.A.sum())
        return g

    @classmethod
    def from_upper(cls, n: int, upper) -> "Multigraph":
        """Build from an upper-triangular (diagonal included) multiplicity array."""
        U = np.triu(np.asarray(upper, dtype=np.int64))
        A = U + U.T
        A[np.diag_indices(n)] = np.diagonal(U)
        g = cls(n)
        g.A = A
        g._total = int(A.sum())
        return g

    @classmethod
    def from_edges(cls, n: int, u, v) -> "Multigraph":
        """Multigraph with one edge per pair ``(u[k], v[k])``; repeated pairs accumulate."""
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        if u.shape != v.shape:
            raise InvalidParameterError("endpoint arrays differ in length")
        if u.size and (min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= n):
            raise IndexError("edge endpoint out of range")
        lo = np.minimum(u, v)
        hi = np.maximum(u, v)
        upper = np.bincount(lo * n + hi, minlength=n * n).reshape(n, n)
        return cls.from_upper(n, upper)

    def add_edge(self, i: int, j: int, count: int = 1) -> None:
        n = self.n
        if not (0 <= i < n and 0 <= j < n):
            raise IndexError(f"vertex out of range for n={n}: ({i}, {j})")
        if count < 1:
            raise InvalidParameterError("edge count must be positive")
        if i == j:
            self.A[i, i] += count
            self._total += count
        else:
            self.A[i, j] += count
            self.A[j, i] += count
            self._total += 2 * count

    def edge_count(self) -> int:
        """Number of edges, each loop counted once."""
        return int((self._total + np.trace(self.A)) // 2)

    def loop_count(self) -> int:
        return int(np.trace(self.A))

    def row_sums(self) -> np.ndarray:
        return self.A.sum(axis=1)

    def max_row_sum(self) -> int:
        return int(self.A.sum(axis=1).max())

    def copy(self) -> "Multigraph":
        g = Multigraph(self.n)
        g.A = self.A.copy()
        g._total = self._total
        return g

    def without_loops(self) -> "Multigraph":
        g = self.copy()
        g._total -= int(np.trace(g.A))
        np.fill_diagonal(g.A, 0)
        return g

    def __eq__(self, other):
        if not isinstance(other, Multigraph):
            return NotImplemented
        return self.A.shape == other.A.shape and bool(np.array_equal(self.A, other.A))

    def __repr__(self):
        return f"Multigraph(n={self.n}, edges={self.edge_count()})"


def new_multigraph(n: int) -> Multigraph:
    return Multigraph(n)


def add_edge(g: Multigraph, i: int, j: int, count: int = 1) -> None:
    g.add_edge(i, j, count)


def edge_count(g: Multigraph) -> int:
    return g.edge_count()


# -- plain-text serialization ---------------------------------------------
#
#   n c model seed
#   i j multiplicity        (one line per nonzero cell, i <= j)
#
# ``-`` stands for an absent header field.

def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def dumps(g: Multigraph, c=None, model=None, seed=None) -> str:
    lines = [f"{g.n} {_fmt(c)} {_fmt(model)} {_fmt(seed)}"]
    ii, jj = np.nonzero(np.triu(g.A))
    for i, j in zip(ii.tolist(), jj.tolist()):
        lines.append(f"{i} {j} {int(g.A[i, j])}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> tuple[Multigraph, dict]:
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not rows or len(rows[0]) != 4:
        raise InvalidParameterError("graph file needs a 4-field header 'n c model seed'")
    n_s, c_s, model_s, seed_s = rows[0]
    n = int(n_s)
    header = {
        "n": n,
        "c": None if c_s == "-" else float(c_s),
        "model": None if model_s == "-" else (int(model_s) if model_s.isdigit() else model_s),
        "seed": None if seed_s == "-" else int(seed_s),
    }
    upper = np.zeros((n, n), dtype=np.int64)
    for k, row in enumerate(rows[1:], start=2):
        if len(row) != 3:
            raise InvalidParameterError(f"line {k}: expected 'i j multiplicity'")
        i, j, m = (int(x) for x in row)
        if not (0 <= i <= j < n) or m < 0:
            raise InvalidParameterError(f"line {k}: bad cell ({i}, {j}, {m})")
        upper[i, j] += m
    return Multigraph.from_upper(n, upper), header


def write_graph(path, g: Multigraph, c=None, model=None, seed=None) -> None:
    with open(os.fspath(path), "w", encoding="ascii", newline="\n") as fh:
        fh.write(dumps(g, c=c, model=model, seed=seed))


def read_graph(path) -> tuple[Multigraph, dict]:
    with open(os.fspath(path), encoding="ascii") as fh:
        return loads(fh.read())
