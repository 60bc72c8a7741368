"""Jumble and cut norm distances between multigraphs on a common vertex set.

With ``D = A(g) - A(h)``, the jumble distance is

    (1/n) * max_{S,T nonempty} |sum_{i in S, j in T} D_ij| / sqrt(|S| |T|)

and the cut distance drops the ``sqrt(|S||T|)`` weight and divides by ``n^2``.
Exact values enumerate all ``2^n - 1`` row sets; for a fixed row set and a
fixed ``|T| = t`` the best column set is the ``t`` largest (or smallest)
column scores, so the inner maximum is a sorted prefix scan.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import CapExceededError, InvalidParameterError
from .multigraph import Multigraph

DEFAULT_EXACT_CAP = 16
NAIVE_CAP = 10
_CHUNK = 1 << 12


def _diff(g: Multigraph, h: Multigraph) -> np.ndarray:
    if g.n != h.n:
        raise InvalidParameterError(f"graphs have different vertex counts ({g.n} vs {h.n})")
    return g.A - h.A


def _subset_masks(n: int, start: int, stop: int) -> np.ndarray:
    codes = np.arange(start, stop, dtype=np.int64)
    return ((codes[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(np.int64)


def _check_cap(n: int, cap: int):
    if n > cap:
        raise CapExceededError(f"exact norm requested for n={n} above cap {cap}")


def jumble_exact(g: Multigraph, h: Multigraph, cap: int = DEFAULT_EXACT_CAP) -> float:
    D = _diff(g, h)
    n = D.shape[0]
    _check_cap(n, cap)
    if not D.any():
        return 0.0
    t = np.arange(1, n + 1, dtype=float)
    best = 0.0
    for start in range(1, 1 << n, _CHUNK):
        stop = min(start + _CHUNK, 1 << n)
        masks = _subset_masks(n, start, stop)
        scores = masks @ D                       # column scores c_j for each row set S
        s = masks.sum(axis=1).astype(float)
        asc = np.sort(scores, axis=1)
        lo = np.cumsum(asc, axis=1)              # t smallest
        hi = np.cumsum(asc[:, ::-1], axis=1)     # t largest
        val = np.maximum(np.abs(lo), np.abs(hi)) / np.sqrt(s[:, None] * t[None, :])
        best = max(best, float(val.max()))
    return best / n


def jumble_naive(g: Multigraph, h: Multigraph) -> float:
    """Direct double enumeration over all nonempty (S, T); test oracle."""
    D = _diff(g, h)
    n = D.shape[0]
    if n > NAIVE_CAP:
        raise CapExceededError(f"naive enumeration is capped at n={NAIVE_CAP}")
    masks = _subset_masks(n, 1, 1 << n)
    sums = masks @ D @ masks.T
    size = masks.sum(axis=1).astype(float)
    return float((np.abs(sums) / np.sqrt(np.outer(size, size))).max()) / n


def rowsum_diff(a: Multigraph, b: Multigraph) -> tuple[int, np.ndarray]:
    """``(max_i sigma_i, sigma)`` with ``sigma_i = sum_j |A_ij - B_ij|``."""
    sigma = np.abs(_diff(a, b)).sum(axis=1)
    return int(sigma.max()), sigma


def jumble_rowsum_bound(g: Multigraph, h: Multigraph) -> float:
    """Upper bound on the jumble distance: (1/n) * max row sum of |D|."""
    m, _ = rowsum_diff(g, h)
    return m / g.n


def cut_exact(g: Multigraph, h: Multigraph, cap: int = DEFAULT_EXACT_CAP) -> float:
    D = _diff(g, h)
    n = D.shape[0]
    _check_cap(n, cap)
    best = 0
    for start in range(1, 1 << n, _CHUNK):
        stop = min(start + _CHUNK, 1 << n)
        scores = _subset_masks(n, start, stop) @ D
        pos = np.where(scores > 0, scores, 0).sum(axis=1)
        neg = np.where(scores < 0, -scores, 0).sum(axis=1)
        best = max(best, int(np.maximum(pos, neg).max()))
    return best / (n * n)


def global_stats(g: Multigraph, h: Multigraph) -> tuple[float, float]:
    """``(|sum A - sum B| / n^2, |edges(g) - edges(h)| / n^2)``."""
    if g.n != h.n:
        raise InvalidParameterError(f"graphs have different vertex counts ({g.n} vs {h.n})")
    n2 = g.n * g.n
    return (
        abs(g.total_matrix_sum - h.total_matrix_sum) / n2,
        abs(g.edge_count() - h.edge_count()) / n2,
    )


@dataclass
class DistanceReport:
    n: int
    jumble_exact: float | None
    jumble_rowsum_bound: float
    cut_exact: float | None
    global_matrix_stat: float
    global_edge_stat: float

    CSV_HEADER = "n,jumble_exact,rowsum_bound,cut_exact,matrix_stat,edge_stat"

    def csv_row(self) -> str:
        def f(x):
            return "" if x is None else repr(float(x))

        return ",".join([
            str(self.n),
            f(self.jumble_exact),
            f(self.jumble_rowsum_bound),
            f(self.cut_exact),
            f(self.global_matrix_stat),
            f(self.global_edge_stat),
        ])

    @classmethod
    def from_csv_row(cls, row: str) -> "DistanceReport":
        parts = row.strip().split(",")
        if len(parts) != 6:
            raise InvalidParameterError("distance row needs 6 comma-separated fields")

        def f(x):
            return None if x == "" else float(x)

        return cls(int(parts[0]), f(parts[1]), float(parts[2]), f(parts[3]), float(parts[4]), float(parts[5]))


def distance_report(g: Multigraph, h: Multigraph, cap: int = DEFAULT_EXACT_CAP) -> DistanceReport:
    exact = g.n <= cap
    matrix_stat, edge_stat = global_stats(g, h)
    return DistanceReport(
        n=g.n,
        jumble_exact=jumble_exact(g, h, cap) if exact else None,
        jumble_rowsum_bound=jumble_rowsum_bound(g, h),
        cut_exact=cut_exact(g, h, cap) if exact else None,
        global_matrix_stat=matrix_stat,
        global_edge_stat=edge_stat,
    )


# -- exponent of the upper bound ----------------------------------------------

def _check_alpha(alpha):
    if not (1 < alpha < 2):
        raise InvalidParameterError(f"alpha must lie in (1, 2), got {alpha!r}")


# each piece is (slope, intercept) in alpha
_PIECES = (
    (Fraction(1), Fraction(-2)),
    (Fraction(-1, 2), Fraction(1, 2)),
    (Fraction(0), Fraction(-1, 2)),
    (Fraction(-3), Fraction(4)),
)


def beta_exponent(alpha):
    """max{alpha - 2, (1 - alpha)/2, -1/2, 4 - 3 alpha}; exact for Fraction input."""
    _check_alpha(alpha)
    return max(a * alpha + b for a, b in _PIECES)


def beta_optimum() -> tuple[Fraction, Fraction]:
    """Exact minimizer of ``beta_exponent`` over (1, 2) and the minimum value.

    The envelope is a maximum of lines, so its minimum on the open interval is
    attained at a pairwise intersection of pieces.
    """
    candidates = []
    for k, (a1, b1) in enumerate(_PIECES):
        for a2, b2 in _PIECES[k + 1:]:
            if a1 != a2:
                x = (b2 - b1) / (a1 - a2)
                if 1 < x < 2:
                    candidates.append((beta_exponent(x), x))
    beta, alpha = min(candidates)
    return alpha, beta


def beta_table(alphas) -> list[tuple[float, float]]:
    return [(float(a), float(beta_exponent(a))) for a in alphas]
