"""Standalone generators for the seven random multigraph models.

Model 1 is the dense preferential attachment graph (pairs of consecutive
Pólya urn choices), Models 6 and 7 are the exponential-variable W-random
multigraphs with and without loops, and Models 2-5 interpolate between
them.  Each generator samples all of its own randomness from the stream it
is given; the couplings module builds all seven on one probability space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .multigraph import Multigraph
from .rand import (
    Stream,
    categorical_index,
    sample_exponential,
    sample_poisson,
    sample_uniform,
)
from .urn import UrnTrajectory, run_urn, run_urn_conditioned


@dataclass(frozen=True)
class ModelParams:
    n: int
    c: float
    alpha: float | None = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise InvalidParameterError(f"n must be a positive integer, got {self.n!r}")
        if not (self.c > 0) or not math.isfinite(self.c):
            raise InvalidParameterError(f"c must be positive, got {self.c!r}")
        if self.alpha is not None and not (1 < self.alpha < 2):
            raise InvalidParameterError(f"alpha must lie in (1, 2), got {self.alpha!r}")

    @property
    def steps(self) -> int:
        """Number of urn steps, floor(c n^2)."""
        return int(math.floor(self.c * self.n * self.n))

    @property
    def edge_slots(self) -> int:
        return self.steps // 2

    @property
    def scale(self) -> float:
        """n^(alpha-1), the multiplier turning Exp(1) draws into geometric counts."""
        return float(self.n) ** (self.require_alpha() - 1.0)

    @property
    def p_alpha(self) -> float:
        return -math.expm1(-1.0 / self.scale)

    def require_alpha(self) -> float:
        if self.alpha is None:
            raise InvalidParameterError("this model needs alpha in (1, 2)")
        return self.alpha


def kept_edges(steps: int, r: int) -> int:
    """Number of edge slots k <= floor(steps/2) with 2k - 1 > r (both draws after step r)."""
    return max(0, steps // 2 - (r + 1) // 2)


def first_kept_slot(r: int) -> int:
    """Smallest 0-based edge slot whose two urn draws both come after step r."""
    return (r + 1) // 2


@dataclass
class LatentState:
    xi: np.ndarray
    C: np.ndarray
    r: int
    R_star: np.ndarray
    first: UrnTrajectory
    tail: UrnTrajectory | None = None

    @property
    def n(self) -> int:
        return int(self.xi.size)


def sample_latent(p: ModelParams, s: Stream, with_trajectory: bool = True) -> LatentState:
    """Exponentials, their geometric roundings, the warm-up length r and R*.

    ``r + n = sum(C)`` is negative binomial, and (by exchangeability of the urn)
    a trajectory with final counts ``C`` drawn uniformly from its arrangements
    is a Pólya run of ``r`` steps.
    """
    scale = p.scale
    xi = sample_exponential(s.child("xi"), p.n)
    C = np.maximum(np.ceil(xi * scale), 1).astype(np.int64)
    total = int(C.sum())
    r = total - p.n
    R_star = C / float(total)
    if with_trajectory:
        first = run_urn_conditioned(p.n, C, s.child("arrangement"))
    else:
        first = UrnTrajectory(p.n)
    return LatentState(xi=xi, C=C, r=r, R_star=R_star, first=first)


def _pairs_to_graph(n: int, choices: np.ndarray, first_slot: int = 0, slots: int | None = None) -> Multigraph:
    if slots is None:
        slots = choices.size // 2
    a = choices[2 * first_slot:2 * slots:2]
    b = choices[2 * first_slot + 1:2 * slots:2]
    return Multigraph.from_edges(n, a, b)


def gen_model1(p: ModelParams, s: Stream) -> Multigraph:
    _, traj = run_urn(p.n, p.steps, s.child("urn"), record=True)
    return _pairs_to_graph(p.n, traj.choices)


def gen_model2(p: ModelParams, s: Stream, latent: LatentState | None = None) -> Multigraph:
    if latent is None:
        latent = sample_latent(p, s.child("latent"), with_trajectory=False)
    _, traj = run_urn(p.n, p.steps, s.child("urn"), record=True)
    return _pairs_to_graph(p.n, traj.choices, first_kept_slot(latent.r), p.edge_slots)


def random_pair_edges(n: int, R: np.ndarray, count: int, s: Stream) -> tuple[np.ndarray, np.ndarray]:
    """``count`` edges whose two endpoints are independent draws from ``R``."""
    cum = np.cumsum(R)
    u = sample_uniform(s, (count, 2))
    idx = categorical_index(cum, u).astype(np.int64)
    return idx[:, 0], idx[:, 1]


def gen_model3(p: ModelParams, s: Stream, latent: LatentState | None = None) -> Multigraph:
    if latent is None:
        latent = sample_latent(p, s.child("latent"), with_trajectory=False)
    m = kept_edges(p.steps, latent.r)
    a, b = random_pair_edges(p.n, latent.R_star, m, s.child("pairs"))
    return Multigraph.from_edges(p.n, a, b)


def poisson_upper_rates(R: np.ndarray, total_rate: float) -> np.ndarray:
    """Upper-triangular rate matrix ``total*R_i*R_j`` off the diagonal, ``total*R_i^2/2`` on it."""
    lam = np.triu(total_rate * np.outer(R, R))
    lam[np.diag_indices(R.size)] *= 0.5
    return lam


def upper_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Upper-triangle cells (diagonal included) in column-major order.

    The order for ``n`` is a prefix of the order for ``n + 1``, which is what
    makes the W-random generators extend vertex by vertex.
    """
    jj, ii = np.tril_indices(n)
    return ii, jj


def poisson_graph(lam_upper: np.ndarray, s: Stream) -> Multigraph:
    n = lam_upper.shape[0]
    ii, jj = upper_indices(n)
    draws = sample_poisson(s, lam_upper[ii, jj])
    upper = np.zeros((n, n), dtype=np.int64)
    upper[ii, jj] = draws
    return Multigraph.from_upper(n, upper)


def _model5_from_latent(p: ModelParams, latent: LatentState, s: Stream) -> Multigraph:
    return poisson_graph(poisson_upper_rates(latent.R_star, p.c * p.n * p.n), s)


def gen_model4(p: ModelParams, s: Stream, latent: LatentState | None = None) -> Multigraph:
    if latent is None:
        latent = sample_latent(p, s.child("latent"), with_trajectory=False)
    if latent.r > p.steps:
        return Multigraph(p.n)
    return _model5_from_latent(p, latent, s.child("poisson"))


def gen_model5(p: ModelParams, s: Stream, latent: LatentState | None = None) -> Multigraph:
    if latent is None:
        latent = sample_latent(p, s.child("latent"), with_trajectory=False)
    return _model5_from_latent(p, latent, s.child("poisson"))


def w_rates(xi: np.ndarray, c: float) -> np.ndarray:
    return poisson_upper_rates(xi, c)


def gen_model6(p: ModelParams, s: Stream, xi: np.ndarray | None = None) -> Multigraph:
    if xi is None:
        xi = sample_exponential(s.child("xi"), p.n)
    return poisson_graph(w_rates(xi, p.c), s.child("poisson"))


def gen_model7(p: ModelParams, s: Stream, xi: np.ndarray | None = None) -> Multigraph:
    return gen_model6(p, s, xi).without_loops()


GENERATORS = {
    1: gen_model1,
    2: gen_model2,
    3: gen_model3,
    4: gen_model4,
    5: gen_model5,
    6: gen_model6,
    7: gen_model7,
}

NEEDS_ALPHA = frozenset({2, 3, 4, 5})


def generate(model: int, p: ModelParams, s: Stream) -> Multigraph:
    if model not in GENERATORS:
        raise InvalidParameterError(f"model must be 1..7, got {model!r}")
    if model in NEEDS_ALPHA:
        p.require_alpha()
    return GENERATORS[model](p, s)
