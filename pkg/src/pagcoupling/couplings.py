"""Couplings between adjacent models and the composed chain G1 -> ... -> G7.

``build_chain`` realizes all seven graphs on one probability space:

1. exponentials -> geometric counts C -> warm-up length r and R* = C/sum(C),
   plus a uniformly shuffled first-r urn trajectory with final counts C;
2. real Pólya dynamics continue from C; every step feeds G1, kept steps G2;
3. at each kept step the Model-3 choice is maximally coupled to the
   Model-2 choice (current proportions vs. R*);
4. G3's edges start an i.i.d. stream of R*-pair labels; G4 takes its first
   N4 ~ Poisson(c n^2 / 2) labels;
5. G5 = G4 unless r > floor(c n^2), where G4 is empty and G5 is fresh;
6. each G6 multiplicity is Poisson-split against the G5 multiplicity;
7. G7 is G6 without loops.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .distance import rowsum_diff
from .errors import InvalidParameterError
from .models import (
    LatentState,
    ModelParams,
    _model5_from_latent,
    first_kept_slot,
    gen_model6,
    kept_edges,
    poisson_upper_rates,
    random_pair_edges,
    sample_latent,
    upper_indices,
    w_rates,
)
from .multigraph import Multigraph
from .rand import Stream, categorical_index, sample_exponential, sample_poisson, sample_uniform
from .urn import UrnTrajectory, fenwick_add, fenwick_build, fenwick_search, run_urn_conditioned

__all__ = [
    "CoupledRealization",
    "SplitPair",
    "build_chain",
    "chain_violations",
    "maximal_categorical_coupling",
    "poisson_splitting",
    "split_given_second",
    "rowsum_diff",
]


def _distribution(w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.size == 0 or np.any(w < 0) or not np.all(np.isfinite(w)):
        raise InvalidParameterError("weights must be a finite non-negative 1-d vector")
    tot = w.sum()
    if not tot > 0:
        raise InvalidParameterError("weights must not all be zero")
    return w / tot


def maximal_categorical_coupling(pw, qw, s: Stream, size=None):
    """Draw ``(i, j)`` with ``i ~ p``, ``j ~ q`` and ``P(i != j) = TV(p, q)``.

    With ``size`` set, returns two index arrays of that many independent pairs.
    """
    p = _distribution(pw)
    q = _distribution(qw)
    if p.size != q.size:
        raise InvalidParameterError("distributions differ in length")
    overlap = np.minimum(p, q)
    mass = overlap.sum()
    m = 1 if size is None else int(size)
    u = sample_uniform(s, (m, 3))
    same = u[:, 0] <= mass
    i = np.empty(m, np.int64)
    j = np.empty(m, np.int64)
    if same.any():
        k = categorical_index(np.cumsum(overlap), u[same, 1])
        i[same] = k
        j[same] = k
    diff = ~same
    if diff.any():
        i[diff] = categorical_index(np.cumsum(p - overlap), u[diff, 1])
        j[diff] = categorical_index(np.cumsum(q - overlap), u[diff, 2])
    if size is None:
        return int(i[0]), int(j[0])
    return i, j


@dataclass(frozen=True)
class SplitPair:
    Y: int
    Z: int
    H: int
    H_star: int
    mu: float
    mu_star: float


def _check_split_rates(lam_a, lam_b):
    for lam in (lam_a, lam_b):
        if not np.isfinite(lam) or lam < 0:
            raise InvalidParameterError(f"Poisson parameters must be finite and >= 0, got {lam!r}")


def poisson_splitting(lam_a: float, lam_b: float, s: Stream, size=None) -> SplitPair:
    """Couple Pois(lam_a) and Pois(lam_b) through a shared Pois(min) part.

    The larger side additionally receives ``H* ~ Pois(|lam_a - lam_b|)``, so
    both marginals are exact and ``|Y - Z| = H*``.  With ``size`` set, the
    count fields are arrays of independent draws.
    """
    _check_split_rates(lam_a, lam_b)
    mu = min(lam_a, lam_b)
    mu_star = abs(lam_a - lam_b)
    h = sample_poisson(s, mu, size)
    h_star = sample_poisson(s, mu_star, size)
    y = h + (h_star if lam_a > lam_b else 0)
    z = h + (h_star if lam_b > lam_a else 0)
    return SplitPair(Y=y, Z=z, H=h, H_star=h_star, mu=mu, mu_star=mu_star)


def split_given_second(lam_a, lam_b, z, s: Stream) -> np.ndarray:
    """Complete a realized ``Z ~ Pois(lam_b)`` to the splitting coupling's ``Y``.

    Same joint law as ``poisson_splitting``: where ``lam_a >= lam_b`` the shared
    part is ``Z`` itself and ``Y = Z + Pois(lam_a - lam_b)``; otherwise the shared
    part is a binomial thinning of ``Z`` with keep probability ``lam_a / lam_b``.
    """
    lam_a = np.asarray(lam_a, dtype=float)
    lam_b = np.asarray(lam_b, dtype=float)
    z = np.asarray(z, dtype=np.int64)
    up = lam_a >= lam_b
    y = np.empty_like(z)
    y[up] = z[up] + sample_poisson(s, lam_a[up] - lam_b[up])
    down = ~up
    keep = np.divide(lam_a[down], lam_b[down], out=np.zeros(int(down.sum())), where=lam_b[down] > 0)
    y[down] = s.rng.binomial(z[down], keep)
    return y


@numba.njit(cache=True)
def _coupled_tail(counts, tree, total, t0, first_kept, last_kept, q, u1, u2, u3, out_i, out_j):
    """Pólya steps t0+1.. with Model-3 choices maximally coupled on kept steps.

    Steps are 1-based; ``out_j`` is -1 outside [first_kept, last_kept].
    Returns the number of steps where the two choices differ.
    """
    n = counts.shape[0]
    mismatches = 0
    for k in range(u1.shape[0]):
        t = t0 + 1 + k
        i = fenwick_search(tree, u1[k] * total)
        if first_kept <= t <= last_kept:
            p_i = counts[i] / total
            if u2[k] * p_i <= q[i]:
                j = i
            else:
                resid = 0.0
                for m in range(n):
                    d = q[m] - counts[m] / total
                    if d > 0:
                        resid += d
                j = i
                if resid > 0:
                    x = u3[k] * resid
                    acc = 0.0
                    last_pos = i
                    for m in range(n):
                        d = q[m] - counts[m] / total
                        if d > 0:
                            acc += d
                            last_pos = m
                            if acc >= x:
                                break
                    j = last_pos
            if j != i:
                mismatches += 1
            out_j[k] = j
        else:
            out_j[k] = -1
        counts[i] += 1
        fenwick_add(tree, i, 1)
        total += 1
        out_i[k] = i
    return mismatches


@dataclass
class CoupledRealization:
    params: ModelParams
    latent: LatentState
    graphs: dict = field(default_factory=dict)
    n4: int | None = None
    mismatches: int | None = None
    hstar: np.ndarray | None = None

    def __getitem__(self, k: int) -> Multigraph:
        return self.graphs[k]

    def pair(self, a: int, b: int) -> tuple[Multigraph, Multigraph]:
        return self.graphs[a], self.graphs[b]

    def per_pair_diffs(self) -> dict:
        """Row sums of |U - V| for each adjacent pair present."""
        out = {}
        for k in range(1, 7):
            if k in self.graphs and k + 1 in self.graphs:
                out[(k, k + 1)] = rowsum_diff(self.graphs[k], self.graphs[k + 1])[1]
        return out


FAULTS = (None, "latent_off_by_one")


def build_chain(p: ModelParams, s: Stream, first: int = 1, last: int = 7, fault: str | None = None) -> CoupledRealization:
    """Realize graphs ``first..last`` of the composed coupling.

    Restricting to ``first >= 3`` (or ``first >= 6``) starts the construction
    from an equivalent representation of that model, skipping the urn (or
    everything but the exponentials); the joint law of the graphs that are
    built is unchanged.
    """
    if not (1 <= first <= last <= 7):
        raise InvalidParameterError(f"need 1 <= first <= last <= 7, got {first}, {last}")
    if fault not in FAULTS:
        raise InvalidParameterError(f"unknown fault {fault!r}")
    n, steps = p.n, p.steps
    want = set(range(first, last + 1))

    if first >= 6:
        # same sub-stream as sample_latent, so xi does not depend on ``first``
        xi = sample_exponential(s.child("latent").child("xi"), n)
        latent = LatentState(xi=xi, C=np.zeros(0, np.int64), r=0, R_star=np.zeros(0), first=UrnTrajectory(n))
        g6 = gen_model6(p, s.child("g6"), xi=xi)
        graphs = {6: g6}
        if 7 in want:
            graphs[7] = g6.without_loops()
        return CoupledRealization(p, latent, {k: v for k, v in graphs.items() if k in want})

    p.require_alpha()
    latent = sample_latent(p, s.child("latent"), with_trajectory=first <= 2)
    if fault == "latent_off_by_one":
        C = latent.C + 1
        latent = sample_latent_from_counts(p, latent.xi, C, s.child("latent"), first <= 2)
    r = latent.r
    kmin = first_kept_slot(r)
    K = p.edge_slots
    graphs: dict[int, Multigraph] = {}
    mismatches = None

    if first <= 2:
        # (2)+(3): continue the urn from C, coupling Model-3 choices on kept steps
        counts = latent.C.copy()
        tree = fenwick_build(counts)
        m = max(0, steps - r)
        us = s.child("tail")
        u1 = sample_uniform(us, m)
        u2 = sample_uniform(us, m)
        u3 = sample_uniform(us, m)
        out_i = np.empty(m, np.int64)
        out_j = np.empty(m, np.int64)
        mismatches = int(_coupled_tail(counts, tree, float(latent.C.sum()), r, 2 * kmin + 1, 2 * K,
                                       latent.R_star, u1, u2, u3, out_i, out_j))
        latent.tail = UrnTrajectory(n, out_i)
        model2 = np.concatenate([latent.first.choices, out_i])[:steps]
        graphs[1] = Multigraph.from_edges(n, model2[0:2 * K:2], model2[1:2 * K:2])
        graphs[2] = Multigraph.from_edges(n, model2[2 * kmin:2 * K:2], model2[2 * kmin + 1:2 * K:2])
        model3 = np.concatenate([np.full(min(r, steps), -1, np.int64), out_j])
        a3 = model3[2 * kmin:2 * K:2]
        b3 = model3[2 * kmin + 1:2 * K:2]
    else:
        a3, b3 = random_pair_edges(n, latent.R_star, kept_edges(steps, r), s.child("g3"))

    truncated = r > steps
    graphs[3] = Multigraph.from_edges(n, a3, b3)
    n4 = None
    if last >= 4:
        n4 = sample_poisson(s.child("n4"), p.c * n * n / 2.0)
        if truncated:
            graphs[4] = Multigraph(n)
        else:
            m3 = a3.size
            if n4 <= m3:
                a4, b4 = a3[:n4], b3[:n4]
            else:
                ea, eb = random_pair_edges(n, latent.R_star, n4 - m3, s.child("g4extra"))
                a4, b4 = np.concatenate([a3, ea]), np.concatenate([b3, eb])
            graphs[4] = Multigraph.from_edges(n, a4, b4)
    hstar = None
    if last >= 5:
        graphs[5] = _model5_from_latent(p, latent, s.child("g5")) if truncated else graphs[4]
    if last >= 6:
        lam_w = w_rates(latent.xi, p.c)
        lam_5 = poisson_upper_rates(latent.R_star, p.c * n * n)
        ii, jj = upper_indices(n)
        z = graphs[5].A[ii, jj]
        y = split_given_second(lam_w[ii, jj], lam_5[ii, jj], z, s.child("split"))
        upper = np.zeros((n, n), np.int64)
        upper[ii, jj] = y
        graphs[6] = Multigraph.from_upper(n, upper)
        hstar = np.zeros((n, n), np.int64)
        hstar[ii, jj] = np.abs(y - z)
    if last >= 7:
        graphs[7] = graphs[6].without_loops()

    return CoupledRealization(
        params=p,
        latent=latent,
        graphs={k: v for k, v in graphs.items() if k in want},
        n4=n4,
        mismatches=mismatches,
        hstar=hstar,
    )


def sample_latent_from_counts(p: ModelParams, xi, C, s: Stream, with_trajectory: bool) -> LatentState:
    C = np.asarray(C, dtype=np.int64)
    total = int(C.sum())
    first = run_urn_conditioned(p.n, C, s.child("arrangement")) if with_trajectory else UrnTrajectory(p.n)
    return LatentState(xi=xi, C=C, r=total - p.n, R_star=C / float(total), first=first)


def chain_violations(real: CoupledRealization) -> list[str]:
    """Names of the per-realization coupling properties that fail (empty when all hold)."""
    g = real.graphs
    out = []
    if 1 in g and 2 in g and np.any(g[2].A > g[1].A):
        out.append("G2 <= G1")
    if 4 in g and 5 in g and real.latent.r <= real.params.steps and g[4] != g[5]:
        out.append("G4 == G5")
    if 3 in g and 4 in g:
        d = g[3].A - g[4].A
        if not (np.all(d >= 0) or np.all(d <= 0)):
            out.append("G3/G4 sign coherence")
    if 6 in g and 7 in g and not np.array_equal(g[7].A, g[6].without_loops().A):
        out.append("G7 == G6 minus diagonal")
    return out
