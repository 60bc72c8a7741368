import math

import numpy as np
import pytest
from scipy import stats

from pagcoupling.couplings import (
    build_chain,
    chain_violations,
    maximal_categorical_coupling,
    poisson_splitting,
    split_given_second,
)
from pagcoupling.distance import rowsum_diff
from pagcoupling.errors import InvalidParameterError
from pagcoupling.experiments import chi2_gof, marginal_samples, verify_marginals
from pagcoupling.models import ModelParams, poisson_upper_rates, sample_latent
from pagcoupling.multigraph import Multigraph
from pagcoupling.rand import StreamKey, make_stream


def stream(label="c", rep=0, seed=5):
    return make_stream(StreamKey(seed, rep, label))


def test_coupling_equal_laws_never_differ():
    i, j = maximal_categorical_coupling([0.2, 0.3, 0.5], [2, 3, 5], stream(), size=10 ** 4)
    assert np.array_equal(i, j)


def test_coupling_disjoint_supports():
    i, j = maximal_categorical_coupling([1, 0], [0, 1], stream(), size=1000)
    assert np.all(i == 0) and np.all(j == 1)
    assert maximal_categorical_coupling([1, 0], [0, 1], stream()) == (0, 1)


def test_coupling_mismatch_is_tv():
    i, j = maximal_categorical_coupling([0.5, 0.5], [0.75, 0.25], stream(), size=10 ** 6)
    assert abs((i != j).mean() - 0.25) < 0.002


def test_coupling_marginals_and_optimality():
    s = stream("many")
    m = 20_000
    for _ in range(100):
        k = int(s.rng.integers(1, 11))
        p = s.rng.random(k) * (s.rng.random(k) < 0.8)
        q = s.rng.random(k)
        if p.sum() == 0:
            p[0] = 1.0
        pn, qn = p / p.sum(), q / q.sum()
        tv = 0.5 * np.abs(pn - qn).sum()
        i, j = maximal_categorical_coupling(p, q, s, size=m)
        sigma = math.sqrt(max(tv * (1 - tv), 1e-12) / m)
        assert abs((i != j).mean() - tv) <= 3 * sigma + 1e-9
        assert chi2_gof(np.bincount(i, minlength=k), pn).p_value > 1e-6
        assert chi2_gof(np.bincount(j, minlength=k), qn).p_value > 1e-6


@pytest.mark.parametrize("p,q", [([1, 2], [1, 2, 3]), ([0, 0], [1, 1]), ([-1, 2], [1, 1])])
def test_coupling_rejects(p, q):
    with pytest.raises(InvalidParameterError):
        maximal_categorical_coupling(p, q, stream())


def test_split_equal_rates():
    sp = poisson_splitting(2.5, 2.5, stream(), size=1000)
    assert np.array_equal(sp.Y, sp.Z)


def test_split_zero_side():
    sp = poisson_splitting(3.0, 0.0, stream(), size=10 ** 5)
    assert not np.any(sp.Z)
    assert abs(sp.Y.mean() - 3.0) < 0.03


def test_split_gap_mean():
    sp = poisson_splitting(3.0, 1.0, stream(), size=10 ** 6)
    assert abs(np.abs(sp.Y - sp.Z).mean() - 2.0) < 0.01
    assert np.array_equal(np.abs(sp.Y - sp.Z), sp.H_star)
    assert np.all(np.minimum(sp.Y, sp.Z) >= sp.H)


def test_split_rejects():
    with pytest.raises(InvalidParameterError):
        poisson_splitting(-1.0, 1.0, stream())


@pytest.mark.parametrize("lam_a,lam_b", [(3.0, 1.0), (1.0, 3.0), (2.0, 2.0)])
def test_split_given_second_marginal(lam_a, lam_b):
    m = 10 ** 5
    s = stream(f"sg{lam_a}{lam_b}")
    z = s.rng.poisson(lam_b, m)
    y = split_given_second(np.full(m, lam_a), np.full(m, lam_b), z, s)
    top = 25
    obs = np.bincount(np.minimum(y, top + 1), minlength=top + 2)
    assert chi2_gof(obs, stats.poisson.pmf(np.arange(top + 1), lam_a)).passed
    gap = np.abs(y - z)
    assert abs(gap.mean() - abs(lam_a - lam_b)) < 0.02
    if lam_a >= lam_b:
        assert np.all(y >= z)
    else:
        assert np.all(y <= z)


def test_rowsum_examples():
    path = Multigraph.from_edges(3, [0, 1], [1, 2])
    m, sigma = rowsum_diff(path, Multigraph(3))
    assert m == 2 and list(sigma) == [1, 2, 1]
    assert rowsum_diff(path, path)[0] == 0


def chain_properties(real):
    p = real.params
    g = real.graphs
    assert all(h.n == p.n for h in g.values())
    assert np.all(g[2].A <= g[1].A)
    assert g[1].edge_count() == p.steps // 2
    if real.latent.r <= p.steps:
        assert g[4] == g[5]
    d = g[3].A - g[4].A
    assert np.all(d >= 0) or np.all(d <= 0)
    assert not np.diagonal(g[7].A).any()
    assert np.array_equal(g[7].A, g[6].without_loops().A)
    assert rowsum_diff(g[6], g[7])[0] == np.diagonal(g[6].A).max()
    ii, jj = np.triu_indices(p.n)
    assert np.array_equal(real.hstar[ii, jj], np.abs(g[6].A - g[5].A)[ii, jj])
    assert chain_violations(real) == []


@pytest.mark.parametrize("n,c,alpha", [(3, 1.0, 1.5), (8, 1.0, 1.5), (16, 0.5, 5 / 3), (5, 0.2, 1.9)])
def test_chain_structure(n, c, alpha):
    p = ModelParams(n, c, alpha)
    truncated = 0
    for rep in range(300):
        real = build_chain(p, stream("chain", rep))
        chain_properties(real)
        truncated += real.latent.r > p.steps
    if (n, c) == (5, 0.2):
        assert truncated > 0  # the truncated branch is exercised


def test_chain_g2_g3_share_counts():
    p = ModelParams(10, 1.0, 1.5)
    for rep in range(50):
        real = build_chain(p, stream("g23", rep))
        assert real[2].edge_count() == real[3].edge_count()


def test_chain_is_deterministic():
    p = ModelParams(12, 1.0, 1.5)
    a = build_chain(p, stream("det"))
    b = build_chain(p, stream("det"))
    assert all(a[k] == b[k] for k in range(1, 8))


def test_chain_restricted_ranges_agree():
    p = ModelParams(9, 1.0, 1.5)
    full = build_chain(p, stream("sub"))
    tail = build_chain(p, stream("sub"), first=6)
    assert np.array_equal(full.latent.xi, tail.latent.xi)
    assert tail[7] == tail[6].without_loops()


def test_chain_rejects_bad_range():
    with pytest.raises(InvalidParameterError):
        build_chain(ModelParams(4, 1.0, 1.5), stream(), first=5, last=2)


def test_split_conditional_law_given_rstar():
    # Z (the G5 side) is Poisson with the Model-5 rate given R*
    p = ModelParams(6, 1.0, 1.5)
    lat = sample_latent(p, stream("lat"), with_trajectory=False)
    lam = poisson_upper_rates(lat.R_star, p.c * 36)[0, 1]
    s = stream("zlaw")
    z = s.rng.poisson(lam, 50_000)
    top = 30
    obs = np.bincount(np.minimum(z, top + 1), minlength=top + 2)
    assert chi2_gof(obs, stats.poisson.pmf(np.arange(top + 1), lam)).passed


@pytest.mark.parametrize("n", [3, 16])
def test_marginals_other_sizes(n):
    data = marginal_samples(n, 1.5, 1.0, 3000, seed=11)
    for pair in ((1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7)):
        assert verify_marginals(pair, n, 1.5, 3000, data=data).passed, pair


def test_pair_45_zero_when_untruncated():
    p = ModelParams(32, 1.0, 1.5)
    for rep in range(2000):
        real = build_chain(p, stream("45", rep), first=4, last=5)
        assert rowsum_diff(real[4], real[5])[0] == 0


def test_chain_violations_detects_breakage():
    p = ModelParams(6, 1.0, 1.5)
    real = build_chain(p, stream("viol"))
    assert chain_violations(real) == []
    real.graphs[2] = Multigraph.from_matrix(real[1].A + np.eye(6, dtype=np.int64))
    extra = np.zeros((6, 6), np.int64)
    extra[0, 1] = extra[1, 0] = 1
    real.graphs[7] = Multigraph.from_matrix(real[7].A + extra)
    assert chain_violations(real) == ["G2 <= G1", "G7 == G6 minus diagonal"]
